#ifndef SWITCHING_TESTS_HELPERS_HPP_
#define SWITCHING_TESTS_HELPERS_HPP_

#include "switching/model.hpp"

#include <cmath>
#include <vector>

namespace testing_util {

using namespace switching;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

inline Matrix mat(int r, int c, std::initializer_list<double> v) {
  Matrix out(r, c);
  int k = 0;
  for (double x : v) out(k / c, k % c) = x, ++k;
  return out;
}

inline void identity_metric(SwitchingSpec& s) {
  s.metric.M = Matrix::Identity(s.dim, s.dim);
  s.metric.x0 = Vector::Zero(s.dim);
  s.metric.q = 1.0;
}

// Scalar dilations x' = lambda_k x with constant rates.
inline SwitchingSpec scalar_dilations(const std::vector<double>& lambda, const Matrix& rates) {
  SwitchingSpec s;
  s.name = "dilations";
  s.dim = 1;
  for (double l : lambda) s.regimes.emplace_back(AffineFlow{Matrix::Constant(1, 1, l), Vector::Zero(1)});
  s.rates = ConstantRates{rates};
  identity_metric(s);
  return s;
}

// Regime 0 is x' = -x, regime 1 is x' = x; a1 is the rate out of regime 1.
inline SwitchingSpec elementary(double a1, double am1) {
  return scalar_dilations({-1.0, 1.0}, mat(2, 2, {0, am1, a1, 0}));
}

}  // namespace testing_util

#endif  // SWITCHING_TESTS_HELPERS_HPP_
