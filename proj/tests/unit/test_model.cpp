#include "helpers.hpp"

#include "switching/model.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace switching;
using namespace testing_util;
using Catch::Approx;

namespace {

SwitchingSpec sigmoid_spec(const Matrix& c, const Matrix& m, const Vector& w, double b) {
  SwitchingSpec s;
  s.dim = static_cast<int>(w.size());
  for (int k = 0; k < c.rows(); ++k) {
    s.regimes.emplace_back(AffineFlow{-Matrix::Identity(s.dim, s.dim), Vector::Zero(s.dim)});
  }
  s.rates = SigmoidRates{c, m, w, b};
  identity_metric(s);
  return s;
}

}  // namespace

TEST_CASE("constant rates: bound, zero Lipschitz constant, irreducible") {
  const SwitchingSpec s = scalar_dilations({-1, 1}, mat(2, 2, {0, 2, 1, 0}));
  const ValidationReport r = validate_spec(s);
  CHECK(r.a_bar == 2.0);
  CHECK(r.kappa == 0.0);
  CHECK(r.irreducible);
  CHECK(r.constant_rates);
  CHECK(eval_rate(s, vec({3.0}), RegimeId(0), RegimeId(1)) == 2.0);
}

TEST_CASE("zero modulation behaves like constant rates") {
  const Matrix c = mat(2, 2, {0, 1, 1, 0});
  const SwitchingSpec s = sigmoid_spec(c, Matrix::Zero(2, 2), vec({1.0}), 0.0);
  CHECK(has_constant_rates(s));
  CHECK(validate_spec(s).kappa == 0.0);
  CHECK(constant_rate_matrix(s) == c);
}

TEST_CASE("sigmoid rates: midpoint, saturation and bounds") {
  const SwitchingSpec s =
      sigmoid_spec(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {0, 1, 0, 0}), vec({2.0}), 0.0);
  CHECK(eval_rate(s, vec({0.0}), RegimeId(0), RegimeId(1)) == Approx(1.5));
  CHECK(eval_rate(s, vec({50.0}), RegimeId(0), RegimeId(1)) == Approx(2.0));
  CHECK(eval_rate(s, vec({-50.0}), RegimeId(0), RegimeId(1)) == Approx(1.0));
  const ValidationReport r = validate_spec(s);
  CHECK(r.a_bar == Approx(2.0));
  CHECK(r.kappa == Approx(0.5));
  CHECK(rate_lower(s)(0, 1) == 1.0);
  CHECK(rate_upper(s)(0, 1) == 2.0);
  CHECK_THROWS_AS(eval_rate(s, vec({0.0}), RegimeId(0), RegimeId(0)), std::invalid_argument);
}

TEST_CASE("kappa dominates sampled difference quotients and is nearly attained") {
  const SwitchingSpec s =
      sigmoid_spec(mat(2, 2, {0, 1, 1, 0}), mat(2, 2, {0, 1, 0, 0}), vec({2.0}), 0.0);
  const double kappa = validate_spec(s).kappa;
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double best = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const Vector x = vec({u(gen)});
    const Vector y = x + vec({1e-4 * u(gen)});
    const double d = std::abs(x(0) - y(0));
    if (d == 0.0) continue;
    for (int i = 0; i < 2; ++i) {
      double diff = 0.0;
      for (int j = 0; j < 2; ++j) {
        if (i != j) diff += std::abs(eval_rate(s, x, RegimeId(i), RegimeId(j)) -
                                     eval_rate(s, y, RegimeId(i), RegimeId(j)));
      }
      best = std::max(best, diff / d);
    }
  }
  CHECK(best <= kappa * (1 + 1e-9));
  CHECK(best >= 0.99 * kappa);
}

TEST_CASE("rate_row and partial sums") {
  const SwitchingSpec s = scalar_dilations({-1, 0, 1}, mat(3, 3, {0, 1, 2, 3, 0, 4, 5, 6, 0}));
  std::vector<double> row(3);
  CHECK(rate_row(s, vec({0.0}), 1, row) == 7.0);
  CHECK(row == std::vector<double>{3, 0, 4});
  const std::vector<int> targets{0, 2};
  CHECK(rate_sum_inf(s, 1, targets) == 7.0);
  CHECK(rate_sum_sup(s, 2, std::vector<int>{0}) == 5.0);
  CHECK(rate_identically_zero(s, 0, 1) == false);
}

TEST_CASE("reducible lower rate matrix is reported") {
  const SwitchingSpec s = scalar_dilations({-1, 1}, mat(2, 2, {0, 1, 0, 0}));
  const ValidationReport r = validate_spec(s);
  CHECK_FALSE(r.irreducible);
  CHECK(r.components.size() == 2);
}

TEST_CASE("malformed specs are rejected") {
  SwitchingSpec s = elementary(2, 1);
  SECTION("negative rate") {
    s.rates = ConstantRates{mat(2, 2, {0, -1, 1, 0})};
    CHECK_THROWS_AS(check_spec(s), SpecError);
  }
  SECTION("wrong size rate matrix") {
    s.rates = ConstantRates{Matrix::Zero(3, 3)};
    CHECK_THROWS_AS(check_spec(s), SpecError);
  }
  SECTION("non-PD metric") {
    s.metric.M = Matrix::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(check_spec(s), SpecError);
  }
  SECTION("q outside (0,1]") {
    s.metric.q = 1.5;
    CHECK_THROWS_AS(check_spec(s), SpecError);
    s.metric.q = 0.0;
    CHECK_THROWS_AS(check_spec(s), SpecError);
  }
  SECTION("dimension mismatch") {
    s.regimes[0] = AffineFlow{Matrix::Identity(2, 2), Vector::Zero(2)};
    CHECK_THROWS_AS(check_spec(s), SpecError);
  }
}

TEST_CASE("quadratic metric") {
  const QuadraticMetric m(mat(2, 2, {4, 0, 0, 1}));
  CHECK(m.distance(vec({1, 0}), vec({0, 0})) == Approx(2.0));
  CHECK(m.dual_norm(vec({2, 0})) == Approx(1.0));
}
