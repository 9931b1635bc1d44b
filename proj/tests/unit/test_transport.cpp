#include "helpers.hpp"

#include "switching/transport.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

using namespace switching;
using namespace testing_util;
using Catch::Approx;

namespace {

EmpiricalMeasure scalars(const std::vector<double>& xs) { return EmpiricalMeasure::from_scalars(xs); }

double brute_force_assignment(const Matrix& C) {
  std::vector<int> p(C.rows());
  std::iota(p.begin(), p.end(), 0);
  double best = 1e300;
  do {
    double s = 0;
    for (int k = 0; k < C.rows(); ++k) s += C(k, p[k]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

}  // namespace

TEST_CASE("trivial measures") {
  const QuadraticMetric I(Matrix::Identity(1, 1));
  const auto a = scalars({0.5});
  const auto b = scalars({2.5});
  CHECK(ot_exact(a, b, PowerMetric{1.0}, I).value == Approx(2.0));
  const auto c = scalars({3, 1, 2, 5});
  const auto d = scalars({5, 2, 3, 1});
  CHECK(ot_exact(c, d, PowerMetric{1.0}, I).value == Approx(0.0).margin(1e-15));
  CHECK(ot_exact(c, d, TruncatedD{0.5}, I).value == Approx(0.0).margin(1e-15));
}

TEST_CASE("assignment matches brute force") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0, 10);
  for (int rep = 0; rep < 30; ++rep) {
    Matrix C(7, 7);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) C(i, j) = u(gen);
    const AssignmentResult r = solve_assignment(C);
    CHECK(r.cost == Approx(brute_force_assignment(C)).epsilon(1e-12));
    for (int i = 0; i < 7; ++i) {
      for (int j = 0; j < 7; ++j) CHECK(r.u(i) + r.v(j) <= C(i, j) + 1e-9);
      CHECK(r.u(i) + r.v(r.row_to_col[i]) == Approx(C(i, r.row_to_col[i])));
    }
  }
}

TEST_CASE("one-dimensional W1 by order statistics") {
  const QuadraticMetric I(Matrix::Identity(1, 1));
  CHECK(w1_sorted_1d({0, 1}, {1, 0}) == 0.0);
  CHECK(w1_sorted_1d({0}, {-3}) == 3.0);
  std::mt19937_64 gen(22);
  std::normal_distribution<double> n;
  std::vector<double> a(64), b(64);
  for (auto& x : a) x = n(gen);
  for (auto& x : b) x = 1 + 2 * n(gen);
  const double sorted = w1_sorted_1d(a, b);
  CHECK(ot_exact(scalars(a), scalars(b), PowerMetric{1.0}, I).value == Approx(sorted).epsilon(1e-12));
  CHECK(w1_sorted_1d(scalars(a), scalars(b)) == Approx(sorted));
}

TEST_CASE("cost functions") {
  const QuadraticMetric M(mat(2, 2, {4, 0, 0, 1}));
  const Vector x = vec({0, 0}), y = vec({0.5, 0});  // d(x, y) = 1
  const Vector z = vec({0, 0.25});                  // d(x, z) = 0.25
  CHECK(eval_cost(PowerMetric{0.5}, M, x, 0, z, 0) == Approx(0.5));
  CHECK(eval_cost(PowerMetric{0.5}, M, x, 0, z, 1) == Approx(1.5));
  CHECK(eval_cost(TruncatedD{0.5}, M, x, 0, z, 0) == Approx(0.5));
  CHECK(eval_cost(TruncatedD{0.5}, M, x, 0, vec({8, 0}), 0) == 1.0);
  CHECK(eval_cost(TruncatedD{0.5}, M, x, 0, z, 1) == 1.0);
  const WeightedTilde w{0.5, 0.5, Vector::Zero(2)};
  // (min(1, 0.5 / 0.5)) (1 + 0 + 1) under the square root.
  CHECK(eval_cost(w, M, x, 0, y, 0) == Approx(std::sqrt(2.0)));
  CHECK(eval_cost(w, M, x, 0, z, 0) == Approx(std::sqrt(1.0 * 1.5)));
  CHECK(eval_cost(w, M, z, 1, z, 1) == 0.0);
  CHECK(eval_cost(w, M, z, 0, z, 1) == Approx(std::sqrt(2.0)));
}

TEST_CASE("general weights agree with the uniform expansion") {
  const QuadraticMetric I(Matrix::Identity(1, 1));
  EmpiricalMeasure mu{{vec({0}), vec({1})}, {0, 0}, {0.4, 0.6}};
  EmpiricalMeasure nu{{vec({0.5}), vec({3}), vec({-1})}, {0, 1, 0}, {0.2, 0.4, 0.4}};
  const OtResult general = ot_exact(mu, nu, PowerMetric{1.0}, I);
  CHECK(general.method == OtMethod::Transportation);
  CHECK(general.dual_value == Approx(general.value).epsilon(1e-10));
  CHECK((general.plan.rowwise().sum() - vec({0.4, 0.6})).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((general.plan.colwise().sum().transpose() - vec({0.2, 0.4, 0.4})).cwiseAbs().maxCoeff() < 1e-12);

  const EmpiricalMeasure mu5 = EmpiricalMeasure::uniform_cloud(
      {vec({0}), vec({0}), vec({1}), vec({1}), vec({1})}, {0, 0, 0, 0, 0});
  const EmpiricalMeasure nu5 = EmpiricalMeasure::uniform_cloud(
      {vec({0.5}), vec({3}), vec({3}), vec({-1}), vec({-1})}, {0, 1, 1, 0, 0});
  const OtResult uniform = ot_exact(mu5, nu5, PowerMetric{1.0}, I);
  CHECK(uniform.method == OtMethod::Assignment);
  CHECK(uniform.value == Approx(general.value).epsilon(1e-12));
  CHECK(ot_exact(mu5, nu5, PowerMetric{1.0}, I, OtMethod::Transportation).value ==
        Approx(general.value).epsilon(1e-12));
}

TEST_CASE("validation and limits") {
  const QuadraticMetric I(Matrix::Identity(1, 1));
  EmpiricalMeasure bad{{vec({0}), vec({1})}, {0, 0}, {0.5, 0.6}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  std::vector<double> big(513, 0.0);
  CHECK_THROWS_AS(ot_exact(scalars(big), scalars(big), PowerMetric{1.0}, I), LimitError);
  std::vector<double> ok(512, 0.0);
  CHECK(ot_exact(scalars(ok), scalars(ok), PowerMetric{1.0}, I).value == 0.0);
}
