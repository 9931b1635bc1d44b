#include "helpers.hpp"

#include "switching/chain.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace switching;
using namespace testing_util;
using Catch::Approx;

TEST_CASE("stationary distributions") {
  CHECK(stationary_distribution(GeneratorMatrix::from_rates(mat(2, 2, {0, 3, 3, 0})))
            .isApprox(vec({0.5, 0.5})));
  // Rate 1 -> -1 is 2, rate -1 -> 1 is 1; regimes ordered (-1, 1).
  const Vector nu = stationary_distribution(GeneratorMatrix::from_rates(mat(2, 2, {0, 1, 2, 0})));
  CHECK(nu(0) == Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(nu(1) == Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(stationary_distribution(GeneratorMatrix::from_rates(mat(3, 3, {0, 1, 0, 0, 0, 1, 1, 0, 0})))
            .isApprox(Vector::Constant(3, 1.0 / 3.0)));
  CHECK_THROWS_AS(stationary_distribution(GeneratorMatrix::from_rates(mat(2, 2, {0, 1, 0, 0}))),
                  NotApplicable);
}

TEST_CASE("generator validation") {
  CHECK_THROWS_AS(GeneratorMatrix(mat(2, 2, {-1, 1, 1, 0})), std::invalid_argument);
  CHECK_THROWS_AS(GeneratorMatrix(mat(2, 2, {1, -1, 1, -1})), std::invalid_argument);
}

TEST_CASE("irreducibility") {
  CHECK(irreducibility(mat(2, 2, {0, 1, 1, 0})).irreducible);
  CHECK_FALSE(irreducibility(mat(2, 2, {0, 1, 0, 0})).irreducible);
  const auto r = irreducibility(mat(4, 4, {0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 2, 0, 0, 2, 0}));
  CHECK_FALSE(r.irreducible);
  CHECK(r.components.size() == 2);
}

TEST_CASE("birth-death product formula") {
  BirthDeathRates flat{{1, 1, 1}, {0, 1, 1, 1}};
  CHECK(birth_death_nu(flat).isApprox(Vector::Constant(4, 0.25)));
  BirthDeathRates two{{2}, {0, 1}};
  CHECK(birth_death_nu(two).isApprox(vec({1.0 / 3.0, 2.0 / 3.0})));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  for (int rep = 0; rep < 20; ++rep) {
    BirthDeathRates r;
    r.death.push_back(0.0);
    for (int k = 0; k < 5; ++k) r.birth.push_back(u(gen)), r.death.push_back(u(gen));
    const Matrix G = birth_death_generator(r).matrix();
    Eigen::FullPivLU<Matrix> lu(G.transpose());
    Vector ker = lu.kernel().col(0);
    ker /= ker.sum();
    CHECK((birth_death_nu(r) - ker).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("tilted exponent basics") {
  const GeneratorMatrix Q = GeneratorMatrix::from_rates(mat(3, 3, {0, 1, 2, 1, 0, 1, 3, 1, 0}));
  SECTION("constant alpha") {
    const TiltedSolution s = tilted_exponent(Q, Vector::Constant(3, 0.7), 0.5);
    CHECK(s.eta == Approx(0.35).epsilon(1e-12));
    CHECK(s.psi.isApprox(Vector::Ones(3), 1e-10));
    CHECK(s.upper_constant == Approx(1.0));
  }
  SECTION("small q slope is the mean of alpha") {
    const Vector alpha = vec({1.0, -2.0, 0.5});
    const Vector nu = stationary_distribution(Q);
    const double q = 1e-4;
    CHECK(tilted_exponent(Q, alpha, q).eta / q == Approx(nu.dot(alpha)).epsilon(1e-3));
  }
  SECTION("eigen residual") {
    const Vector alpha = vec({1.0, -2.0, 0.5});
    const TiltedSolution s = tilted_exponent(Q, alpha, 0.8);
    const Matrix B = Q.matrix() - 0.8 * Matrix(alpha.asDiagonal());
    CHECK((B * s.psi + s.eta * s.psi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.phi.transpose() * B + s.eta * s.phi.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(s.psi.minCoeff() == Approx(1.0));
    CHECK(s.phi.sum() == Approx(1.0));
  }
  CHECK_THROWS_AS(tilted_exponent(Q, Vector::Ones(3), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tilted_exponent(Q, Vector::Ones(2), 0.5), std::invalid_argument);
}

TEST_CASE("elementary chain closed form") {
  // Q = [[-1,1],[2,-2]], alpha = (1,-1): eta(q) = (3 - sqrt(9 - 4q + 4q^2)) / 2.
  const GeneratorMatrix Q = GeneratorMatrix::from_rates(mat(2, 2, {0, 1, 2, 0}));
  const Vector alpha = vec({1.0, -1.0});
  for (double q : {0.1, 0.5, 0.9}) {
    CHECK(tilted_exponent(Q, alpha, q).eta ==
          Approx((3 - std::sqrt(9 - 4 * q + 4 * q * q)) / 2).epsilon(1e-12));
  }
}

TEST_CASE("optimize_q") {
  const GeneratorMatrix Q = GeneratorMatrix::from_rates(mat(2, 2, {0, 1, 2, 0}));
  const QOptimum o = optimize_q(Q, vec({1.0, -1.0}));
  CHECK(o.q == Approx(0.5).margin(1e-5));
  CHECK(o.eta == Approx((3 - 2 * std::sqrt(2.0)) / 2).epsilon(1e-9));
  CHECK(o.mean_alpha == Approx(1.0 / 3.0));
  const QOptimum one = optimize_q(Q, Vector::Ones(2));
  CHECK(one.q == Approx(1.0));
  CHECK(one.eta == Approx(1.0));
  // Reversed rates: the average is negative.
  CHECK_THROWS_AS(optimize_q(GeneratorMatrix::from_rates(mat(2, 2, {0, 2, 1, 0})), vec({1.0, -1.0})),
                  NotApplicable);
}

namespace {

// Enumerates non-decreasing sequences on the grid of candidate values lying
// below the block infima and returns the componentwise maximum.
Vector brute_force_alpha(const Vector& inf) {
  std::vector<double> grid(inf.data(), inf.data() + inf.size());
  std::sort(grid.begin(), grid.end());
  const int n = static_cast<int>(inf.size());
  Vector best = Vector::Constant(n, -1e300);
  std::vector<int> idx(n, 0);
  while (true) {
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
      ok = grid[idx[k]] <= inf(k) && (k == 0 || grid[idx[k - 1]] <= grid[idx[k]]);
    }
    if (ok) {
      for (int k = 0; k < n; ++k) best(k) = std::max(best(k), grid[idx[k]]);
    }
    int k = 0;
    while (k < n && ++idx[k] == static_cast<int>(grid.size())) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace

TEST_CASE("best_alpha") {
  const std::vector<std::vector<int>> singletons{{0}, {1}, {2}};
  CHECK(best_alpha(vec({-1, 1, 2}), singletons) == vec({-1, 1, 2}));
  CHECK(best_alpha(vec({3, -1, 2}), singletons) == vec({-1, -1, 2}));
  CHECK(best_alpha(vec({5, 1, 4, 2}), {{0, 2}, {1, 3}}) == vec({1, 1}));

  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> nblocks(1, 4), val(-6, 6);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = nblocks(gen);
    Vector rho(n);
    std::vector<std::vector<int>> part;
    for (int k = 0; k < n; ++k) rho(k) = val(gen) / 2.0, part.push_back({k});
    CHECK(best_alpha(rho, part) == brute_force_alpha(rho));
  }
}
