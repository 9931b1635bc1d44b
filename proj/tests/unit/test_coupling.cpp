#include "helpers.hpp"

#include "switching/coupling.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace switching;
using namespace testing_util;
using Catch::Approx;

namespace {

Vector exp_times_ones(const Matrix& B, double t) {
  Eigen::EigenSolver<Matrix> es(B);
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::VectorXcd e = (es.eigenvalues() * t).array().exp().matrix();
  return (V * e.asDiagonal() * V.inverse() * Eigen::VectorXcd::Ones(B.rows())).real();
}

SwitchingSpec three_cycle() {
  return scalar_dilations({-1, 0.5, 1}, mat(3, 3, {0, 1, 0, 0, 0, 1, 1, 0, 0}));
}

}  // namespace

TEST_CASE("identical starts stay identical") {
  const SwitchingSpec s = elementary(2.0, 1.0);
  CouplingOptions o;
  o.grid = {0, 1, 2, 3, 4, 5};
  for (int mode = 0; mode < 2; ++mode) {
    for (std::uint64_t k = 0; k < 20; ++k) {
      const CoupledRun r = mode == 0
                               ? couple_constant(s, vec({1}), vec({1}), RegimeId(0), RegimeId(0), 5.0, {1, k}, o)
                               : couple_uniformized(s, vec({1}), vec({1}), RegimeId(0), RegimeId(0), 5.0, {1, k}, o);
      REQUIRE(r.t_meet);
      CHECK(*r.t_meet == 0.0);
      CHECK(r.separations == 0);
      REQUIRE(r.grid.size() == 6);
      for (const auto& g : r.grid) {
        CHECK(g.i == g.j);
        CHECK(g.x == g.y);
      }
    }
  }
}

TEST_CASE("jump partition") {
  const SwitchingSpec s = three_cycle();
  SECTION("same regime under constant rates never splits") {
    const JumpPartition p = jump_partition(s, vec({1}), 1, vec({-3}), 1, 2.0);
    CHECK(p.lambda0 == 0.0);
    CHECK(p.lambda1 == 0.0);
    CHECK(p.lambda2 == Approx(0.5));
    CHECK(p.lambda0 + p.lambda1 + p.lambda2 + p.lambda3 == Approx(1.0));
  }
  SECTION("different regimes") {
    const JumpPartition p = jump_partition(s, vec({1}), 0, vec({1}), 1, 4.0);
    CHECK(p.lambda0 == Approx(0.25));
    CHECK(p.lambda1 == Approx(0.25));
    CHECK(p.lambda2 == 0.0);
    CHECK(p.lambda0 + p.lambda1 + p.lambda2 + p.lambda3 == Approx(1.0));
    const auto first = p.select(0.1, 0, 1);
    CHECK(first.next_i == 1);
    CHECK(first.next_j == 1);
    const auto second = p.select(0.3, 0, 1);
    CHECK(second.next_i == 0);
    CHECK(second.next_j == 2);
    const auto none = p.select(0.9, 0, 1);
    CHECK(none.next_i == 0);
    CHECK(none.next_j == 1);
  }
  CHECK_THROWS_AS(jump_partition(s, vec({1}), 0, vec({1}), 1, 1.0), std::invalid_argument);
}

TEST_CASE("each copy has the law of the switched process") {
  // Feynman-Kac oracle for E|X_t| under x' = lambda_I x.
  const SwitchingSpec s = elementary(2.0, 1.0);
  const Matrix B = mat(2, 2, {-2, 1, 2, -1});
  const Vector oracle = exp_times_ones(B, 1.0);
  for (int mode = 0; mode < 2; ++mode) {
    RunningMoments mx, my;
    for (std::uint64_t k = 0; k < 20000; ++k) {
      const CoupledRun r = mode == 0
                               ? couple_constant(s, vec({1.5}), vec({0.5}), RegimeId(0), RegimeId(1), 1.0, {2, k})
                               : couple_uniformized(s, vec({1.5}), vec({0.5}), RegimeId(0), RegimeId(1), 1.0, {2, k});
      mx.add(std::abs(r.grid.back().x(0)));
      my.add(std::abs(r.grid.back().y(0)));
    }
    CHECK(std::abs(mx.mean() - 1.5 * oracle(0)) < 4 * mx.stderr_of_mean());
    CHECK(std::abs(my.mean() - 0.5 * oracle(1)) < 4 * my.stderr_of_mean());
  }
}

TEST_CASE("partitions and dominating rates") {
  CHECK_THROWS_AS(check_partition_locality(three_cycle(), {{0}, {1}, {2}}), SpecError);
  CHECK_NOTHROW(check_partition_locality(three_cycle(), {{0, 1, 2}}));
  CHECK_THROWS_AS(check_partition_locality(three_cycle(), {{0}, {1}}), SpecError);
  CHECK_THROWS_AS(check_partition_locality(three_cycle(), {{0, 1}, {1, 2}}), SpecError);
  CHECK(block_of({{2}, {0, 1}}, 3) == std::vector<int>{1, 1, 0});

  const BirthDeathRates bd = dominating_rates(elementary(2.0, 1.0), {{1}, {0}});
  CHECK(bd.birth == std::vector<double>{2.0});
  CHECK(bd.death == std::vector<double>{0.0, 1.0});
}

TEST_CASE("dominating coupling") {
  const SwitchingSpec s = elementary(2.0, 1.0);
  SECTION("single block keeps L at zero") {
    CouplingOptions o;
    o.grid = {0, 1, 2, 3};
    const CoupledRun r = couple_with_dominating(s, {{0, 1}}, vec({1}), RegimeId(0), 3.0, {3, 0}, o);
    for (const auto& g : r.grid) CHECK(g.l == 0);
  }
  SECTION("L stays below the block of I and has the birth-death law") {
    CouplingOptions o;
    o.grid = {0, 10};
    const std::vector<std::vector<int>> part{{1}, {0}};
    RunningMoments top;
    for (std::uint64_t k = 0; k < 4000; ++k) {
      const CoupledRun r = couple_with_dominating(s, part, vec({1}), RegimeId(1), 10.0, {4, k}, o);
      REQUIRE(r.t_meet);
      CHECK(r.min_block_gap >= 0);
      top.add(r.grid.back().l == 1 ? 1.0 : 0.0);
    }
    CHECK(std::abs(top.mean() - 2.0 / 3.0) < 4 * top.stderr_of_mean());
  }
}

TEST_CASE("distances") {
  const SwitchingSpec s = elementary(2.0, 1.0);
  CHECK(pair_distance(s, vec({0}), 0, vec({0.25}), 1, 0.5) == 1.0);
  CHECK(pair_distance(s, vec({0}), 0, vec({0.25}), 0, 0.5) == Approx(0.5));
  CHECK(pair_distance(s, vec({0}), 0, vec({9}), 0, 0.5) == 1.0);
  CHECK(contracting_distance(s, vec({0}), 0, vec({0.25}), 0, 0.5, 0.5) == Approx(1.0));
  CHECK(contracting_distance(s, vec({0}), 0, vec({0.01}), 0, 0.5, 0.5) == Approx(0.2));
  CHECK(worst_case_expansion(vec({1, -1}), 0.5) == Approx(0.5));
  CHECK(worst_case_expansion(vec({1, 2}), 0.5) == Approx(-0.5));
  CHECK(parse_coupling_mode("constant") == CouplingMode::Constant);
  CHECK(parse_coupling_mode("uniformized") == CouplingMode::Uniformized);
  CHECK_THROWS_AS(parse_coupling_mode("bogus"), std::invalid_argument);
}

TEST_CASE("decay rate fit") {
  std::vector<double> t, m, se;
  for (int k = 0; k <= 10; ++k) {
    t.push_back(k);
    m.push_back(3.0 * std::exp(-0.4 * k));
    se.push_back(0.0);
  }
  CHECK(-fit_decay_rate(t, m, se, 5).slope == Approx(0.4).epsilon(1e-10));
}

TEST_CASE("decay curves") {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(k);
  SECTION("coupled from the same point") {
    const DecayCurve c = wasserstein_decay_curve(elementary(2.0, 1.0), vec({1}), vec({1}), RegimeId(0),
                                                 RegimeId(0), grid, 100, 0.5, 5);
    CHECK(c.degenerate);
    for (double v : c.mean_d) CHECK(v == 0.0);
  }
  SECTION("positive average curvature contracts") {
    const DecayCurve c = wasserstein_decay_curve(elementary(2.0, 1.0), vec({1}), vec({2}), RegimeId(0),
                                                 RegimeId(1), grid, 2000, 0.5, 6, {}, 4);
    CHECK_FALSE(c.degenerate);
    CHECK(c.rate - 1.96 * c.rate_stderr > 0.0);
    CHECK(c.met_fraction > 0.99);
  }
  SECTION("negative average curvature does not") {
    const DecayCurve c = wasserstein_decay_curve(elementary(1.0, 2.0), vec({1}), vec({2}), RegimeId(0),
                                                 RegimeId(0), grid, 1000, 0.5, 7, {}, 4);
    CHECK(c.mean_d.back() > 0.5);
  }
}
