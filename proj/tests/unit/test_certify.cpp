#include "helpers.hpp"

#include "switching/certify.hpp"
#include "switching/sim.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace switching;
using namespace testing_util;
using Catch::Approx;

namespace {

Certificate average(const SwitchingSpec& s) { return check_average_criterion(s, curvature_report(s)); }

SwitchingSpec ladder() {
  SwitchingSpec s = scalar_dilations({-1.5, -0.5, 1.0}, mat(3, 3, {0, 1, 0, 1, 0, 1, 0, 1, 0}));
  s.partition = std::vector<std::vector<int>>{{2}, {1}, {0}};
  return s;
}

}  // namespace

TEST_CASE("log norm") {
  std::mt19937_64 gen(31);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 10; ++rep) {
    Matrix A(3, 3), R(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = n(gen), R(i, j) = n(gen);
    const Matrix M = R.transpose() * R + 0.1 * Matrix::Identity(3, 3);
    const LogNormResult r = log_norm(A, M);
    const Vector& e = r.extremal;
    CHECK(e.dot(M * e) == Approx(1.0).epsilon(1e-9));
    CHECK((A * e).dot(M * e) == Approx(r.mu).epsilon(1e-9));
    for (int k = 0; k < 100; ++k) {
      const Vector u = Vector::NullaryExpr(3, [&] { return n(gen); });
      CHECK((A * u).dot(M * u) <= r.mu * u.dot(M * u) + 1e-9 * u.dot(M * u));
    }
    const QuadraticMetric metric(M);
    for (double t : {0.1, 0.5, 2.0}) {
      const Vector u = Vector::NullaryExpr(3, [&] { return n(gen); });
      const Vector v = flow_step(AffineFlow{A, Vector::Zero(3)}, u, t);
      CHECK(metric.norm(v) <= std::exp(r.mu * t) * metric.norm(u) * (1 + 1e-9));
    }
  }
  CHECK(log_norm(mat(2, 2, {-1, 3, -1.0 / 3.0, -1}), mat(2, 2, {1.0 / 9.0, 0, 0, 1})).mu ==
        Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("norm growth") {
  CHECK(norm_growth(-Matrix::Identity(2, 2), Matrix::Identity(2, 2), 1.0).value == Approx(1.0));
  // |[[1, t], [0, 1]]| = (t + sqrt(t^2 + 4)) / 2 against e^{-t / 5}.
  const GrowthResult g = norm_growth(mat(2, 2, {0, 1, 0, 0}), Matrix::Identity(2, 2), -0.2);
  const double t = g.argmax;
  CHECK(g.value == Approx(std::exp(-0.2 * t) * (t + std::sqrt(t * t + 4)) / 2).epsilon(1e-12));
  CHECK(norm_growth(mat(2, 2, {0, 1, 0, 0}), Matrix::Identity(2, 2), -1.0).value == Approx(1.0));
  CHECK(g.value > 1.0);
  CHECK(g.argmax > 0.0);
}

TEST_CASE("average criterion") {
  // rho = (1, -1) with nu = (2/3, 1/3).
  const Certificate pass = average(elementary(2.0, 1.0));
  CHECK(pass.verdict == Verdict::Pass);
  CHECK(pass.value == Approx(1.0 / 3.0));
  REQUIRE(pass.q_star);
  CHECK(*pass.q_star == Approx(0.5).margin(1e-5));
  CHECK(*pass.eta_star == Approx((3 - 2 * std::sqrt(2.0)) / 2).epsilon(1e-8));

  const Certificate fail = average(elementary(1.0, 2.0));
  CHECK(fail.verdict == Verdict::Fail);
  CHECK(fail.value == Approx(-1.0 / 3.0));

  const Certificate flat = average(scalar_dilations({-0.7, -0.7}, mat(2, 2, {0, 3, 5, 0})));
  CHECK(flat.value == Approx(0.7));
  CHECK(flat.verdict == Verdict::Pass);

  const Certificate reducible = average(elementary(0.0, 1.0));
  CHECK(reducible.verdict == Verdict::Fail);
  CHECK(std::isnan(reducible.value));
}

TEST_CASE("on-off criterion") {
  const Certificate c = check_onoff(elementary(2.0, 1.0), curvature_report(elementary(2.0, 1.0)));
  CHECK(c.verdict == Verdict::Pass);
  CHECK(c.value == Approx(1.0));
  CHECK(*c.a0 == 1.0);
  CHECK(*c.a1 == 2.0);

  const SwitchingSpec all = scalar_dilations({-1, -2}, mat(2, 2, {0, 1, 1, 0}));
  CHECK(check_onoff(all, curvature_report(all)).verdict == Verdict::Pass);

  const SwitchingSpec tie = elementary(1.0, 1.0);
  const Certificate t = check_onoff(tie, curvature_report(tie));
  CHECK(t.value == 0.0);
  CHECK(t.verdict == Verdict::Fail);

  const SwitchingSpec none = scalar_dilations({1, 2}, mat(2, 2, {0, 1, 1, 0}));
  CHECK_THROWS_AS(check_onoff(none, curvature_report(none)), NotApplicable);
}

TEST_CASE("average and on-off agree on two regimes") {
  std::mt19937_64 gen(32);
  std::uniform_int_distribution<int> r(1, 4), c(1, 6);
  for (int rep = 0; rep < 300; ++rep) {
    SwitchingSpec s = elementary(r(gen), r(gen));
    s.rho = vec({static_cast<double>(c(gen)), -static_cast<double>(c(gen))});
    const CurvatureReport cr = curvature_report(s);
    CHECK(check_average_criterion(s, cr).verdict == check_onoff(s, cr).verdict);
  }
}

TEST_CASE("birth-death criterion") {
  const SwitchingSpec s = ladder();
  const CurvatureReport cr = curvature_report(s);
  const Certificate c = check_birth_death(s, cr, *s.partition);
  CHECK(c.nu.isApprox(Vector::Constant(3, 1.0 / 3.0)));
  CHECK(c.alpha == vec({-1.0, 0.5, 1.5}));
  CHECK(c.value == Approx(1.0 / 3.0));
  CHECK(c.verdict == Verdict::Pass);

  const Certificate single = check_birth_death(s, cr, {{0, 1, 2}});
  CHECK(single.value == Approx(-1.0));
  CHECK(single.verdict == Verdict::Fail);

  CHECK_THROWS_AS(check_birth_death(s, cr, {{0}, {2}, {1}}), SpecError);
  const SwitchingSpec one_way = scalar_dilations({-1, 1}, mat(2, 2, {0, 1, 0, 0}));
  CHECK_THROWS_AS(check_birth_death(one_way, curvature_report(one_way), {{1}, {0}}), NotApplicable);
}

TEST_CASE("exact dot sign") {
  const double a[] = {1e16, 1.0, -1e16};
  const double b[] = {1.0, 1.0, 1.0};
  CHECK(exact_dot_sign(a, b) == 1);
  const double eps = std::ldexp(1.0, -52);
  const double c[] = {1 + eps, -1.0};
  const double d[] = {1 - eps, 1.0};
  CHECK(exact_dot_sign(c, d) == -1);
  const double e[] = {0.1, -0.1};
  const double f[] = {3.0, 3.0};
  CHECK(exact_dot_sign(e, f) == 0);
}

TEST_CASE("bracket rank") {
  SwitchingSpec plane;
  plane.dim = 2;
  plane.regimes.emplace_back(AffineFlow{-Matrix::Identity(2, 2), vec({-1, 0})});
  plane.regimes.emplace_back(AffineFlow{-Matrix::Identity(2, 2), vec({1, 0})});
  plane.rates = ConstantRates{mat(2, 2, {0, 1, 1, 0})};
  identity_metric(plane);
  CHECK(hormander_rank(plane, Vector::Zero(2)).rank == 1);

  SwitchingSpec spiral = plane;
  spiral.regimes.clear();
  spiral.regimes.emplace_back(AffineFlow{mat(2, 2, {-1, 3, -1.0 / 3.0, -1}), Vector::Zero(2)});
  spiral.regimes.emplace_back(AffineFlow{mat(2, 2, {-1, -1.0 / 3.0, 3, -1}), Vector::Zero(2)});
  CHECK(hormander_rank(spiral, vec({1, 0})).rank == 2);

  CHECK(hormander_rank(elementary(1, 1), Vector::Zero(1)).rank == 0);
  CHECK(hormander_rank(elementary(1, 1), vec({1})).rank == 1);
}

TEST_CASE("Lyapunov fit") {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(0.25 * k);
  SECTION("deterministic decay") {
    const LyapunovFit f = lyapunov_fit(elementary(0.0, 0.0), {{vec({1}), RegimeId(0)}, {vec({2}), RegimeId(0)}},
                                       grid, 10, 1.0, 1);
    CHECK(f.holds);
    CHECK(f.lambda == Approx(1.0).epsilon(0.02));
    CHECK(f.K == Approx(0.0).margin(1e-3));
  }
  SECTION("ergodic and transient switching") {
    const std::vector<std::pair<Vector, RegimeId>> starts{{vec({1}), RegimeId(0)}, {vec({4}), RegimeId(1)}};
    const LyapunovFit f = lyapunov_fit(elementary(2.0, 1.0), starts, grid, 4000, 0.5, 2, {}, 4);
    CHECK(f.holds);
    CHECK(f.lambda == Approx((3 - 2 * std::sqrt(2.0)) / 2).epsilon(0.3));
    for (std::size_t s = 0; s < starts.size(); ++s) {
      for (std::size_t g = 0; g < grid.size(); ++g) CHECK(f.fitted[s][g] >= f.means[s][g] * (1 - 1e-12));
    }
    CHECK_FALSE(lyapunov_fit(elementary(1.0, 2.0), starts, grid, 4000, 0.5, 3, {}, 4).holds);
  }
}

TEST_CASE("certify_all") {
  const SwitchingSpec s = ladder();
  const CertificateReport r = certify_all(s);
  CHECK(r.any_pass());
  bool saw_bd = false;
  for (const auto& c : r.certificates) saw_bd |= c.tag == "W-birthdeath" && c.verdict == Verdict::Pass;
  CHECK(saw_bd);
  CHECK(certificates_to_json(r) == certificates_to_json(certify_all(s)));
  CHECK(certificates_to_text(r).ends_with("PASS\n"));
  CHECK_FALSE(certify_all(elementary(1.0, 2.0)).any_pass());
}
