#include "switching/stats.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace switching;
using Catch::Approx;

TEST_CASE("running moments match two-pass formulas and merge") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(3.0, 2.0);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = n(gen);
  RunningMoments a, b, all;
  for (std::size_t k = 0; k < xs.size(); ++k) (k < 400 ? a : b).add(xs[k]), all.add(xs[k]);
  a.merge(b);
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size() - 1;
  CHECK(all.mean() == Approx(mean));
  CHECK(all.variance() == Approx(var));
  CHECK(a.mean() == Approx(mean));
  CHECK(a.variance() == Approx(var));
  const MeanEstimate e = mean_and_stderr(xs);
  CHECK(e.stderr == Approx(std::sqrt(var / xs.size())));
}

TEST_CASE("line fits") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  const std::vector<double> y{1, 3, 5, 7, 9};
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == Approx(2.0));
  CHECK(f.intercept == Approx(1.0));
  CHECK(f.slope_stderr == Approx(0.0).margin(1e-12));
  const std::vector<double> y2{1, 3, 5, 7, 100};
  const std::vector<double> w{1, 1, 1, 1, 0};
  CHECK(fit_line(x, y2, w).slope == Approx(2.0));
}

TEST_CASE("KS test") {
  std::mt19937_64 gen(2);
  std::exponential_distribution<double> e(3.0);
  std::vector<double> xs(3000);
  for (auto& x : xs) x = e(gen);
  const auto cdf3 = [](double t) { return t <= 0 ? 0.0 : 1.0 - std::exp(-3.0 * t); };
  const auto cdf1 = [](double t) { return t <= 0 ? 0.0 : 1.0 - std::exp(-1.0 * t); };
  CHECK(ks_test(xs, cdf3).p_value > 1e-3);
  CHECK(ks_test(xs, cdf1).p_value < 1e-6);
  CHECK(kolmogorov_survival(0.0) == Approx(1.0));
  CHECK(kolmogorov_survival(1.36) == Approx(0.05).margin(2e-3));
}
