#ifndef SWITCHING_STATS_HPP_
#define SWITCHING_STATS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace switching {

// Welford running mean / variance.
class RunningMoments {
 public:
  void add(double x);
  void merge(const RunningMoments& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double stderr_of_mean() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double stderr = 0.0;
};

MeanEstimate mean_and_stderr(std::span<const double> xs);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
};

// Weighted least squares y ~ intercept + slope * x. Empty weights means
// ordinary least squares.
LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                   std::span<const double> weights = {});

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

}  // namespace switching

#endif  // SWITCHING_STATS_HPP_
