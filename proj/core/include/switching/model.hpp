#ifndef SWITCHING_MODEL_HPP_
#define SWITCHING_MODEL_HPP_

#include "switching/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace switching {

// x' = A x + c.
struct AffineFlow {
  Matrix A;
  Vector c;
};

// dX = (A X + c) dt + sigma dW, W an m-dimensional Brownian motion.
struct OrnsteinUhlenbeck {
  Matrix A;
  Vector c;
  Matrix sigma;
};

using RegimeDynamics = std::variant<AffineFlow, OrnsteinUhlenbeck>;

const Matrix& drift_matrix(const RegimeDynamics& dyn);
const Vector& drift_offset(const RegimeDynamics& dyn);
bool is_deterministic(const RegimeDynamics& dyn);

// a(x,i,j) = c_ij.
struct ConstantRates {
  Matrix c;
};

// a(x,i,j) = c_ij + m_ij * s(<w,x> + b) with s the standard logistic.
struct SigmoidRates {
  Matrix base;
  Matrix amplitude;
  Vector w;
  double b = 0.0;
};

using RateModel = std::variant<ConstantRates, SigmoidRates>;

struct MetricSpec {
  Matrix M;
  double q = 1.0;
  Vector x0;
  bool trunc = true;
};

// d(x,y) = sqrt((x-y)^T M (x-y)) for a fixed SPD matrix M.
class QuadraticMetric {
 public:
  QuadraticMetric() = default;
  explicit QuadraticMetric(const Matrix& M);

  double distance(const Vector& x, const Vector& y) const;
  double norm(const Vector& u) const;
  // sqrt(w^T M^{-1} w): the Lipschitz constant of x -> <w,x> under d.
  double dual_norm(const Vector& w) const;
  const Matrix& matrix() const { return M_; }
  int dim() const { return static_cast<int>(M_.rows()); }

 private:
  Matrix M_;
  Matrix chol_upper_;  // R with M = R^T R
};

struct SwitchingSpec {
  std::string name;
  int dim = 0;
  std::vector<std::string> labels;
  std::vector<RegimeDynamics> regimes;
  RateModel rates;
  MetricSpec metric;
  std::optional<Vector> rho;
  std::optional<std::vector<std::vector<int>>> partition;
  // Optional per-regime quadratic forms, used only for curvature diagnostics.
  std::vector<Matrix> regime_metrics;

  int num_regimes() const { return static_cast<int>(regimes.size()); }
  QuadraticMetric metric_object() const { return QuadraticMetric(metric.M); }
};

struct ValidationReport {
  double a_bar = 0.0;
  double kappa = 0.0;
  Matrix a_lower;
  bool irreducible = false;
  std::vector<std::vector<int>> components;
  bool constant_rates = false;
};

// Throws SpecError on dimension mismatch, non-finite or negative entries,
// non-PD metric or q outside (0,1].
void check_spec(const SwitchingSpec& spec);

ValidationReport validate_spec(const SwitchingSpec& spec);

double logistic(double u);

// a(x,i,j); throws std::invalid_argument when i == j.
double eval_rate(const SwitchingSpec& spec, const Vector& x, RegimeId i, RegimeId j);

// Writes a(x,i,.) into out (out[i] = 0) and returns the row sum.
double rate_row(const SwitchingSpec& spec, const Vector& x, int i, std::span<double> out);

bool has_constant_rates(const SwitchingSpec& spec);

// Rate matrix of a spec whose rates do not depend on x; throws NotApplicable
// otherwise.
Matrix constant_rate_matrix(const SwitchingSpec& spec);

// sup_x sup_i sum_j a(x,i,j).
double rate_bound(const SwitchingSpec& spec);
// Lipschitz constant of x -> sum_j |a(x,i,j) - a(y,i,j)|.
double rate_lipschitz(const SwitchingSpec& spec);
// inf_x a(x,i,j) entrywise, zero diagonal.
Matrix rate_lower(const SwitchingSpec& spec);
// sup_x a(x,i,j) entrywise, zero diagonal.
Matrix rate_upper(const SwitchingSpec& spec);

// inf_x / sup_x of sum_{j in targets} a(x,i,j), closed form.
double rate_sum_inf(const SwitchingSpec& spec, int i, std::span<const int> targets);
double rate_sum_sup(const SwitchingSpec& spec, int i, std::span<const int> targets);

// True when a(x,i,j) == 0 for every x.
bool rate_identically_zero(const SwitchingSpec& spec, int i, int j);

}  // namespace switching

#endif  // SWITCHING_MODEL_HPP_
