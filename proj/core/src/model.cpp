#include "switching/model.hpp"

#include "switching/chain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace switching {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void require(bool ok, const std::string& what) {
  if (!ok) throw SpecError(what);
}

void check_rate_matrix(const Matrix& m, int n, const std::string& field) {
  require(m.rows() == n && m.cols() == n,
          field + ": expected " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  require(all_finite(m), field + ": non-finite entry");
  require((m.array() >= 0.0).all(), field + ": negative entry");
  for (int i = 0; i < n; ++i) {
    require(m(i, i) == 0.0, field + ": self-jump rate on the diagonal must be zero");
  }
}

void check_spd(const Matrix& M, int dim, const std::string& field) {
  require(M.rows() == dim && M.cols() == dim,
          field + ": expected " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  require(all_finite(M), field + ": non-finite entry");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  require((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, field + ": not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() > 1e-12 * scale, field + ": not positive definite");
}

// Value of the shared logistic factor when it is constant in x.
double frozen_logistic(const SigmoidRates& s) { return logistic(s.b); }

bool sigmoid_is_constant(const SigmoidRates& s) {
  return s.w.isZero(0.0) || s.amplitude.isZero(0.0);
}

}  // namespace

const Matrix& drift_matrix(const RegimeDynamics& dyn) {
  return std::visit([](const auto& d) -> const Matrix& { return d.A; }, dyn);
}

const Vector& drift_offset(const RegimeDynamics& dyn) {
  return std::visit([](const auto& d) -> const Vector& { return d.c; }, dyn);
}

bool is_deterministic(const RegimeDynamics& dyn) {
  return std::holds_alternative<AffineFlow>(dyn);
}

QuadraticMetric::QuadraticMetric(const Matrix& M) : M_(M) {
  Eigen::LLT<Matrix> llt(M_);
  if (llt.info() != Eigen::Success) throw SpecError("metric: not positive definite");
  chol_upper_ = llt.matrixU();
}

double QuadraticMetric::distance(const Vector& x, const Vector& y) const {
  return norm(x - y);
}

double QuadraticMetric::norm(const Vector& u) const {
  return (chol_upper_.triangularView<Eigen::Upper>() * u).norm();
}

double QuadraticMetric::dual_norm(const Vector& w) const {
  Vector z = chol_upper_.transpose().triangularView<Eigen::Lower>().solve(w);
  return z.norm();
}

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

void check_spec(const SwitchingSpec& spec) {
  require(spec.dim >= 1, "dim must be >= 1");
  const int n = spec.num_regimes();
  require(n >= 1, "at least one regime is required");
  require(spec.labels.empty() || static_cast<int>(spec.labels.size()) == n,
          "labels: expected one label per regime");

  for (int i = 0; i < n; ++i) {
    const std::string where = "regimes[" + std::to_string(i) + "]";
    const Matrix& A = drift_matrix(spec.regimes[i]);
    const Vector& c = drift_offset(spec.regimes[i]);
    require(A.rows() == spec.dim && A.cols() == spec.dim, where + ".A: dimension mismatch");
    require(c.size() == spec.dim, where + ".c: dimension mismatch");
    require(all_finite(A) && c.allFinite(), where + ": non-finite entry");
    if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec.regimes[i])) {
      require(ou->sigma.rows() == spec.dim && ou->sigma.cols() >= 1,
              where + ".sigma: dimension mismatch");
      require(all_finite(ou->sigma), where + ".sigma: non-finite entry");
    }
  }

  if (const auto* cr = std::get_if<ConstantRates>(&spec.rates)) {
    check_rate_matrix(cr->c, n, "rates.c");
  } else {
    const auto& s = std::get<SigmoidRates>(spec.rates);
    check_rate_matrix(s.base, n, "rates.base");
    check_rate_matrix(s.amplitude, n, "rates.amplitude");
    require(s.w.size() == spec.dim, "rates.w: dimension mismatch");
    require(s.w.allFinite() && std::isfinite(s.b), "rates: non-finite modulation");
  }

  check_spd(spec.metric.M, spec.dim, "metric.M");
  require(spec.metric.q > 0.0 && spec.metric.q <= 1.0, "metric.q must lie in (0,1]");
  require(spec.metric.x0.size() == spec.dim, "metric.x0: dimension mismatch");
  require(spec.metric.x0.allFinite(), "metric.x0: non-finite entry");

  if (spec.rho) {
    require(spec.rho->size() == n, "rho: expected one value per regime");
    require(spec.rho->allFinite(), "rho: non-finite entry");
  }

  if (spec.partition) {
    std::set<int> seen;
    for (const auto& block : *spec.partition) {
      require(!block.empty(), "partition: empty block");
      for (int i : block) {
        require(i >= 0 && i < n, "partition: regime index out of range");
        require(seen.insert(i).second, "partition: blocks are not disjoint");
      }
    }
    require(static_cast<int>(seen.size()) == n, "partition: blocks do not cover all regimes");
  }

  require(spec.regime_metrics.empty() || static_cast<int>(spec.regime_metrics.size()) == n,
          "regime_metrics: expected one matrix per regime");
  for (std::size_t k = 0; k < spec.regime_metrics.size(); ++k) {
    check_spd(spec.regime_metrics[k], spec.dim, "regime_metrics[" + std::to_string(k) + "]");
  }
}

ValidationReport validate_spec(const SwitchingSpec& spec) {
  check_spec(spec);
  ValidationReport report;
  report.a_bar = rate_bound(spec);
  report.kappa = rate_lipschitz(spec);
  report.a_lower = rate_lower(spec);
  auto irr = irreducibility(report.a_lower);
  report.irreducible = irr.irreducible;
  report.components = std::move(irr.components);
  report.constant_rates = has_constant_rates(spec);
  return report;
}

double eval_rate(const SwitchingSpec& spec, const Vector& x, RegimeId i, RegimeId j) {
  const int n = spec.num_regimes();
  if (i.index < 0 || i.index >= n || j.index < 0 || j.index >= n) {
    throw std::out_of_range("eval_rate: regime index out of range");
  }
  if (i == j) throw std::invalid_argument("eval_rate: self-jumps are not defined (i == j)");
  if (const auto* cr = std::get_if<ConstantRates>(&spec.rates)) return cr->c(i.index, j.index);
  const auto& s = std::get<SigmoidRates>(spec.rates);
  return s.base(i.index, j.index) + s.amplitude(i.index, j.index) * logistic(s.w.dot(x) + s.b);
}

double rate_row(const SwitchingSpec& spec, const Vector& x, int i, std::span<double> out) {
  const int n = spec.num_regimes();
  double total = 0.0;
  if (const auto* cr = std::get_if<ConstantRates>(&spec.rates)) {
    for (int j = 0; j < n; ++j) {
      out[j] = (j == i) ? 0.0 : cr->c(i, j);
      total += out[j];
    }
    return total;
  }
  const auto& s = std::get<SigmoidRates>(spec.rates);
  const double level = logistic(s.w.dot(x) + s.b);
  for (int j = 0; j < n; ++j) {
    out[j] = (j == i) ? 0.0 : s.base(i, j) + s.amplitude(i, j) * level;
    total += out[j];
  }
  return total;
}

bool has_constant_rates(const SwitchingSpec& spec) {
  if (std::holds_alternative<ConstantRates>(spec.rates)) return true;
  return sigmoid_is_constant(std::get<SigmoidRates>(spec.rates));
}

Matrix constant_rate_matrix(const SwitchingSpec& spec) {
  if (const auto* cr = std::get_if<ConstantRates>(&spec.rates)) return cr->c;
  const auto& s = std::get<SigmoidRates>(spec.rates);
  if (!sigmoid_is_constant(s)) {
    throw NotApplicable("jump rates depend on the continuous state");
  }
  return s.base + s.amplitude * frozen_logistic(s);
}

Matrix rate_lower(const SwitchingSpec& spec) {
  if (has_constant_rates(spec)) return constant_rate_matrix(spec);
  return std::get<SigmoidRates>(spec.rates).base;
}

Matrix rate_upper(const SwitchingSpec& spec) {
  if (has_constant_rates(spec)) return constant_rate_matrix(spec);
  const auto& s = std::get<SigmoidRates>(spec.rates);
  return s.base + s.amplitude;
}

double rate_bound(const SwitchingSpec& spec) {
  // Every entry shares the same logistic factor, so the row sums attain
  // their supremum together.
  return rate_upper(spec).rowwise().sum().maxCoeff();
}

double rate_lipschitz(const SwitchingSpec& spec) {
  if (has_constant_rates(spec)) return 0.0;
  const auto& s = std::get<SigmoidRates>(spec.rates);
  // |s(u) - s(v)| <= |u - v| / 4 and |<w, x - y>| <= |w|_* d(x, y).
  const double lip_arg = spec.metric_object().dual_norm(s.w);
  return 0.25 * lip_arg * s.amplitude.rowwise().sum().maxCoeff();
}

double rate_sum_inf(const SwitchingSpec& spec, int i, std::span<const int> targets) {
  const Matrix lo = rate_lower(spec);
  double total = 0.0;
  for (int j : targets) {
    if (j != i) total += lo(i, j);
  }
  return total;
}

double rate_sum_sup(const SwitchingSpec& spec, int i, std::span<const int> targets) {
  const Matrix hi = rate_upper(spec);
  double total = 0.0;
  for (int j : targets) {
    if (j != i) total += hi(i, j);
  }
  return total;
}

bool rate_identically_zero(const SwitchingSpec& spec, int i, int j) {
  if (i == j) return true;
  return rate_upper(spec)(i, j) == 0.0;
}

}  // namespace switching
