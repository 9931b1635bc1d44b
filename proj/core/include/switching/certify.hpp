#ifndef SWITCHING_CERTIFY_HPP_
#define SWITCHING_CERTIFY_HPP_

#include "switching/chain.hpp"
#include "switching/model.hpp"
#include "switching/sim.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace switching {

struct LogNormResult {
  double mu = 0.0;  // max_u <A u, u>_M / |u|_M^2
  Vector extremal;  // unit in the M-norm, attains mu
};

// Largest generalised eigenvalue of (M A + A^T M) / 2 against M.
LogNormResult log_norm(const Matrix& A, const Matrix& M);

// sup over t in [0, t_max] of exp(shift * t) * |exp(A t)|_{M -> M}, sampled
// on `steps` equal intervals and refined around the best sample.
struct GrowthResult {
  double value = 0.0;
  double argmax = 0.0;
};
GrowthResult norm_growth(const Matrix& A, const Matrix& M, double shift, double t_max = 10.0,
                         int steps = 2000);

struct CurvatureReport {
  Vector rho;                      // per regime
  Matrix metric;                   // the shared M
  std::vector<Vector> extremal;    // empty vector where rho was user-supplied
  std::vector<std::string> source; // "log-norm" or "supplied"
};

// rho(i) = -log_norm(A_i, M) unless the model supplies rho. OU regimes use the
// same value (shared noise cancels in the difference).
CurvatureReport curvature_report(const SwitchingSpec& spec);

enum class Verdict { Pass, Fail, NotApplicable };
const char* verdict_name(Verdict v);

struct AssumptionCheck {
  std::string id;
  std::string name;
  bool pass = false;
  std::string witness;
};

struct Certificate {
  std::string tag;  // W-constant | W-onoff | W-birthdeath | TV-constant | TV-onoff | TV-birthdeath
  Verdict verdict = Verdict::NotApplicable;
  double value = 0.0;  // criterion value (1/time)
  std::string note;

  Vector nu;
  Vector curvature;  // rho (W) or lambda (TV), per regime
  std::optional<double> rho0, rho1, a0, a1;
  std::vector<double> birth, death;
  Vector alpha;
  std::optional<double> q_star, eta_star;
  std::optional<double> upper_constant, lower_constant;  // max psi / min psi and reciprocal
  std::optional<double> expansion;                        // -min q* alpha
  std::vector<AssumptionCheck> assumptions;
};

// Sum nu(i) rho(i) for state-independent rates. Throws NotApplicable when the
// rates depend on x.
Certificate check_average_criterion(const SwitchingSpec& spec, const CurvatureReport& curvature,
                                    bool total_variation = false);

// rho0 a1 + rho1 a0 with F0 = {rho > 0}, F1 = its complement. Throws
// NotApplicable when F0 is empty.
Certificate check_onoff(const SwitchingSpec& spec, const CurvatureReport& curvature,
                        bool total_variation = false);

// Sum nu(n) alpha(n) for the dominating birth-death chain of the partition.
// Throws SpecError when the partition is not local and NotApplicable when
// some b(n) or d(n) vanishes.
Certificate check_birth_death(const SwitchingSpec& spec, const CurvatureReport& curvature,
                              const std::vector<std::vector<int>>& partition,
                              bool total_variation = false);

// Exact sign of sum_k a_k * b_k (error-free products and sums).
int exact_dot_sign(std::span<const double> a, std::span<const double> b);

struct HormanderResult {
  int rank = 0;
  Matrix basis;         // orthonormal columns spanning the evaluated fields
  int fields = 0;       // affine fields kept after pruning
  int generations = 0;  // bracket generations evaluated
};

// Rank at x of the fields G_i - G_j and their iterated brackets with the G_i,
// up to `depth` generations. All regimes must be affine.
HormanderResult hormander_rank(const SwitchingSpec& spec, const Vector& x, int depth = 4);

struct LyapunovFit {
  double C = 0.0;
  double lambda = 0.0;
  double K = 0.0;
  double q = 1.0;
  bool holds = false;
  // max over points of (y - f) / (3 se + 5% of |y|) for the least-squares f,
  // before C and K are raised to an envelope of the estimates.
  double worst_excess = 0.0;
  std::vector<double> times;
  // One row per start: estimates, stderrs, fitted values.
  std::vector<std::vector<double>> means, stderrs, fitted;
  std::vector<double> v_start;  // V^q at each start
  std::size_t blowups = 0;
};

// Fits P_t V^q(x, i) <= C e^{-lambda t} V^q(x) + K with V = d(., x0) from
// Monte Carlo estimates over several starts: lambda by weighted least
// squares, then the smallest K and C that dominate every estimate.
LyapunovFit lyapunov_fit(const SwitchingSpec& spec,
                         const std::vector<std::pair<Vector, RegimeId>>& starts,
                         const std::vector<double>& grid, std::size_t n_paths, double q,
                         std::uint64_t master_seed, const SimOptions& opts = {}, int jobs = 1);

struct RegimeMetricDiagnostics {
  // curvature(i, j) = -log_norm(A_i, M_j) with the per-regime forms.
  Matrix curvature;
  // growth(i, j) = sup_t e^{rho_ii t} |e^{A_i t}|_{M_j}.
  Matrix growth;
};

struct CertificateReport {
  std::string name;
  ValidationReport validation;
  CurvatureReport curvature;
  std::vector<Certificate> certificates;
  std::optional<HormanderResult> hormander;
  bool elliptic = false;  // some OU regime has full-rank sigma sigma^T
  std::optional<RegimeMetricDiagnostics> regime_metrics;
  std::vector<std::string> diagnostics;

  bool any_pass() const;
};

// Validation plus every applicable criterion.
CertificateReport certify_all(const SwitchingSpec& spec);

std::string certificates_to_json(const CertificateReport& report, int indent = 2);
std::string certificates_to_text(const CertificateReport& report);

}  // namespace switching

#endif  // SWITCHING_CERTIFY_HPP_
