#ifndef SWITCHING_SIM_HPP_
#define SWITCHING_SIM_HPP_

#include "switching/chain.hpp"
#include "switching/model.hpp"
#include "switching/stats.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace switching {

using Rng = std::mt19937_64;

// Engine for (seed.master, seed.stream, substream); substreams let one path
// own several independent sources (e.g. the two halves of a coupling).
Rng make_rng(SeedSpec seed, std::uint64_t substream = 0);
double uniform01(Rng& rng);
double exponential(Rng& rng, double rate);

// x(dt) = Phi x + offset for the affine flow x' = A x + c.
struct AffinePropagator {
  Matrix Phi;
  Vector offset;

  Vector apply(const Vector& x) const { return Phi * x + offset; }
};

// exp of the augmented matrix [[A, c], [0, 0]] * dt (scaling and squaring).
AffinePropagator affine_propagator(const Matrix& A, const Vector& c, double dt);

// Advances one regime by dt >= 0. Affine flows are solved exactly; OU
// regimes use Euler-Maruyama substeps of size dt / ceil(dt / ou_step) with
// noise drawn from rng (required for OU).
Vector flow_step(const RegimeDynamics& dyn, const Vector& x, double dt, Rng* rng = nullptr,
                 double ou_step = 0.01);

// Synchronous coupling of two copies of the same regime: identical flow, and
// for OU the same Brownian increments.
std::pair<Vector, Vector> flow_step_synchronous(const RegimeDynamics& dyn, const Vector& x,
                                                const Vector& y, double dt, Rng& rng,
                                                double ou_step = 0.01);

struct SimOptions {
  // Uniformisation rate; defaults to max(2 a_bar, 1). Must be >= 2 a_bar.
  std::optional<double> rate;
  // Output times in [0, T], ascending. Empty means {0, T}.
  std::vector<double> grid;
  double blowup_norm = 1e12;
  std::uint64_t max_switches = 100'000'000;
  double ou_step = 0.01;
};

double default_uniformization_rate(const SwitchingSpec& spec);
// Resolves opts.rate and enforces r >= 2 a_bar.
double resolve_rate(const SwitchingSpec& spec, const SimOptions& opts);

struct Trajectory {
  // Switch events; entry 0 is the initial condition at t = 0.
  std::vector<double> event_times;
  std::vector<int> event_regimes;
  std::vector<double> grid_times;
  std::vector<Vector> grid_states;
  std::vector<int> grid_regimes;
  std::uint64_t switch_count = 0;
  std::uint64_t poisson_events = 0;
  std::optional<double> blowup_time;
  bool switch_cap_hit = false;
  double final_time = 0.0;
  Vector final_state;
  int final_regime = 0;
};

// One path of (X, I) by uniformisation: at each Poisson(r) event in state
// (x, i) the regime jumps to j with probability a(x,i,j)/r.
Trajectory simulate_path(const SwitchingSpec& spec, const Vector& x0, RegimeId i0, double T,
                         SeedSpec seed, const SimOptions& opts = {});

// Fraction of [0, T] spent in each regime.
Vector occupation_fractions(const Trajectory& path, int num_regimes, double T);

struct Observable {
  enum class Kind { One, Norm, LogNorm, NormSquared, Coordinate, Regime, PowerDistance };
  Kind kind = Kind::One;
  int index = 0;    // Coordinate / Regime
  double q = 1.0;   // PowerDistance: d(x, x0)^q under the model metric

  // "one", "norm", "lognorm", "norm2", "x:<k>", "regime:<k>", "vq:<q>".
  static Observable parse(const std::string& tag);
  double evaluate(const SwitchingSpec& spec, const Vector& x, int regime) const;
};

struct ExpectationCurve {
  std::vector<double> times;
  std::vector<double> means;
  std::vector<double> stderrs;
  std::size_t blowups = 0;
};

// Monte Carlo E f(X_t, I_t) on a time grid; path k uses SeedSpec{master, k}.
ExpectationCurve estimate_expectation_curve(const SwitchingSpec& spec, const Observable& f,
                                            const Vector& x0, RegimeId i0,
                                            const std::vector<double>& grid, std::size_t n_paths,
                                            std::uint64_t master_seed, const SimOptions& opts = {},
                                            int jobs = 1);

MeanEstimate estimate_expectation(const SwitchingSpec& spec, const Observable& f, const Vector& x0,
                                  RegimeId i0, double t, std::size_t n_paths,
                                  std::uint64_t master_seed, const SimOptions& opts = {},
                                  int jobs = 1);

struct LyapunovEstimate {
  double exponent = 0.0;  // slope of E log|X_t| over the second half of the grid
  double exponent_stderr = 0.0;
  std::vector<double> times;
  std::vector<double> mean_log_norm;
  std::vector<double> stderr_log_norm;
};

// E log|X_t| for linear homogeneous flows (c = 0) with state-independent
// rates, tracked in renormalised form so that no path overflows.
LyapunovEstimate lyapunov_exponent(const SwitchingSpec& spec, const Vector& x0, RegimeId i0,
                                   double T, int grid_points, std::size_t n_paths,
                                   std::uint64_t master_seed, const SimOptions& opts = {},
                                   int jobs = 1);

// f(x, i) = x^T P_i x + g_i^T x + h_i.
struct QuadraticFunction {
  std::vector<Matrix> P;
  std::vector<Vector> g;
  Vector h;

  double operator()(const Vector& x, int i) const;
};

// L f(x, i) from the generator: drift . grad f + (1/2) tr(sigma sigma^T Hess f)
// + sum_j a(x,i,j) (f(x,j) - f(x,i)).
double apply_generator(const SwitchingSpec& spec, const QuadraticFunction& f, const Vector& x,
                       int i);

struct GeneratorCheck {
  double generator_value = 0.0;    // L f(x, i)
  double difference_quotient = 0.0;  // (E f(X_t, I_t) - f(x, i)) / t
  double stderr = 0.0;               // of the quotient
  double residual = 0.0;             // quotient - L f
  double second_order = 0.0;         // (t/2) L^2 f(x, i)
  double remainder_bound = 0.0;      // (t^2/3) |L^3 f(x, i)|
  bool within_bound = false;         // |residual - second_order| <= 3 se + remainder_bound
};

GeneratorCheck generator_check(const SwitchingSpec& spec, const QuadraticFunction& f,
                               const Vector& x, RegimeId i, double t_small, std::size_t n_paths,
                               std::uint64_t master_seed, const SimOptions& opts = {},
                               int jobs = 1);

// E[exp(-q int_0^t alpha(K_s) ds)] for the chain K with generator Q started
// from `initial` (a probability vector), by direct simulation of K.
MeanEstimate estimate_tilted_expectation(const GeneratorMatrix& Q, const Vector& alpha, double q,
                                         double t, const Vector& initial, std::size_t n_paths,
                                         std::uint64_t master_seed, int jobs = 1);

}  // namespace switching

#endif  // SWITCHING_SIM_HPP_
