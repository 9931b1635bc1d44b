#ifndef SWITCHING_COUPLING_HPP_
#define SWITCHING_COUPLING_HPP_

#include "switching/chain.hpp"
#include "switching/model.hpp"
#include "switching/sim.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace switching {

struct CoupledSample {
  double t = 0.0;
  Vector x, y;   // y is empty for the dominating coupling
  int i = 0;
  int j = -1;    // -1 when there is no second copy
  int l = -1;    // dominating chain, -1 when absent
};

struct CoupledRun {
  std::vector<CoupledSample> events;  // t = 0 plus every recorded event
  std::vector<CoupledSample> grid;    // samples at the requested output times
  std::optional<double> t_meet;       // first time I = J (first n_I = L when dominating)
  std::optional<double> t_sep;        // first time I != J after t_meet
  std::uint64_t separations = 0;
  std::uint64_t poisson_events = 0;
  // min over t >= t_meet of n_{I_t} - L_t (dominating coupling only).
  int min_block_gap = std::numeric_limits<int>::max();
  std::optional<double> blowup_time;
};

struct CouplingOptions {
  std::optional<double> rate;  // Poisson intensity; defaults per construction
  std::vector<double> grid;    // empty means {0, T}
  double blowup_norm = 1e12;
  double ou_step = 0.01;
  std::uint64_t max_events = 100'000'000;
  bool record_all_events = false;  // also record events where nothing jumps
};

// Interval lengths of the four-way split of [0, 1] at one Poisson event:
// [0, l0) only I jumps, [l0, l0+l1) only J jumps, then both jump to the same
// target, the remainder nothing. Targets are laid out in regime-index order.
struct JumpPartition {
  double lambda0 = 0.0, lambda1 = 0.0, lambda2 = 0.0, lambda3 = 0.0;
  std::vector<double> only_x;  // (a(x,i,k) - a(y,j,k))_+ / r
  std::vector<double> only_y;  // (a(y,j,k) - a(x,i,k))_+ / r
  std::vector<double> both;    // min(a(x,i,k), a(y,j,k)) / r

  struct Outcome {
    int next_i;
    int next_j;
  };
  Outcome select(double u, int i, int j) const;
};

JumpPartition jump_partition(const SwitchingSpec& spec, const Vector& x, int i, const Vector& y,
                             int j, double r);

// Independent copies until the regimes meet, then a single switching clock
// shared by both and synchronous continuous parts. Rates must not depend on x.
CoupledRun couple_constant(const SwitchingSpec& spec, const Vector& x, const Vector& y,
                           RegimeId i, RegimeId j, double T, SeedSpec seed,
                           const CouplingOptions& opts = {});

// One Poisson(r) clock drives both copies through jump_partition; continuous
// parts are synchronous while I = J and independent otherwise. r >= 2 a_bar.
CoupledRun couple_uniformized(const SwitchingSpec& spec, const Vector& x, const Vector& y,
                              RegimeId i, RegimeId j, double T, SeedSpec seed,
                              const CouplingOptions& opts = {});

// b(n) = inf_x inf_{i in F_n} sum_{F_{n+1}} a(x,i,.) and
// d(n) = sup_x sup_{i in F_n} sum_{F_{n-1}} a(x,i,.), d(0) = 0.
BirthDeathRates dominating_rates(const SwitchingSpec& spec,
                                 const std::vector<std::vector<int>>& partition);

// Throws SpecError if the partition is malformed or some a(.,i,j) with
// |n_i - n_j| > 1 is not identically zero.
void check_partition_locality(const SwitchingSpec& spec,
                              const std::vector<std::vector<int>>& partition);

// Block index n_i of every regime.
std::vector<int> block_of(const std::vector<std::vector<int>>& partition, int num_regimes);

// (X, I) coupled with the birth-death chain L. Default r = 2 (a_bar + max d),
// the smallest intensity for which every branch is a probability.
CoupledRun couple_with_dominating(const SwitchingSpec& spec,
                                  const std::vector<std::vector<int>>& partition, const Vector& x,
                                  RegimeId i, double T, SeedSpec seed,
                                  const CouplingOptions& opts = {}, int l0 = 0);

enum class CouplingMode { Constant, Uniformized };

CouplingMode parse_coupling_mode(const std::string& name);

// 1_{i != j} + 1_{i = j} min(1, d^q) (plain d^q when the metric is not truncated).
double pair_distance(const SwitchingSpec& spec, const Vector& x, int i, const Vector& y, int j,
                     double q);
// 1_{i != j} + 1_{i = j} min(1, d^q / delta).
double contracting_distance(const SwitchingSpec& spec, const Vector& x, int i, const Vector& y,
                            int j, double q, double delta);

struct DecayCurve {
  std::vector<double> times;
  std::vector<double> mean_d, stderr_d;
  std::vector<double> mean_tilde, stderr_tilde;
  // Exponential fit of mean_d over the second half of the grid.
  double rate = std::numeric_limits<double>::quiet_NaN();
  double rate_stderr = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // tail identically zero, no rate to fit
  // Empirical meeting-rate constant 1 / E[T_meet] over paths that met.
  double meeting_rate = std::numeric_limits<double>::quiet_NaN();
  double met_fraction = 0.0;
  double separated_fraction = 0.0;
  std::size_t blowups = 0;
};

struct DecayOptions {
  CouplingMode mode = CouplingMode::Constant;
  double delta = 0.5;
  CouplingOptions coupling;
};

DecayCurve wasserstein_decay_curve(const SwitchingSpec& spec, const Vector& x, const Vector& y,
                                   RegimeId i, RegimeId j, const std::vector<double>& grid,
                                   std::size_t n_paths, double q, std::uint64_t master_seed,
                                   const DecayOptions& opts = {}, int jobs = 1);

// Fit of log(mean) ~ a - rate * t over the points with index >= first,
// weighted by (mean / stderr)^2 (plain least squares when every stderr is 0).
LinearFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& means,
                         const std::vector<double>& stderrs, std::size_t first);

// -min_k q alpha(k): the worst per-unit-time expansion of d^q.
double worst_case_expansion(const Vector& alpha, double q);

}  // namespace switching

#endif  // SWITCHING_COUPLING_HPP_
