#include "switching/coupling.hpp"

#include "switching/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <stdexcept>

namespace switching {

namespace {

std::vector<double> resolve_grid(const std::vector<double>& requested, double T) {
  std::vector<double> grid = requested.empty() ? std::vector<double>{0.0, T} : requested;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= T)) throw std::invalid_argument("grid time outside [0, T]");
    if (k > 0 && grid[k] < grid[k - 1]) throw std::invalid_argument("grid must be ascending");
  }
  return grid;
}

bool blown_up(const Vector& v, double limit) {
  return !v.allFinite() || v.lpNorm<Eigen::Infinity>() > limit;
}

int pick(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return -1;
}

void check_start(const SwitchingSpec& spec, const Vector& x, RegimeId i, double T) {
  if (x.size() != spec.dim) throw std::invalid_argument("coupling: state dimension mismatch");
  if (i.index < 0 || i.index >= spec.num_regimes()) {
    throw std::invalid_argument("coupling: regime index out of range");
  }
  if (!(T >= 0.0)) throw std::invalid_argument("coupling: negative horizon");
}

double checked_rate(const CouplingOptions& opts, double minimum, double fallback,
                    const char* what) {
  if (!opts.rate) return fallback;
  const double r = *opts.rate;
  if (!std::isfinite(r) || !(r > 0.0) || r < minimum) {
    throw std::invalid_argument(std::string(what) + ": intensity r = " + std::to_string(r) +
                                " is below the required " + std::to_string(minimum));
  }
  return r;
}

}  // namespace

JumpPartition::Outcome JumpPartition::select(double u, int i, int j) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < only_x.size(); ++k) {
    acc += only_x[k];
    if (u < acc) return {static_cast<int>(k), j};
  }
  for (std::size_t k = 0; k < only_y.size(); ++k) {
    acc += only_y[k];
    if (u < acc) return {i, static_cast<int>(k)};
  }
  for (std::size_t k = 0; k < both.size(); ++k) {
    acc += both[k];
    if (u < acc) return {static_cast<int>(k), static_cast<int>(k)};
  }
  return {i, j};
}

JumpPartition jump_partition(const SwitchingSpec& spec, const Vector& x, int i, const Vector& y,
                             int j, double r) {
  const int n = spec.num_regimes();
  std::vector<double> ax(static_cast<std::size_t>(n)), ay(static_cast<std::size_t>(n));
  rate_row(spec, x, i, ax);
  rate_row(spec, y, j, ay);
  JumpPartition p;
  p.only_x.resize(n);
  p.only_y.resize(n);
  p.both.resize(n);
  double sum_max = 0.0;
  for (int k = 0; k < n; ++k) {
    p.only_x[k] = std::max(ax[k] - ay[k], 0.0) / r;
    p.only_y[k] = std::max(ay[k] - ax[k], 0.0) / r;
    p.both[k] = std::min(ax[k], ay[k]) / r;
    p.lambda0 += p.only_x[k];
    p.lambda1 += p.only_y[k];
    p.lambda2 += p.both[k];
    sum_max += std::max(ax[k], ay[k]);
  }
  p.lambda3 = 1.0 - sum_max / r;
  if (p.lambda3 < -1e-12) {
    throw std::invalid_argument("jump_partition: r is below the combined jump rate");
  }
  p.lambda3 = std::max(p.lambda3, 0.0);
  return p;
}

CoupledRun couple_constant(const SwitchingSpec& spec, const Vector& x, const Vector& y,
                           RegimeId i, RegimeId j, double T, SeedSpec seed,
                           const CouplingOptions& opts) {
  if (!has_constant_rates(spec)) {
    throw NotApplicable("constant-rate coupling: jump rates depend on the continuous state");
  }
  check_start(spec, x, i, T);
  check_start(spec, y, j, T);
  const double a_bar = rate_bound(spec);
  const double r = checked_rate(opts, 2.0 * a_bar, default_uniformization_rate(spec),
                                "constant-rate coupling");
  const std::vector<double> grid = resolve_grid(opts.grid, T);
  const Matrix rates = constant_rate_matrix(spec);
  const int n = spec.num_regimes();

  Rng clock_x = make_rng(seed, 0), noise_x = make_rng(seed, 1);
  Rng clock_y = make_rng(seed, 2), noise_y = make_rng(seed, 3);

  CoupledRun run;
  double t = 0.0;
  Vector X = x, Y = y;
  int I = i.index, J = j.index;
  bool met = (I == J);
  if (met) run.t_meet = 0.0;
  run.events.push_back({0.0, X, Y, I, J, -1});

  auto advance = [&](double to) {
    const double dt = to - t;
    if (met) {
      std::tie(X, Y) = flow_step_synchronous(spec.regimes[I], X, Y, dt, noise_x, opts.ou_step);
    } else {
      X = flow_step(spec.regimes[I], X, dt, &noise_x, opts.ou_step);
      Y = flow_step(spec.regimes[J], Y, dt, &noise_y, opts.ou_step);
    }
    t = to;
    if (blown_up(X, opts.blowup_norm) || blown_up(Y, opts.blowup_norm)) run.blowup_time = t;
  };

  std::vector<double> row(static_cast<std::size_t>(n));
  auto jump_target = [&](int from, Rng& clock) {
    for (int k = 0; k < n; ++k) row[k] = (k == from) ? 0.0 : rates(from, k);
    return pick(row, uniform01(clock) * r);
  };

  double tau_x = exponential(clock_x, r);
  double tau_y = met ? std::numeric_limits<double>::infinity() : exponential(clock_y, r);
  std::size_t gi = 0;
  while (true) {
    const bool x_fires = met || tau_x <= tau_y;
    const double next = x_fires ? tau_x : tau_y;
    const double stop = std::min(next, T);
    while (gi < grid.size() && grid[gi] <= stop) {
      advance(grid[gi]);
      if (run.blowup_time) break;
      run.grid.push_back({t, X, Y, I, J, -1});
      ++gi;
    }
    if (run.blowup_time) break;
    advance(stop);
    if (run.blowup_time || next >= T) break;
    if (++run.poisson_events >= opts.max_events) break;

    bool jumped = false;
    if (x_fires) {
      const int k = jump_target(I, clock_x);
      if (k >= 0) {
        I = k;
        if (met) J = k;
        jumped = true;
      }
      tau_x = t + exponential(clock_x, r);
    } else {
      const int k = jump_target(J, clock_y);
      if (k >= 0) {
        J = k;
        jumped = true;
      }
      tau_y = t + exponential(clock_y, r);
    }
    if (!met && I == J) {
      met = true;
      run.t_meet = t;
      tau_y = std::numeric_limits<double>::infinity();
    }
    if (jumped || opts.record_all_events) run.events.push_back({t, X, Y, I, J, -1});
  }
  return run;
}

CoupledRun couple_uniformized(const SwitchingSpec& spec, const Vector& x, const Vector& y,
                              RegimeId i, RegimeId j, double T, SeedSpec seed,
                              const CouplingOptions& opts) {
  check_start(spec, x, i, T);
  check_start(spec, y, j, T);
  const double a_bar = rate_bound(spec);
  const double r = checked_rate(opts, 2.0 * a_bar, default_uniformization_rate(spec),
                                "uniformized coupling");
  const std::vector<double> grid = resolve_grid(opts.grid, T);

  Rng clock = make_rng(seed, 0), noise_x = make_rng(seed, 1), noise_y = make_rng(seed, 3);

  CoupledRun run;
  double t = 0.0;
  Vector X = x, Y = y;
  int I = i.index, J = j.index;
  if (I == J) run.t_meet = 0.0;
  run.events.push_back({0.0, X, Y, I, J, -1});

  auto advance = [&](double to) {
    const double dt = to - t;
    if (I == J) {
      std::tie(X, Y) = flow_step_synchronous(spec.regimes[I], X, Y, dt, noise_x, opts.ou_step);
    } else {
      X = flow_step(spec.regimes[I], X, dt, &noise_x, opts.ou_step);
      Y = flow_step(spec.regimes[J], Y, dt, &noise_y, opts.ou_step);
    }
    t = to;
    if (blown_up(X, opts.blowup_norm) || blown_up(Y, opts.blowup_norm)) run.blowup_time = t;
  };

  std::size_t gi = 0;
  while (true) {
    const double tau = t + exponential(clock, r);
    const double stop = std::min(tau, T);
    while (gi < grid.size() && grid[gi] <= stop) {
      advance(grid[gi]);
      if (run.blowup_time) break;
      run.grid.push_back({t, X, Y, I, J, -1});
      ++gi;
    }
    if (run.blowup_time) break;
    advance(stop);
    if (run.blowup_time || tau >= T) break;
    if (++run.poisson_events >= opts.max_events) break;

    const JumpPartition p = jump_partition(spec, X, I, Y, J, r);
    const auto next = p.select(uniform01(clock), I, J);
    const bool was_equal = (I == J);
    const bool jumped = next.next_i != I || next.next_j != J;
    I = next.next_i;
    J = next.next_j;
    if (was_equal && I != J) {
      ++run.separations;
      if (!run.t_sep) run.t_sep = t;
    }
    if (I == J && !run.t_meet) run.t_meet = t;
    if (jumped || opts.record_all_events) run.events.push_back({t, X, Y, I, J, -1});
  }
  return run;
}

std::vector<int> block_of(const std::vector<std::vector<int>>& partition, int num_regimes) {
  std::vector<int> block(static_cast<std::size_t>(num_regimes), -1);
  for (std::size_t n = 0; n < partition.size(); ++n) {
    if (partition[n].empty()) throw SpecError("partition: empty block");
    for (int i : partition[n]) {
      if (i < 0 || i >= num_regimes) throw SpecError("partition: regime index out of range");
      if (block[i] >= 0) throw SpecError("partition: blocks are not disjoint");
      block[i] = static_cast<int>(n);
    }
  }
  for (int b : block) {
    if (b < 0) throw SpecError("partition: blocks do not cover all regimes");
  }
  return block;
}

void check_partition_locality(const SwitchingSpec& spec,
                              const std::vector<std::vector<int>>& partition) {
  const int n = spec.num_regimes();
  const std::vector<int> block = block_of(partition, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(block[i] - block[j]) > 1 && !rate_identically_zero(spec, i, j)) {
        throw SpecError("partition: regime " + std::to_string(i) + " can jump to regime " +
                        std::to_string(j) + " outside the neighbouring blocks");
      }
    }
  }
}

BirthDeathRates dominating_rates(const SwitchingSpec& spec,
                                 const std::vector<std::vector<int>>& partition) {
  check_partition_locality(spec, partition);
  const int top = static_cast<int>(partition.size()) - 1;
  BirthDeathRates bd;
  bd.birth.assign(static_cast<std::size_t>(top), 0.0);
  bd.death.assign(static_cast<std::size_t>(top + 1), 0.0);
  for (int n = 0; n < top; ++n) {
    double b = std::numeric_limits<double>::infinity();
    for (int i : partition[n]) b = std::min(b, rate_sum_inf(spec, i, partition[n + 1]));
    bd.birth[n] = b;
  }
  for (int n = 1; n <= top; ++n) {
    double d = 0.0;
    for (int i : partition[n]) d = std::max(d, rate_sum_sup(spec, i, partition[n - 1]));
    bd.death[n] = d;
  }
  return bd;
}

CoupledRun couple_with_dominating(const SwitchingSpec& spec,
                                  const std::vector<std::vector<int>>& partition, const Vector& x,
                                  RegimeId i, double T, SeedSpec seed,
                                  const CouplingOptions& opts, int l0) {
  check_start(spec, x, i, T);
  const BirthDeathRates bd = dominating_rates(spec, partition);
  const std::vector<int> block = block_of(partition, spec.num_regimes());
  const int top = bd.top();
  if (l0 < 0 || l0 > top) throw std::invalid_argument("dominating coupling: L0 out of range");

  const double max_d = *std::max_element(bd.death.begin(), bd.death.end());
  const double minimum = 2.0 * (rate_bound(spec) + max_d);
  const double r = checked_rate(opts, minimum, std::max(minimum, 1.0), "dominating coupling");
  const std::vector<double> grid = resolve_grid(opts.grid, T);
  const int n_regimes = spec.num_regimes();

  Rng clock = make_rng(seed, 0), noise = make_rng(seed, 1);
  auto birth = [&](int l) { return l < top ? bd.birth[l] : 0.0; };

  CoupledRun run;
  double t = 0.0;
  Vector X = x;
  int I = i.index, L = l0;
  auto note_block = [&] {
    if (!run.t_meet && block[I] == L) run.t_meet = t;
    if (run.t_meet) run.min_block_gap = std::min(run.min_block_gap, block[I] - L);
  };
  note_block();
  run.events.push_back({0.0, X, Vector(), I, -1, L});

  auto advance = [&](double to) {
    X = flow_step(spec.regimes[I], X, to - t, &noise, opts.ou_step);
    t = to;
    if (blown_up(X, opts.blowup_norm)) run.blowup_time = t;
  };

  std::vector<double> row(static_cast<std::size_t>(n_regimes));
  struct Move {
    int regime;
    int level;
  };
  std::vector<double> weights;
  std::vector<Move> moves;

  std::size_t gi = 0;
  while (true) {
    const double tau = t + exponential(clock, r);
    const double stop = std::min(tau, T);
    while (gi < grid.size() && grid[gi] <= stop) {
      advance(grid[gi]);
      if (run.blowup_time) break;
      run.grid.push_back({t, X, Vector(), I, -1, L});
      ++gi;
    }
    if (run.blowup_time) break;
    advance(stop);
    if (run.blowup_time || tau >= T) break;
    if (++run.poisson_events >= opts.max_events) break;

    // Each branch fires with probability 1/2 and then uses 2 * rate / r.
    const bool b_one = uniform01(clock) >= 0.5;
    const double u = uniform01(clock) * 0.5 * r;
    const int prev_i = I, prev_l = L;
    if (block[I] != L) {
      if (!b_one) {
        if (u < birth(L)) {
          ++L;
        } else if (u < birth(L) + bd.death[L]) {
          --L;
        }
      } else {
        rate_row(spec, X, I, row);
        const int k = pick(row, u);
        if (k >= 0) I = k;
      }
    } else if (b_one) {
      const int n = L;
      rate_row(spec, X, I, row);
      weights.clear();
      moves.clear();
      if (n > 0) {
        double down = 0.0;
        for (int k : partition[n - 1]) {
          weights.push_back(row[k]);
          moves.push_back({k, n - 1});
          down += row[k];
        }
        weights.push_back(std::max(bd.death[n] - down, 0.0));
        moves.push_back({I, n - 1});
      }
      for (int k : partition[n]) {
        weights.push_back(row[k]);
        moves.push_back({k, n});
      }
      if (n < top) {
        double up = 0.0;
        for (int k : partition[n + 1]) up += row[k];
        if (up > 0.0) {
          const double b = bd.birth[n];
          for (int k : partition[n + 1]) {
            weights.push_back(row[k] * b / up);
            moves.push_back({k, n + 1});
            weights.push_back(row[k] * (up - b) / up);
            moves.push_back({k, n});
          }
        }
      }
      const int m = pick(weights, u);
      if (m >= 0) {
        I = moves[m].regime;
        L = moves[m].level;
      }
    }
    note_block();
    if (I != prev_i || L != prev_l || opts.record_all_events) {
      run.events.push_back({t, X, Vector(), I, -1, L});
    }
  }
  return run;
}

CouplingMode parse_coupling_mode(const std::string& name) {
  if (name == "constant") return CouplingMode::Constant;
  if (name == "uniformized") return CouplingMode::Uniformized;
  throw std::invalid_argument("unknown coupling mode '" + name + "'");
}

double pair_distance(const SwitchingSpec& spec, const Vector& x, int i, const Vector& y, int j,
                     double q) {
  if (i != j) return 1.0;
  const double dq = std::pow(spec.metric_object().distance(x, y), q);
  return spec.metric.trunc ? std::min(1.0, dq) : dq;
}

double contracting_distance(const SwitchingSpec& spec, const Vector& x, int i, const Vector& y,
                            int j, double q, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("contracting_distance: delta must be positive");
  if (i != j) return 1.0;
  return std::min(1.0, std::pow(spec.metric_object().distance(x, y), q) / delta);
}

LinearFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& means,
                         const std::vector<double>& stderrs, std::size_t first) {
  std::vector<double> ts, logs, w;
  bool weighted = true;
  for (std::size_t k = first; k < times.size(); ++k) {
    if (!(means[k] > 0.0) || !std::isfinite(means[k])) continue;
    ts.push_back(times[k]);
    logs.push_back(std::log(means[k]));
    if (stderrs[k] > 0.0) {
      const double rel = stderrs[k] / means[k];
      w.push_back(1.0 / (rel * rel));
    } else {
      weighted = false;
    }
  }
  if (ts.size() < 2) throw std::invalid_argument("fit_decay_rate: fewer than two positive points");
  return weighted ? fit_line(ts, logs, w) : fit_line(ts, logs);
}

DecayCurve wasserstein_decay_curve(const SwitchingSpec& spec, const Vector& x, const Vector& y,
                                   RegimeId i, RegimeId j, const std::vector<double>& grid,
                                   std::size_t n_paths, double q, std::uint64_t master_seed,
                                   const DecayOptions& opts, int jobs) {
  if (n_paths < 2) throw std::invalid_argument("decay curve: need at least two paths");
  if (grid.size() < 2) throw std::invalid_argument("decay curve: need at least two grid times");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("decay curve: q must lie in (0,1]");
  const double T = grid.back();
  CouplingOptions copts = opts.coupling;
  copts.grid = grid;

  struct PathResult {
    std::vector<double> d, tilde;
    std::optional<double> t_meet;
    bool separated = false;
    bool blowup = false;
  };
  auto results = parallel_map(n_paths, jobs, [&](std::size_t k) {
    const SeedSpec seed{master_seed, k};
    const CoupledRun run = opts.mode == CouplingMode::Constant
                               ? couple_constant(spec, x, y, i, j, T, seed, copts)
                               : couple_uniformized(spec, x, y, i, j, T, seed, copts);
    PathResult pr;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (g < run.grid.size()) {
        const auto& s = run.grid[g];
        pr.d.push_back(pair_distance(spec, s.x, s.i, s.y, s.j, q));
        pr.tilde.push_back(contracting_distance(spec, s.x, s.i, s.y, s.j, q, opts.delta));
      } else {
        pr.d.push_back(spec.metric.trunc ? 1.0 : std::numeric_limits<double>::infinity());
        pr.tilde.push_back(1.0);
      }
    }
    pr.t_meet = run.t_meet;
    pr.separated = run.t_sep.has_value();
    pr.blowup = run.blowup_time.has_value();
    return pr;
  });

  DecayCurve curve;
  curve.times = grid;
  std::vector<RunningMoments> md(grid.size()), mt(grid.size());
  RunningMoments meet;
  std::size_t met = 0, separated = 0;
  for (const auto& pr : results) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      md[g].add(pr.d[g]);
      mt[g].add(pr.tilde[g]);
    }
    if (pr.t_meet) {
      ++met;
      meet.add(*pr.t_meet);
    }
    if (pr.separated) ++separated;
    if (pr.blowup) ++curve.blowups;
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    curve.mean_d.push_back(md[g].mean());
    curve.stderr_d.push_back(md[g].stderr_of_mean());
    curve.mean_tilde.push_back(mt[g].mean());
    curve.stderr_tilde.push_back(mt[g].stderr_of_mean());
  }
  const double n = static_cast<double>(n_paths);
  curve.met_fraction = static_cast<double>(met) / n;
  curve.separated_fraction = static_cast<double>(separated) / n;
  if (met > 0 && meet.mean() > 0.0) curve.meeting_rate = 1.0 / meet.mean();

  try {
    const LinearFit fit = fit_decay_rate(curve.times, curve.mean_d, curve.stderr_d, grid.size() / 2);
    curve.rate = -fit.slope;
    curve.rate_stderr = fit.slope_stderr;
  } catch (const std::invalid_argument&) {
    curve.degenerate = true;
  }
  return curve;
}

double worst_case_expansion(const Vector& alpha, double q) {
  if (alpha.size() == 0) throw std::invalid_argument("worst_case_expansion: empty alpha");
  return -(q * alpha).minCoeff();
}

}  // namespace switching
