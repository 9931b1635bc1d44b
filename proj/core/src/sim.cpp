#include "switching/sim.hpp"

#include "switching/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>

namespace switching {

Rng make_rng(SeedSpec seed, std::uint64_t substream) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed.master), hi(seed.master), lo(seed.stream),
                    hi(seed.stream), lo(substream),   hi(substream)};
  return Rng(seq);
}

double uniform01(Rng& rng) {
  // 53 random bits -> [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential(Rng& rng, double rate) {
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return -std::log1p(-uniform01(rng)) / rate;
}

namespace {

double standard_normal(Rng& rng) {
  // Box-Muller on two fresh uniforms; keeps the draw count per call fixed.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vector normal_vector(Rng& rng, Eigen::Index m) {
  Vector z(m);
  for (Eigen::Index k = 0; k < m; ++k) z(k) = standard_normal(rng);
  return z;
}

int ou_substeps(double dt, double ou_step) {
  if (!(ou_step > 0.0)) throw std::invalid_argument("ou_step must be positive");
  return std::max(1, static_cast<int>(std::ceil(dt / ou_step - 1e-12)));
}

}  // namespace

AffinePropagator affine_propagator(const Matrix& A, const Vector& c, double dt) {
  const Eigen::Index d = A.rows();
  AffinePropagator p;
  if (d == 1) {
    const double a = A(0, 0);
    p.Phi = Matrix::Constant(1, 1, std::exp(a * dt));
    const double integral = (a == 0.0) ? dt : std::expm1(a * dt) / a;
    p.offset = Vector::Constant(1, c(0) * integral);
    return p;
  }
  if (c.isZero(0.0)) {
    p.Phi = (A * dt).exp();
    p.offset = Vector::Zero(d);
    return p;
  }
  Matrix aug = Matrix::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = A * dt;
  aug.topRightCorner(d, 1) = c * dt;
  const Matrix e = aug.exp();
  p.Phi = e.topLeftCorner(d, d);
  p.offset = e.topRightCorner(d, 1);
  return p;
}

Vector flow_step(const RegimeDynamics& dyn, const Vector& x, double dt, Rng* rng, double ou_step) {
  if (!(dt >= 0.0)) throw std::invalid_argument("flow_step: negative time step");
  if (dt == 0.0) return x;
  if (const auto* af = std::get_if<AffineFlow>(&dyn)) {
    return affine_propagator(af->A, af->c, dt).apply(x);
  }
  const auto& ou = std::get<OrnsteinUhlenbeck>(dyn);
  if (rng == nullptr) throw std::invalid_argument("flow_step: OU regime needs a noise stream");
  const int n = ou_substeps(dt, ou_step);
  const double h = dt / n;
  const double sh = std::sqrt(h);
  Vector y = x;
  for (int k = 0; k < n; ++k) {
    const Vector z = normal_vector(*rng, ou.sigma.cols());
    y += (ou.A * y + ou.c) * h + ou.sigma * z * sh;
  }
  return y;
}

std::pair<Vector, Vector> flow_step_synchronous(const RegimeDynamics& dyn, const Vector& x,
                                                const Vector& y, double dt, Rng& rng,
                                                double ou_step) {
  if (!(dt >= 0.0)) throw std::invalid_argument("flow_step: negative time step");
  if (dt == 0.0) return {x, y};
  if (const auto* af = std::get_if<AffineFlow>(&dyn)) {
    const AffinePropagator p = affine_propagator(af->A, af->c, dt);
    return {p.apply(x), p.apply(y)};
  }
  const auto& ou = std::get<OrnsteinUhlenbeck>(dyn);
  const int n = ou_substeps(dt, ou_step);
  const double h = dt / n;
  const double sh = std::sqrt(h);
  Vector a = x, b = y;
  for (int k = 0; k < n; ++k) {
    const Vector noise = ou.sigma * normal_vector(rng, ou.sigma.cols()) * sh;
    a += (ou.A * a + ou.c) * h + noise;
    b += (ou.A * b + ou.c) * h + noise;
  }
  return {a, b};
}

double default_uniformization_rate(const SwitchingSpec& spec) {
  return std::max(2.0 * rate_bound(spec), 1.0);
}

double resolve_rate(const SwitchingSpec& spec, const SimOptions& opts) {
  if (!opts.rate) return default_uniformization_rate(spec);
  const double r = *opts.rate;
  const double a_bar = rate_bound(spec);
  if (!(r >= 2.0 * a_bar) || !std::isfinite(r) || !(r > 0.0)) {
    throw std::invalid_argument("uniformisation rate r = " + std::to_string(r) +
                                " is below 2*a_bar = " + std::to_string(2.0 * a_bar));
  }
  return r;
}

namespace {

std::vector<double> resolve_grid(const SimOptions& opts, double T) {
  std::vector<double> grid = opts.grid.empty() ? std::vector<double>{0.0, T} : opts.grid;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= T)) throw std::invalid_argument("grid time outside [0, T]");
    if (k > 0 && grid[k] < grid[k - 1]) throw std::invalid_argument("grid must be ascending");
  }
  return grid;
}

bool blown_up(const Vector& x, double limit) {
  return !x.allFinite() || x.lpNorm<Eigen::Infinity>() > limit;
}

// Index j with u in the j-th slot of the cumulative row, or -1 for no jump.
int pick_target(std::span<const double> row, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (u < acc) return static_cast<int>(j);
  }
  return -1;
}

}  // namespace

Trajectory simulate_path(const SwitchingSpec& spec, const Vector& x0, RegimeId i0, double T,
                         SeedSpec seed, const SimOptions& opts) {
  const int n = spec.num_regimes();
  if (x0.size() != spec.dim) throw std::invalid_argument("simulate_path: x0 dimension mismatch");
  if (i0.index < 0 || i0.index >= n) throw std::invalid_argument("simulate_path: bad regime");
  if (!(T >= 0.0)) throw std::invalid_argument("simulate_path: negative horizon");
  const double r = resolve_rate(spec, opts);
  const std::vector<double> grid = resolve_grid(opts, T);

  Rng clock = make_rng(seed, 0);
  Rng noise = make_rng(seed, 1);

  Trajectory path;
  path.event_times.push_back(0.0);
  path.event_regimes.push_back(i0.index);

  double t = 0.0;
  Vector x = x0;
  int i = i0.index;
  std::size_t gi = 0;
  std::vector<double> row(static_cast<std::size_t>(n));

  auto advance = [&](double to) {
    x = flow_step(spec.regimes[i], x, to - t, &noise, opts.ou_step);
    t = to;
    if (blown_up(x, opts.blowup_norm)) path.blowup_time = t;
  };

  while (true) {
    const double tau = t + exponential(clock, r);
    const double stop = std::min(tau, T);
    while (gi < grid.size() && grid[gi] <= stop) {
      advance(grid[gi]);
      if (path.blowup_time) break;
      path.grid_times.push_back(t);
      path.grid_states.push_back(x);
      path.grid_regimes.push_back(i);
      ++gi;
    }
    if (path.blowup_time) break;
    advance(stop);
    if (path.blowup_time || tau >= T) break;

    ++path.poisson_events;
    rate_row(spec, x, i, row);
    const int j = pick_target(row, uniform01(clock) * r);
    if (j >= 0) {
      i = j;
      ++path.switch_count;
      path.event_times.push_back(t);
      path.event_regimes.push_back(i);
      if (path.switch_count >= opts.max_switches) {
        path.switch_cap_hit = true;
        break;
      }
    }
  }

  path.final_time = t;
  path.final_state = x;
  path.final_regime = i;
  return path;
}

Vector occupation_fractions(const Trajectory& path, int num_regimes, double T) {
  Vector occ = Vector::Zero(num_regimes);
  if (!(T > 0.0)) return occ;
  const double end = std::min(path.final_time, T);
  for (std::size_t k = 0; k < path.event_times.size(); ++k) {
    const double from = path.event_times[k];
    const double to = (k + 1 < path.event_times.size()) ? path.event_times[k + 1] : end;
    occ(path.event_regimes[k]) += std::max(0.0, std::min(to, end) - from);
  }
  return occ / T;
}

Observable Observable::parse(const std::string& tag) {
  Observable f;
  auto suffix = [&](std::size_t pos) { return tag.substr(pos); };
  try {
    if (tag == "one") {
      f.kind = Kind::One;
    } else if (tag == "norm") {
      f.kind = Kind::Norm;
    } else if (tag == "lognorm") {
      f.kind = Kind::LogNorm;
    } else if (tag == "norm2") {
      f.kind = Kind::NormSquared;
    } else if (tag.rfind("x:", 0) == 0) {
      f.kind = Kind::Coordinate;
      f.index = std::stoi(suffix(2));
    } else if (tag.rfind("regime:", 0) == 0) {
      f.kind = Kind::Regime;
      f.index = std::stoi(suffix(7));
    } else if (tag.rfind("vq:", 0) == 0) {
      f.kind = Kind::PowerDistance;
      f.q = std::stod(suffix(3));
    } else {
      throw std::invalid_argument("unknown observable '" + tag + "'");
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("unknown observable '" + tag + "'");
  }
  return f;
}

double Observable::evaluate(const SwitchingSpec& spec, const Vector& x, int regime) const {
  switch (kind) {
    case Kind::One:
      return 1.0;
    case Kind::Norm:
      return x.norm();
    case Kind::LogNorm:
      return std::log(x.norm());
    case Kind::NormSquared:
      return x.squaredNorm();
    case Kind::Coordinate:
      if (index < 0 || index >= x.size()) throw std::invalid_argument("observable: bad coordinate");
      return x(index);
    case Kind::Regime:
      return regime == index ? 1.0 : 0.0;
    case Kind::PowerDistance:
      return std::pow(spec.metric_object().distance(x, spec.metric.x0), q);
  }
  return 0.0;
}

namespace {

// Value reported at grid times after a path left the finite region.
double blowup_value(const Observable& f) {
  switch (f.kind) {
    case Observable::Kind::One:
      return 1.0;
    case Observable::Kind::Norm:
    case Observable::Kind::LogNorm:
    case Observable::Kind::NormSquared:
    case Observable::Kind::PowerDistance:
      return std::numeric_limits<double>::infinity();
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

ExpectationCurve estimate_expectation_curve(const SwitchingSpec& spec, const Observable& f,
                                            const Vector& x0, RegimeId i0,
                                            const std::vector<double>& grid, std::size_t n_paths,
                                            std::uint64_t master_seed, const SimOptions& opts,
                                            int jobs) {
  if (n_paths < 2) throw std::invalid_argument("estimate_expectation: need at least two paths");
  if (grid.empty()) throw std::invalid_argument("estimate_expectation: empty grid");
  const double T = grid.back();
  SimOptions o = opts;
  o.grid = grid;

  struct PathValues {
    std::vector<double> values;
    bool blowup = false;
  };
  auto results = parallel_map(n_paths, jobs, [&](std::size_t k) {
    const Trajectory path = simulate_path(spec, x0, i0, T, SeedSpec{master_seed, k}, o);
    PathValues pv;
    pv.values.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (g < path.grid_states.size()) {
        pv.values.push_back(f.evaluate(spec, path.grid_states[g], path.grid_regimes[g]));
      } else {
        pv.values.push_back(blowup_value(f));
      }
    }
    pv.blowup = path.blowup_time.has_value();
    return pv;
  });

  ExpectationCurve curve;
  curve.times = grid;
  std::vector<RunningMoments> moments(grid.size());
  for (const auto& pv : results) {
    for (std::size_t g = 0; g < grid.size(); ++g) moments[g].add(pv.values[g]);
    if (pv.blowup) ++curve.blowups;
  }
  for (const auto& m : moments) {
    curve.means.push_back(m.mean());
    curve.stderrs.push_back(m.stderr_of_mean());
  }
  return curve;
}

MeanEstimate estimate_expectation(const SwitchingSpec& spec, const Observable& f, const Vector& x0,
                                  RegimeId i0, double t, std::size_t n_paths,
                                  std::uint64_t master_seed, const SimOptions& opts, int jobs) {
  const ExpectationCurve c =
      estimate_expectation_curve(spec, f, x0, i0, {t}, n_paths, master_seed, opts, jobs);
  return {c.means[0], c.stderrs[0]};
}

LyapunovEstimate lyapunov_exponent(const SwitchingSpec& spec, const Vector& x0, RegimeId i0,
                                   double T, int grid_points, std::size_t n_paths,
                                   std::uint64_t master_seed, const SimOptions& opts, int jobs) {
  if (!has_constant_rates(spec)) {
    throw NotApplicable("lyapunov_exponent: rates depend on the continuous state");
  }
  for (const auto& r : spec.regimes) {
    if (!is_deterministic(r) || !drift_offset(r).isZero(0.0)) {
      throw NotApplicable("lyapunov_exponent: needs linear homogeneous flows (c = 0)");
    }
  }
  if (grid_points < 4) throw std::invalid_argument("lyapunov_exponent: need at least 4 grid points");
  if (n_paths < 2) throw std::invalid_argument("lyapunov_exponent: need at least two paths");
  if (!(T > 0.0)) throw std::invalid_argument("lyapunov_exponent: T must be positive");
  if (!(x0.norm() > 0.0)) throw std::invalid_argument("lyapunov_exponent: x0 must be non-zero");

  const int n = spec.num_regimes();
  const double r = resolve_rate(spec, opts);
  const Matrix rates = constant_rate_matrix(spec);

  std::vector<double> times(static_cast<std::size_t>(grid_points));
  for (int g = 0; g < grid_points; ++g) times[g] = T * g / (grid_points - 1);
  const std::size_t tail = static_cast<std::size_t>(grid_points / 2);

  struct PathLog {
    std::vector<double> log_norm;
    double slope = 0.0;
  };
  auto results = parallel_map(n_paths, jobs, [&](std::size_t k) {
    Rng clock = make_rng(SeedSpec{master_seed, k}, 0);
    PathLog out;
    out.log_norm.reserve(times.size());
    Vector x = x0 / x0.norm();
    double log_scale = std::log(x0.norm());
    double t = 0.0;
    int i = i0.index;
    std::size_t gi = 0;
    std::vector<double> row(static_cast<std::size_t>(n));
    auto advance = [&](double to) {
      if (to > t) {
        x = affine_propagator(drift_matrix(spec.regimes[i]), Vector::Zero(spec.dim), to - t).Phi * x;
        const double s = x.norm();
        log_scale += std::log(s);
        x /= s;
        t = to;
      }
    };
    while (gi < times.size()) {
      const double tau = t + exponential(clock, r);
      while (gi < times.size() && times[gi] <= tau) {
        advance(times[gi]);
        out.log_norm.push_back(log_scale);
        ++gi;
      }
      if (gi >= times.size()) break;
      advance(tau);
      for (int j = 0; j < n; ++j) row[j] = (j == i) ? 0.0 : rates(i, j);
      const int j = pick_target(row, uniform01(clock) * r);
      if (j >= 0) i = j;
    }
    std::span<const double> xs(times.data() + tail, times.size() - tail);
    std::span<const double> ys(out.log_norm.data() + tail, out.log_norm.size() - tail);
    out.slope = fit_line(xs, ys).slope;
    return out;
  });

  LyapunovEstimate est;
  est.times = times;
  std::vector<RunningMoments> moments(times.size());
  RunningMoments slopes;
  for (const auto& p : results) {
    for (std::size_t g = 0; g < times.size(); ++g) moments[g].add(p.log_norm[g]);
    slopes.add(p.slope);
  }
  for (const auto& m : moments) {
    est.mean_log_norm.push_back(m.mean());
    est.stderr_log_norm.push_back(m.stderr_of_mean());
  }
  est.exponent = slopes.mean();
  est.exponent_stderr = slopes.stderr_of_mean();
  return est;
}

double QuadraticFunction::operator()(const Vector& x, int i) const {
  double v = 0.0;
  if (!P.empty()) v += x.dot(P[i] * x);
  if (!g.empty()) v += g[i].dot(x);
  if (h.size() > 0) v += h(i);
  return v;
}

double apply_generator(const SwitchingSpec& spec, const QuadraticFunction& f, const Vector& x,
                       int i) {
  const RegimeDynamics& dyn = spec.regimes[i];
  Vector grad = Vector::Zero(spec.dim);
  Matrix sym = Matrix::Zero(spec.dim, spec.dim);
  if (!f.P.empty()) {
    sym = f.P[i] + f.P[i].transpose();
    grad += sym * x;
  }
  if (!f.g.empty()) grad += f.g[i];
  double value = (drift_matrix(dyn) * x + drift_offset(dyn)).dot(grad);
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&dyn)) {
    value += 0.5 * (ou->sigma * ou->sigma.transpose() * sym).trace();
  }
  std::vector<double> row(static_cast<std::size_t>(spec.num_regimes()));
  rate_row(spec, x, i, row);
  const double here = f(x, i);
  for (int j = 0; j < spec.num_regimes(); ++j) {
    if (j != i && row[j] != 0.0) value += row[j] * (f(x, j) - here);
  }
  return value;
}

namespace {

using Fn = std::function<double(const Vector&, int)>;

// Generator applied to an arbitrary function by central differences. Exact
// (up to rounding) on quadratics, which is all the nested use below needs.
double numeric_generator(const SwitchingSpec& spec, const Fn& F, const Vector& x, int i, double h) {
  const RegimeDynamics& dyn = spec.regimes[i];
  const Eigen::Index d = x.size();
  const double here = F(x, i);
  const Vector drift = drift_matrix(dyn) * x + drift_offset(dyn);
  double value = 0.0;
  std::vector<double> plus(d), minus(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Vector xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    plus[k] = F(xp, i);
    minus[k] = F(xm, i);
    value += drift(k) * (plus[k] - minus[k]) / (2.0 * h);
  }
  if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&dyn)) {
    Matrix H(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      H(k, k) = (plus[k] - 2.0 * here + minus[k]) / (h * h);
      for (Eigen::Index l = k + 1; l < d; ++l) {
        Vector pp = x, pm = x, mp = x, mm = x;
        pp(k) += h, pp(l) += h;
        pm(k) += h, pm(l) -= h;
        mp(k) -= h, mp(l) += h;
        mm(k) -= h, mm(l) -= h;
        H(k, l) = H(l, k) = (F(pp, i) - F(pm, i) - F(mp, i) + F(mm, i)) / (4.0 * h * h);
      }
    }
    value += 0.5 * (ou->sigma * ou->sigma.transpose() * H).trace();
  }
  std::vector<double> row(static_cast<std::size_t>(spec.num_regimes()));
  rate_row(spec, x, i, row);
  for (int j = 0; j < spec.num_regimes(); ++j) {
    if (j != i && row[j] != 0.0) value += row[j] * (F(x, j) - here);
  }
  return value;
}

}  // namespace

GeneratorCheck generator_check(const SwitchingSpec& spec, const QuadraticFunction& f,
                               const Vector& x, RegimeId i, double t_small, std::size_t n_paths,
                               std::uint64_t master_seed, const SimOptions& opts, int jobs) {
  if (!(t_small >= 1e-3 && t_small <= 1e-1)) {
    throw std::invalid_argument("generator_check: t_small must lie in [1e-3, 1e-1]");
  }
  if (n_paths < 2) throw std::invalid_argument("generator_check: need at least two paths");
  GeneratorCheck out;
  out.generator_value = apply_generator(spec, f, x, i.index);

  const double h = 0.5 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
  const Fn Lf = [&](const Vector& y, int k) { return apply_generator(spec, f, y, k); };
  const Fn L2f = [&](const Vector& y, int k) { return numeric_generator(spec, Lf, y, k, h); };
  const double l2 = L2f(x, i.index);
  const double l3 = numeric_generator(spec, L2f, x, i.index, h);

  SimOptions o = opts;
  o.grid = {t_small};
  const double f0 = f(x, i.index);
  auto quotients = parallel_map(n_paths, jobs, [&](std::size_t k) {
    const Trajectory p = simulate_path(spec, x, i, t_small, SeedSpec{master_seed, k}, o);
    return (f(p.final_state, p.final_regime) - f0) / t_small;
  });
  const MeanEstimate m = mean_and_stderr(quotients);
  out.difference_quotient = m.mean;
  out.stderr = m.stderr;
  out.residual = m.mean - out.generator_value;
  out.second_order = 0.5 * t_small * l2;
  out.remainder_bound = t_small * t_small / 3.0 * std::abs(l3);
  const double slack = 1e-9 * (1.0 + std::abs(out.generator_value));
  out.within_bound = std::abs(out.residual - out.second_order) <=
                     3.0 * out.stderr + out.remainder_bound + slack;
  return out;
}

MeanEstimate estimate_tilted_expectation(const GeneratorMatrix& gen, const Vector& alpha, double q,
                                         double t, const Vector& initial, std::size_t n_paths,
                                         std::uint64_t master_seed, int jobs) {
  const Matrix& Q = gen.matrix();
  const int n = gen.size();
  if (alpha.size() != n || initial.size() != n) {
    throw std::invalid_argument("estimate_tilted_expectation: size mismatch");
  }
  if (n_paths < 2) throw std::invalid_argument("estimate_tilted_expectation: need two paths");
  auto values = parallel_map(n_paths, jobs, [&](std::size_t k) {
    Rng rng = make_rng(SeedSpec{master_seed, k}, 0);
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) row[j] = initial(j);
    int state = pick_target(row, uniform01(rng) * initial.sum());
    if (state < 0) state = n - 1;
    double s = 0.0, integral = 0.0;
    while (true) {
      const double exit = -Q(state, state);
      const double hold = exponential(rng, exit);
      if (s + hold >= t) {
        integral += alpha(state) * (t - s);
        break;
      }
      integral += alpha(state) * hold;
      s += hold;
      for (int j = 0; j < n; ++j) row[j] = (j == state) ? 0.0 : Q(state, j);
      const int next = pick_target(row, uniform01(rng) * exit);
      state = next >= 0 ? next : state;
    }
    return std::exp(-q * integral);
  });
  return mean_and_stderr(values);
}

}  // namespace switching
