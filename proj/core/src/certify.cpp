#include "switching/certify.hpp"

#include "switching/coupling.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace switching {

LogNormResult log_norm(const Matrix& A, const Matrix& M) {
  if (A.rows() != A.cols() || M.rows() != A.rows() || M.cols() != A.cols()) {
    throw std::invalid_argument("log_norm: dimension mismatch");
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw SpecError("log_norm: metric is not symmetric");
  }
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) throw SpecError("log_norm: metric is not positive definite");
  const Matrix S = 0.5 * (M * A + A.transpose() * M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(S, M);
  if (es.info() != Eigen::Success) throw std::runtime_error("log_norm: eigensolver failed");
  const Eigen::Index top = es.eigenvalues().size() - 1;
  LogNormResult out;
  out.mu = es.eigenvalues()(top);
  out.extremal = es.eigenvectors().col(top);
  out.extremal /= std::sqrt(out.extremal.dot(M * out.extremal));
  return out;
}

GrowthResult norm_growth(const Matrix& A, const Matrix& M, double shift, double t_max, int steps) {
  if (steps < 2 || !(t_max > 0.0)) throw std::invalid_argument("norm_growth: bad sampling");
  Eigen::LLT<Matrix> llt(M);
  if (llt.info() != Eigen::Success) throw SpecError("norm_growth: metric is not positive definite");
  const Matrix R = llt.matrixU();
  const Matrix Rinv = R.inverse();
  auto value = [&](double t) {
    const Matrix E = R * (A * t).exp() * Rinv;
    Eigen::JacobiSVD<Matrix> svd(E);
    return std::exp(shift * t) * svd.singularValues()(0);
  };
  GrowthResult best{value(0.0), 0.0};
  int best_k = 0;
  for (int k = 1; k <= steps; ++k) {
    const double t = t_max * k / steps;
    const double v = value(t);
    if (v > best.value) best = {v, t}, best_k = k;
  }
  double lo = t_max * std::max(best_k - 1, 0) / steps;
  double hi = t_max * std::min(best_k + 1, steps) / steps;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = value(a), fb = value(b);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    if (fa > fb) {
      hi = b, b = a, fb = fa, a = hi - g * (hi - lo), fa = value(a);
    } else {
      lo = a, a = b, fa = fb, b = lo + g * (hi - lo), fb = value(b);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double vm = value(mid);
  if (vm > best.value) best = {vm, mid};
  return best;
}

CurvatureReport curvature_report(const SwitchingSpec& spec) {
  check_spec(spec);
  const int n = spec.num_regimes();
  CurvatureReport rep;
  rep.metric = spec.metric.M;
  rep.rho = Vector(n);
  for (int i = 0; i < n; ++i) {
    if (spec.rho) {
      rep.rho(i) = (*spec.rho)(i);
      rep.extremal.emplace_back();
      rep.source.emplace_back("supplied");
    } else {
      const LogNormResult ln = log_norm(drift_matrix(spec.regimes[i]), spec.metric.M);
      rep.rho(i) = -ln.mu;
      rep.extremal.push_back(ln.extremal);
      rep.source.emplace_back("log-norm");
    }
  }
  return rep;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::NotApplicable:
      return "not-applicable";
  }
  return "?";
}

namespace {

void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  e = (a - av) + (b - bv);
}

// Adds b to a non-overlapping expansion (increasing magnitude), dropping zeros.
void grow_expansion(std::vector<double>& e, double b) {
  std::vector<double> out;
  out.reserve(e.size() + 1);
  double q = b;
  for (double c : e) {
    double s, err;
    two_sum(q, c, s, err);
    if (err != 0.0) out.push_back(err);
    q = s;
  }
  if (q != 0.0) out.push_back(q);
  e.swap(out);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

AssumptionCheck rates_assumption(const ValidationReport& v) {
  return {"1", "bounded-lipschitz-rates", true, "a_bar = " + fmt(v.a_bar) + ", kappa = " + fmt(v.kappa)};
}

AssumptionCheck irreducibility_assumption(const ValidationReport& v) {
  std::string w = v.irreducible
                      ? "lower rate matrix is irreducible"
                      : "lower rate matrix splits into " + std::to_string(v.components.size()) +
                            " communicating classes";
  return {"2", "irreducible-rates", v.irreducible, w};
}

AssumptionCheck curvature_assumption(const CurvatureReport& c, bool tv) {
  bool supplied = std::any_of(c.source.begin(), c.source.end(),
                              [](const std::string& s) { return s == "supplied"; });
  if (tv) {
    return {"4", "lyapunov-curvature", true,
            std::string("lambda = rho; a Wasserstein contraction yields the Lyapunov bound (") +
                (supplied ? "supplied rho" : "rho from log-norms") + ")"};
  }
  return {"3", "wasserstein-curvature", true, supplied ? "rho supplied by the model" : "rho = -log_norm(A_i, M)"};
}

bool elliptic_regime(const SwitchingSpec& spec, int* which) {
  for (int i = 0; i < spec.num_regimes(); ++i) {
    if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&spec.regimes[i])) {
      const Matrix D = ou->sigma * ou->sigma.transpose();
      Eigen::SelfAdjointEigenSolver<Matrix> es(D, Eigen::EigenvaluesOnly);
      const double top = es.eigenvalues().maxCoeff();
      if (top > 0.0 && es.eigenvalues().minCoeff() > 1e-12 * top) {
        if (which) *which = i;
        return true;
      }
    }
  }
  return false;
}

bool all_affine(const SwitchingSpec& spec) {
  return std::all_of(spec.regimes.begin(), spec.regimes.end(),
                     [](const RegimeDynamics& r) { return is_deterministic(r); });
}

AssumptionCheck small_set_assumption(const SwitchingSpec& spec) {
  int which = -1;
  if (elliptic_regime(spec, &which)) {
    return {"6", "bracket-condition", true, "regime " + std::to_string(which) + " has non-degenerate noise"};
  }
  if (!all_affine(spec)) {
    return {"6", "bracket-condition", false, "degenerate noise and non-affine fields: no bracket surrogate"};
  }
  const HormanderResult h = hormander_rank(spec, spec.metric.x0);
  const bool ok = h.rank == spec.dim;
  return {"6", "bracket-condition", ok,
          "bracket rank " + std::to_string(h.rank) + " of " + std::to_string(spec.dim) +
              " at the reference point"};
}

bool assumptions_pass(const std::vector<AssumptionCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& a) { return a.pass; });
}

void attach_tilted(Certificate& cert, const GeneratorMatrix& Q, const Vector& alpha) {
  try {
    const QOptimum opt = optimize_q(Q, alpha);
    cert.q_star = opt.q;
    cert.eta_star = opt.eta;
    const TiltedSolution sol = tilted_exponent(Q, alpha, opt.q);
    cert.upper_constant = sol.upper_constant;
    cert.lower_constant = sol.lower_constant;
    cert.expansion = worst_case_expansion(alpha, opt.q);
  } catch (const NotApplicable& e) {
    cert.note += (cert.note.empty() ? "" : "; ") + std::string(e.what());
  }
}

void finish(Certificate& cert, bool positive) {
  cert.verdict = (positive && assumptions_pass(cert.assumptions)) ? Verdict::Pass : Verdict::Fail;
}

std::vector<AssumptionCheck> base_assumptions(const SwitchingSpec& spec,
                                              const ValidationReport& v,
                                              const CurvatureReport& c, bool tv) {
  std::vector<AssumptionCheck> out{rates_assumption(v), irreducibility_assumption(v),
                                   curvature_assumption(c, tv)};
  if (tv) out.push_back(small_set_assumption(spec));
  return out;
}

}  // namespace

int exact_dot_sign(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("exact_dot_sign: size mismatch");
  std::vector<double> e;
  double naive = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double p = a[k] * b[k];
    if (!std::isfinite(p)) {
      naive = std::numeric_limits<double>::quiet_NaN();
      break;
    }
    const double err = std::fma(a[k], b[k], -p);
    naive += p;
    grow_expansion(e, err);
    grow_expansion(e, p);
  }
  if (std::isnan(naive)) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return (s > 0) - (s < 0);
  }
  for (auto it = e.rbegin(); it != e.rend(); ++it) {
    if (*it != 0.0) return *it > 0.0 ? 1 : -1;
  }
  return 0;
}

Certificate check_average_criterion(const SwitchingSpec& spec, const CurvatureReport& curvature,
                                    bool total_variation) {
  if (!has_constant_rates(spec)) {
    throw NotApplicable(
        "average criterion needs state-independent rates; use the on-off or birth-death criteria");
  }
  const ValidationReport v = validate_spec(spec);
  Certificate cert;
  cert.tag = total_variation ? "TV-constant" : "W-constant";
  cert.curvature = curvature.rho;
  cert.assumptions = base_assumptions(spec, v, curvature, total_variation);
  if (!v.irreducible) {
    cert.value = std::numeric_limits<double>::quiet_NaN();
    cert.note = "no unique invariant law for the regime chain";
    cert.verdict = Verdict::Fail;
    return cert;
  }
  const GeneratorMatrix Q = GeneratorMatrix::from_rates(constant_rate_matrix(spec));
  cert.nu = stationary_distribution(Q);
  cert.value = cert.nu.dot(curvature.rho);
  const double slack = 1e-12 * std::max(1.0, curvature.rho.cwiseAbs().maxCoeff());
  const bool positive = cert.value > slack;
  if (positive) attach_tilted(cert, Q, curvature.rho);
  finish(cert, positive);
  return cert;
}

Certificate check_onoff(const SwitchingSpec& spec, const CurvatureReport& curvature,
                        bool total_variation) {
  const Vector& rho = curvature.rho;
  std::vector<int> f0, f1;
  for (int i = 0; i < rho.size(); ++i) (rho(i) > 0.0 ? f0 : f1).push_back(i);
  if (f0.empty()) throw NotApplicable("on-off criterion: no regime has positive curvature");

  const ValidationReport v = validate_spec(spec);
  Certificate cert;
  cert.tag = total_variation ? "TV-onoff" : "W-onoff";
  cert.curvature = rho;
  cert.assumptions = base_assumptions(spec, v, curvature, total_variation);

  double rho0 = std::numeric_limits<double>::infinity();
  for (int i : f0) rho0 = std::min(rho0, rho(i));
  cert.rho0 = rho0;
  if (f1.empty()) {
    cert.value = rho0;
    cert.note = "every regime contracts; passes by convention";
    finish(cert, true);
    return cert;
  }
  double rho1 = std::numeric_limits<double>::infinity();
  for (int i : f1) rho1 = std::min(rho1, rho(i));
  double a0 = 0.0;
  for (int i : f0) a0 = std::max(a0, rate_sum_sup(spec, i, f1));
  double a1 = std::numeric_limits<double>::infinity();
  for (int i : f1) a1 = std::min(a1, rate_sum_inf(spec, i, f0));
  cert.rho1 = rho1;
  cert.a0 = a0;
  cert.a1 = a1;
  cert.value = rho0 * a1 + rho1 * a0;
  const double lhs[2] = {rho0, rho1};
  const double rhs[2] = {a1, a0};
  const bool positive = exact_dot_sign(lhs, rhs) > 0;

  if (a0 > 0.0 && a1 > 0.0) {
    Matrix rates(2, 2);
    rates << 0.0, a0, a1, 0.0;
    const GeneratorMatrix Q = GeneratorMatrix::from_rates(rates);
    Vector alpha(2);
    alpha << rho0, rho1;
    cert.nu = stationary_distribution(Q);
    if (positive) attach_tilted(cert, Q, alpha);
  }
  finish(cert, positive);
  return cert;
}

Certificate check_birth_death(const SwitchingSpec& spec, const CurvatureReport& curvature,
                              const std::vector<std::vector<int>>& partition,
                              bool total_variation) {
  const BirthDeathRates bd = dominating_rates(spec, partition);
  const int top = bd.top();
  for (int n = 0; n < top; ++n) {
    if (!(bd.birth[n] > 0.0)) {
      throw NotApplicable("birth-death criterion: b(" + std::to_string(n) + ") = 0");
    }
  }
  for (int n = 1; n <= top; ++n) {
    if (!(bd.death[n] > 0.0)) {
      throw NotApplicable("birth-death criterion: d(" + std::to_string(n) + ") = 0");
    }
  }

  const ValidationReport v = validate_spec(spec);
  Certificate cert;
  cert.tag = total_variation ? "TV-birthdeath" : "W-birthdeath";
  cert.curvature = curvature.rho;
  cert.assumptions = base_assumptions(spec, v, curvature, total_variation);
  cert.assumptions.push_back({"5", "local-partition", true,
                              "partition of " + std::to_string(top + 1) +
                                  " blocks is local with positive b(n), d(n)"});
  cert.birth = bd.birth;
  cert.death = bd.death;
  cert.nu = birth_death_nu(bd);
  cert.alpha = best_alpha(curvature.rho, partition);
  cert.value = cert.nu.dot(cert.alpha);

  // nu(n) is proportional to prod_{k<=n} b(k-1) prod_{k>n} d(k); the sign of
  // the criterion is read off those unnormalised weights exactly.
  std::vector<double> w(static_cast<std::size_t>(top + 1), 1.0);
  for (int n = 0; n <= top; ++n) {
    for (int k = 1; k <= n; ++k) w[n] *= bd.birth[k - 1];
    for (int k = n + 1; k <= top; ++k) w[n] *= bd.death[k];
  }
  std::vector<double> alpha(cert.alpha.data(), cert.alpha.data() + cert.alpha.size());
  const bool positive = exact_dot_sign(alpha, w) > 0;
  if (positive) attach_tilted(cert, birth_death_generator(bd), cert.alpha);
  finish(cert, positive);
  return cert;
}

HormanderResult hormander_rank(const SwitchingSpec& spec, const Vector& x, int depth) {
  if (!all_affine(spec)) throw NotApplicable("bracket rank: every regime must be an affine flow");
  if (x.size() != spec.dim) throw std::invalid_argument("bracket rank: dimension mismatch");
  const int d = spec.dim;
  const int n = spec.num_regimes();

  struct Field {
    Matrix B;
    Vector b;
  };
  auto flatten = [&](const Field& f) {
    Vector v(d * d + d);
    v.head(d * d) = Eigen::Map<const Vector>(f.B.data(), d * d);
    v.tail(d) = f.b;
    return v;
  };

  // Orthonormal basis of the affine fields kept so far.
  std::vector<Vector> span;
  std::vector<Field> kept;
  auto try_add = [&](const Field& f) {
    Vector v = flatten(f);
    const double norm0 = v.norm();
    if (!(norm0 > 0.0)) return false;
    for (const auto& e : span) v -= e.dot(v) * e;
    for (const auto& e : span) v -= e.dot(v) * e;
    if (v.norm() <= 1e-10 * norm0) return false;
    span.push_back(v / v.norm());
    kept.push_back(f);
    return true;
  };

  std::vector<Field> generation;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Field f{drift_matrix(spec.regimes[i]) - drift_matrix(spec.regimes[j]),
              drift_offset(spec.regimes[i]) - drift_offset(spec.regimes[j])};
      if (try_add(f)) generation.push_back(f);
    }
  }
  HormanderResult res;
  res.generations = generation.empty() ? 0 : 1;
  for (int g = 1; g < depth && !generation.empty(); ++g) {
    std::vector<Field> next;
    for (int i = 0; i < n; ++i) {
      const Matrix& A = drift_matrix(spec.regimes[i]);
      const Vector& a = drift_offset(spec.regimes[i]);
      for (const Field& h : generation) {
        // [A x + a, B x + b] = (B A - A B) x + (B a - A b).
        Field f{h.B * A - A * h.B, h.B * a - A * h.b};
        if (try_add(f)) next.push_back(f);
      }
    }
    if (!next.empty()) ++res.generations;
    generation.swap(next);
  }

  res.fields = static_cast<int>(kept.size());
  if (kept.empty()) {
    res.basis = Matrix(d, 0);
    return res;
  }
  Matrix values(d, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) values.col(k) = kept[k].B * x + kept[k].b;
  Eigen::JacobiSVD<Matrix> svd(values, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  int rank = 0;
  if (top > 1e-14) {
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s(k) > 1e-9 * top) ++rank;
    }
  }
  res.rank = rank;
  res.basis = svd.matrixU().leftCols(rank);
  return res;
}

LyapunovFit lyapunov_fit(const SwitchingSpec& spec,
                         const std::vector<std::pair<Vector, RegimeId>>& starts,
                         const std::vector<double>& grid, std::size_t n_paths, double q,
                         std::uint64_t master_seed, const SimOptions& opts, int jobs) {
  if (starts.empty()) throw std::invalid_argument("lyapunov_fit: no starting points");
  if (grid.size() < 3) throw std::invalid_argument("lyapunov_fit: need at least three grid times");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("lyapunov_fit: q must lie in (0,1]");

  Observable V;
  V.kind = Observable::Kind::PowerDistance;
  V.q = q;
  const QuadraticMetric metric = spec.metric_object();

  LyapunovFit fit;
  fit.q = q;
  fit.times = grid;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const auto& [x, i] = starts[s];
    const ExpectationCurve c = estimate_expectation_curve(
        spec, V, x, i, grid, n_paths, master_seed + 0x9e3779b97f4a7c15ULL * s, opts, jobs);
    fit.means.push_back(c.means);
    fit.stderrs.push_back(c.stderrs);
    fit.blowups += c.blowups;
    fit.v_start.push_back(std::pow(metric.distance(x, spec.metric.x0), q));
  }

  // Points, with a noise floor so exact (noise-free) curves still get weights.
  struct Point {
    double t, v, y, sigma;
  };
  std::vector<Point> pts;
  bool finite = true;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double y = fit.means[s][g];
      if (!std::isfinite(y)) finite = false;
      const double sigma = std::max({fit.stderrs[s][g], 1e-3 * std::abs(y), 1e-12});
      pts.push_back({grid[g], fit.v_start[s], y, sigma});
    }
  }
  if (!finite) {
    fit.holds = false;
    fit.worst_excess = std::numeric_limits<double>::infinity();
    fit.lambda = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }

  // For fixed lambda the model is linear in (C, K) >= 0.
  auto solve_ck = [&](double lambda, double& C, double& K) {
    auto rss_for = [&](double c, double k) {
      double r = 0.0;
      for (const auto& p : pts) {
        const double e = (p.y - c * std::exp(-lambda * p.t) * p.v - k) / p.sigma;
        r += e * e;
      }
      return r;
    };
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    for (const auto& p : pts) {
      const double w = 1.0 / (p.sigma * p.sigma);
      const double f = std::exp(-lambda * p.t) * p.v;
      s11 += w * f * f, s12 += w * f, s22 += w, b1 += w * f * p.y, b2 += w * p.y;
    }
    const double det = s11 * s22 - s12 * s12;
    double best = std::numeric_limits<double>::infinity();
    if (std::abs(det) > 1e-300) {
      const double c = (b1 * s22 - b2 * s12) / det;
      const double k = (s11 * b2 - s12 * b1) / det;
      if (c >= 0.0 && k >= 0.0) {
        C = c, K = k;
        return rss_for(c, k);
      }
    }
    const double c_only = s11 > 0 ? std::max(0.0, b1 / s11) : 0.0;
    const double k_only = std::max(0.0, b2 / s22);
    const double r1 = rss_for(c_only, 0.0), r2 = rss_for(0.0, k_only);
    if (r1 <= r2) {
      C = c_only, K = 0.0, best = r1;
    } else {
      C = 0.0, K = k_only, best = r2;
    }
    return best;
  };

  const double lmin = 1e-3, lmax = 20.0;
  double best_l = lmin, best_rss = std::numeric_limits<double>::infinity(), C = 0, K = 0;
  constexpr int kScan = 400;
  int best_k = 0;
  for (int k = 0; k <= kScan; ++k) {
    const double l = lmin * std::pow(lmax / lmin, static_cast<double>(k) / kScan);
    double c, kk;
    const double r = solve_ck(l, c, kk);
    if (r < best_rss) best_rss = r, best_l = l, best_k = k;
  }
  double lo = lmin * std::pow(lmax / lmin, std::max(best_k - 1, 0) / double(kScan));
  double hi = lmin * std::pow(lmax / lmin, std::min(best_k + 1, kScan) / double(kScan));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c1, k1;
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = solve_ck(a, c1, k1), fb = solve_ck(b, c1, k1);
  for (int it = 0; it < 100 && hi - lo > 1e-10 * hi; ++it) {
    if (fa < fb) {
      hi = b, b = a, fb = fa, a = hi - g * (hi - lo), fa = solve_ck(a, c1, k1);
    } else {
      lo = a, a = b, fa = fb, b = lo + g * (hi - lo), fb = solve_ck(b, c1, k1);
    }
  }
  const double mid = 0.5 * (lo + hi);
  if (solve_ck(mid, c1, k1) < best_rss) best_l = mid;
  solve_ck(best_l, C, K);

  double worst = 0.0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const double f = C * std::exp(-best_l * grid[gi]) * fit.v_start[s] + K;
      const double y = fit.means[s][gi];
      const double tol = 3.0 * fit.stderrs[s][gi] + 0.05 * std::abs(y) + 1e-12;
      worst = std::max(worst, (y - f) / tol);
    }
  }
  fit.worst_excess = worst;

  // Raise K, then C, until the bound dominates every estimate.
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (fit.v_start[s] > 0.0) continue;
    for (double y : fit.means[s]) K = std::max(K, y);
  }
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (!(fit.v_start[s] > 0.0)) continue;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      C = std::max(C, (fit.means[s][gi] - K) / (std::exp(-best_l * grid[gi]) * fit.v_start[s]));
    }
  }
  fit.C = C;
  fit.lambda = best_l;
  fit.K = K;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::vector<double> row;
    for (double t : grid) row.push_back(C * std::exp(-best_l * t) * fit.v_start[s] + K);
    fit.fitted.push_back(std::move(row));
  }
  // A rate pinned at the bottom of the scan is no decay at all.
  fit.holds = best_l > 1.5 * lmin;
  return fit;
}

bool CertificateReport::any_pass() const {
  return std::any_of(certificates.begin(), certificates.end(),
                     [](const Certificate& c) { return c.verdict == Verdict::Pass; });
}

CertificateReport certify_all(const SwitchingSpec& spec) {
  CertificateReport rep;
  rep.name = spec.name;
  rep.validation = validate_spec(spec);
  rep.curvature = curvature_report(spec);
  rep.elliptic = elliptic_regime(spec, nullptr);
  if (all_affine(spec)) rep.hormander = hormander_rank(spec, spec.metric.x0);

  auto not_applicable = [](const std::string& tag, const std::string& why) {
    Certificate c;
    c.tag = tag;
    c.verdict = Verdict::NotApplicable;
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.note = why;
    return c;
  };

  for (bool tv : {false, true}) {
    const std::string prefix = tv ? "TV-" : "W-";
    try {
      rep.certificates.push_back(check_average_criterion(spec, rep.curvature, tv));
    } catch (const NotApplicable& e) {
      rep.certificates.push_back(not_applicable(prefix + "constant", e.what()));
    }
    try {
      rep.certificates.push_back(check_onoff(spec, rep.curvature, tv));
    } catch (const NotApplicable& e) {
      rep.certificates.push_back(not_applicable(prefix + "onoff", e.what()));
    }
    if (spec.partition) {
      try {
        rep.certificates.push_back(check_birth_death(spec, rep.curvature, *spec.partition, tv));
      } catch (const NotApplicable& e) {
        rep.certificates.push_back(not_applicable(prefix + "birthdeath", e.what()));
      } catch (const SpecError& e) {
        rep.certificates.push_back(not_applicable(prefix + "birthdeath", e.what()));
      }
    } else {
      rep.certificates.push_back(not_applicable(prefix + "birthdeath", "no partition supplied"));
    }
  }

  const int n = spec.num_regimes();
  if (!spec.regime_metrics.empty()) {
    RegimeMetricDiagnostics diag;
    diag.curvature = Matrix(n, n);
    diag.growth = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
      const Matrix& A = drift_matrix(spec.regimes[i]);
      for (int j = 0; j < n; ++j) diag.curvature(i, j) = -log_norm(A, spec.regime_metrics[j]).mu;
      for (int j = 0; j < n; ++j) {
        diag.growth(i, j) = norm_growth(A, spec.regime_metrics[j], diag.curvature(i, i)).value;
      }
    }
    bool own_contract = true;
    for (int i = 0; i < n; ++i) own_contract &= diag.curvature(i, i) > 0.0;
    if (own_contract && (rep.curvature.rho.array() <= 0.0).any()) {
      rep.diagnostics.push_back(
          "every regime contracts in its own metric, but not in a common one: the shared-metric "
          "curvature has non-positive entries, so contraction of each flow does not transfer to "
          "the switched process");
    }
    rep.regime_metrics = std::move(diag);
  }
  if (!rep.validation.irreducible) {
    rep.diagnostics.push_back("lower rate matrix is reducible");
  }
  if (!rep.any_pass()) {
    std::ostringstream os;
    os << "no criterion passes; curvature under the shared metric:";
    for (int i = 0; i < n; ++i) os << ' ' << fmt(rep.curvature.rho(i));
    rep.diagnostics.push_back(os.str());
  }
  return rep;
}

}  // namespace switching
