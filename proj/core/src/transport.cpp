#include "switching/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace switching {

void EmpiricalMeasure::validate() const {
  if (points.empty()) throw std::invalid_argument("empirical measure: no atoms");
  if (regimes.size() != points.size() || weights.size() != points.size()) {
    throw std::invalid_argument("empirical measure: points, regimes and weights differ in length");
  }
  const Eigen::Index dim = points.front().size();
  double total = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (points[k].size() != dim) throw std::invalid_argument("empirical measure: mixed dimensions");
    if (!points[k].allFinite()) throw std::invalid_argument("empirical measure: non-finite point");
    if (!(weights[k] >= 0.0)) throw std::invalid_argument("empirical measure: negative weight");
    total += weights[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("empirical measure: weights do not sum to 1");
  }
}

bool EmpiricalMeasure::uniform() const {
  const double w = 1.0 / static_cast<double>(weights.size());
  return std::all_of(weights.begin(), weights.end(),
                     [&](double x) { return std::abs(x - w) <= 1e-15; });
}

EmpiricalMeasure EmpiricalMeasure::uniform_cloud(std::vector<Vector> points,
                                                 std::vector<int> regimes) {
  EmpiricalMeasure m;
  const std::size_t n = points.size();
  m.points = std::move(points);
  m.regimes = std::move(regimes);
  m.weights.assign(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  return m;
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(std::span<const double> xs) {
  std::vector<Vector> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back(Vector::Constant(1, x));
  return uniform_cloud(std::move(pts), std::vector<int>(xs.size(), 0));
}

double eval_cost(const TransportCost& cost, const QuadraticMetric& metric, const Vector& x, int i,
                 const Vector& y, int j) {
  if (const auto* p = std::get_if<PowerMetric>(&cost)) {
    return std::pow(metric.distance(x, y), p->q) + (i != j ? 1.0 : 0.0);
  }
  if (const auto* t = std::get_if<TruncatedD>(&cost)) {
    if (i != j) return 1.0;
    return std::min(1.0, std::pow(metric.distance(x, y), t->q));
  }
  const auto& w = std::get<WeightedTilde>(cost);
  const double head =
      (i != j) ? 1.0 : std::min(1.0, std::pow(metric.distance(x, y), w.q) / w.delta);
  if (head == 0.0) return 0.0;
  const Vector x0 = w.x0.size() ? w.x0 : Vector::Zero(x.size());
  const double tail =
      1.0 + std::pow(metric.distance(x, x0), w.q) + std::pow(metric.distance(y, x0), w.q);
  return std::sqrt(head * tail);
}

Matrix cost_matrix(const TransportCost& cost, const QuadraticMetric& metric,
                   const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  Matrix C(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(nu.size()));
  for (std::size_t a = 0; a < mu.size(); ++a) {
    for (std::size_t b = 0; b < nu.size(); ++b) {
      C(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          eval_cost(cost, metric, mu.points[a], mu.regimes[a], nu.points[b], nu.regimes[b]);
    }
  }
  return C;
}

AssignmentResult solve_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("assignment: cost matrix must be square");
  if (!cost.allFinite()) throw std::invalid_argument("assignment: non-finite cost");
  const double inf = std::numeric_limits<double>::infinity();

  // Shortest augmenting paths with row/column potentials (1-based, column 0
  // is the virtual start).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  AssignmentResult res;
  res.row_to_col.assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) res.row_to_col[match[j] - 1] = j - 1;
  res.u = Vector(n);
  res.v = Vector(n);
  for (int k = 0; k < n; ++k) {
    res.u(k) = u[k + 1];
    res.v(k) = v[k + 1];
  }
  for (int k = 0; k < n; ++k) res.cost += cost(k, res.row_to_col[k]);
  return res;
}

namespace {

bool is_uniform(std::span<const double> w) {
  const double target = 1.0 / static_cast<double>(w.size());
  return std::all_of(w.begin(), w.end(), [&](double x) { return std::abs(x - target) <= 1e-15; });
}

// Successive shortest paths on the bipartite transportation network with
// reduced costs C_ij + pr_i - pc_j >= 0. Each augmentation exhausts a supply,
// a demand, or a reverse arc, so the loop is finite.
OtResult solve_transportation(const Matrix& C, std::span<const double> a,
                              std::span<const double> b) {
  const int m = static_cast<int>(C.rows());
  const int n = static_cast<int>(C.cols());
  const double inf = std::numeric_limits<double>::infinity();
  const double tol = 1e-15;

  std::vector<double> supply(a.begin(), a.end()), demand(b.begin(), b.end());
  Matrix F = Matrix::Zero(m, n);
  std::vector<double> pr(static_cast<std::size_t>(m), 0.0), pc(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) pc[j] = C.col(j).minCoeff();

  std::vector<double> dr(m), dc(n);
  std::vector<int> parent_r(m), parent_c(n);
  std::vector<char> done_r(m), done_c(n);

  const long long max_rounds = 4LL * (m + n) * (m + n) + 16;
  for (long long round = 0; round < max_rounds; ++round) {
    bool any_supply = false;
    for (int i = 0; i < m; ++i) any_supply |= supply[i] > tol;
    if (!any_supply) break;

    std::fill(dr.begin(), dr.end(), inf);
    std::fill(dc.begin(), dc.end(), inf);
    std::fill(parent_r.begin(), parent_r.end(), -1);
    std::fill(parent_c.begin(), parent_c.end(), -1);
    std::fill(done_r.begin(), done_r.end(), 0);
    std::fill(done_c.begin(), done_c.end(), 0);
    for (int i = 0; i < m; ++i) {
      if (supply[i] > tol) dr[i] = 0.0;
    }

    int sink = -1;
    double D = inf;
    while (true) {
      int best = -1;
      bool best_row = true;
      double bd = inf;
      for (int i = 0; i < m; ++i) {
        if (!done_r[i] && dr[i] < bd) bd = dr[i], best = i, best_row = true;
      }
      for (int j = 0; j < n; ++j) {
        if (!done_c[j] && dc[j] < bd) bd = dc[j], best = j, best_row = false;
      }
      if (best < 0) break;
      if (best_row) {
        const int i = best;
        done_r[i] = 1;
        for (int j = 0; j < n; ++j) {
          if (done_c[j]) continue;
          const double nd = dr[i] + std::max(0.0, C(i, j) + pr[i] - pc[j]);
          if (nd < dc[j]) dc[j] = nd, parent_c[j] = i;
        }
      } else {
        const int j = best;
        done_c[j] = 1;
        if (demand[j] > tol) {
          sink = j;
          D = dc[j];
          break;
        }
        for (int i = 0; i < m; ++i) {
          if (done_r[i] || !(F(i, j) > 0.0)) continue;
          const double nd = dc[j] + std::max(0.0, -C(i, j) + pc[j] - pr[i]);
          if (nd < dr[i]) dr[i] = nd, parent_r[i] = j;
        }
      }
    }
    if (sink < 0) break;

    for (int i = 0; i < m; ++i) pr[i] += std::min(dr[i], D);
    for (int j = 0; j < n; ++j) pc[j] += std::min(dc[j], D);

    // Walk back to the source row and find the bottleneck.
    double delta = demand[sink];
    int j = sink;
    int source = -1;
    while (true) {
      const int i = parent_c[j];
      if (parent_r[i] < 0) {
        source = i;
        break;
      }
      j = parent_r[i];
      delta = std::min(delta, F(i, j));
    }
    delta = std::min(delta, supply[source]);

    j = sink;
    while (true) {
      const int i = parent_c[j];
      F(i, j) += delta;
      if (i == source) break;
      j = parent_r[i];
      F(i, j) -= delta;
      if (F(i, j) <= tol) F(i, j) = 0.0;
    }
    supply[source] -= delta;
    demand[sink] -= delta;
    if (supply[source] <= tol) supply[source] = 0.0;
    if (demand[sink] <= tol) demand[sink] = 0.0;
  }

  OtResult res;
  res.method = OtMethod::Transportation;
  res.plan = F;
  res.value = (F.array() * C.array()).sum();
  // Tightened dual: u_i = -pr_i, v_j = min_i (C_ij - u_i) is always feasible.
  double dual = 0.0;
  for (int i = 0; i < m; ++i) dual += a[i] * -pr[i];
  for (int jj = 0; jj < n; ++jj) {
    double v = inf;
    for (int i = 0; i < m; ++i) v = std::min(v, C(i, jj) + pr[i]);
    dual += b[jj] * v;
  }
  res.dual_value = dual;
  return res;
}

}  // namespace

OtResult ot_exact(const Matrix& cost, std::span<const double> mu_weights,
                  std::span<const double> nu_weights, OtMethod method) {
  const std::size_t m = static_cast<std::size_t>(cost.rows());
  const std::size_t n = static_cast<std::size_t>(cost.cols());
  if (mu_weights.size() != m || nu_weights.size() != n) {
    throw std::invalid_argument("ot_exact: weights do not match the cost matrix");
  }
  if (m == 0 || n == 0) throw std::invalid_argument("ot_exact: empty measure");
  if (!cost.allFinite()) throw std::invalid_argument("ot_exact: non-finite cost");

  const bool assignment_form = m == n && is_uniform(mu_weights) && is_uniform(nu_weights);
  if (method == OtMethod::Auto) {
    method = assignment_form ? OtMethod::Assignment : OtMethod::Transportation;
  }
  if (method == OtMethod::Assignment) {
    if (!assignment_form) {
      throw std::invalid_argument("ot_exact: assignment form needs equal-size uniform measures");
    }
    if (n > 512) throw LimitError("ot_exact: assignment form supports at most 512 atoms");
    const AssignmentResult ar = solve_assignment(cost);
    OtResult res;
    res.method = OtMethod::Assignment;
    res.assignment = ar.row_to_col;
    res.plan = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < m; ++k) res.plan(k, ar.row_to_col[k]) = mu_weights[k];
    res.value = ar.cost * w;
    res.dual_value = (ar.u.sum() + ar.v.sum()) * w;
    return res;
  }
  if (m > 128 || n > 128) {
    throw LimitError("ot_exact: general weights support at most 128 atoms per side");
  }
  return solve_transportation(cost, mu_weights, nu_weights);
}

OtResult ot_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                  const TransportCost& cost, const QuadraticMetric& metric, OtMethod method) {
  mu.validate();
  nu.validate();
  if (mu.points.front().size() != nu.points.front().size()) {
    throw std::invalid_argument("ot_exact: measures live in different dimensions");
  }
  if (metric.dim() != mu.points.front().size()) {
    throw std::invalid_argument("ot_exact: metric dimension mismatch");
  }
  return ot_exact(cost_matrix(cost, metric, mu, nu), mu.weights, nu.weights, method);
}

double w1_sorted_1d(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("w1_sorted_1d: sample sizes differ");
  if (a.empty()) throw std::invalid_argument("w1_sorted_1d: empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) total += std::abs(a[k] - b[k]);
  return total / static_cast<double>(a.size());
}

double w1_sorted_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  a.validate();
  b.validate();
  if (a.points.front().size() != 1 || b.points.front().size() != 1) {
    throw std::invalid_argument("w1_sorted_1d: states must be scalar");
  }
  if (!a.uniform() || !b.uniform()) throw std::invalid_argument("w1_sorted_1d: weights must be uniform");
  const int regime = a.regimes.front();
  auto same = [&](const std::vector<int>& r) {
    return std::all_of(r.begin(), r.end(), [&](int k) { return k == regime; });
  };
  if (!same(a.regimes) || !same(b.regimes)) {
    throw std::invalid_argument("w1_sorted_1d: all atoms must share one regime");
  }
  std::vector<double> xa, xb;
  for (const auto& p : a.points) xa.push_back(p(0));
  for (const auto& p : b.points) xb.push_back(p(0));
  return w1_sorted_1d(std::move(xa), std::move(xb));
}

}  // namespace switching
