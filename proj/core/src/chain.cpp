#include "switching/chain.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace switching {

GeneratorMatrix::GeneratorMatrix(Matrix Q) : Q_(std::move(Q)) {
  if (Q_.rows() != Q_.cols() || Q_.rows() == 0) {
    throw std::invalid_argument("generator: expected a non-empty square matrix");
  }
  if (!Q_.allFinite()) throw std::invalid_argument("generator: non-finite entry");
  const Eigen::Index n = Q_.rows();
  const double scale = std::max(1.0, Q_.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && Q_(i, j) < 0.0) {
        throw std::invalid_argument("generator: negative off-diagonal rate");
      }
    }
    if (std::abs(Q_.row(i).sum()) > 1e-12 * scale) {
      throw std::invalid_argument("generator: row does not sum to zero");
    }
  }
}

GeneratorMatrix GeneratorMatrix::from_rates(const Matrix& rates) {
  Matrix Q = rates;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    Q(i, i) = 0.0;
    Q(i, i) = -Q.row(i).sum();
  }
  return GeneratorMatrix(std::move(Q));
}

GeneratorMatrix birth_death_generator(const BirthDeathRates& r) {
  const int top = r.top();
  if (static_cast<int>(r.death.size()) != top + 1) {
    throw std::invalid_argument("birth-death: death rates must have one more entry than birth rates");
  }
  Matrix rates = Matrix::Zero(top + 1, top + 1);
  for (int n = 0; n < top; ++n) rates(n, n + 1) = r.birth[n];
  for (int n = 1; n <= top; ++n) rates(n, n - 1) = r.death[n];
  return GeneratorMatrix::from_rates(rates);
}

IrreducibilityReport irreducibility(const Matrix& rates) {
  const int n = static_cast<int>(rates.rows());
  IrreducibilityReport report;

  // Tarjan's algorithm.
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = 1;
    for (int w = 0; w < n; ++w) {
      if (w == v || !(rates(v, w) > 0.0)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      int w = -1;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = 0;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      report.components.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[v] < 0) visit(v);
  }
  report.irreducible = report.components.size() == 1;
  return report;
}

namespace {

void require_irreducible(const GeneratorMatrix& Q, const char* who) {
  if (!irreducibility(Q.matrix()).irreducible) {
    throw NotApplicable(std::string(who) + ": generator is reducible");
  }
}

}  // namespace

Vector stationary_distribution(const GeneratorMatrix& gen) {
  require_irreducible(gen, "stationary_distribution");
  const Matrix& Q = gen.matrix();
  const Eigen::Index n = Q.rows();

  // nu Q = 0 with the last balance equation replaced by sum(nu) = 1.
  Matrix system = Q.transpose();
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;

  Eigen::FullPivLU<Matrix> lu(system);
  Vector nu = lu.solve(rhs);
  for (int it = 0; it < 2; ++it) {
    nu += lu.solve(rhs - system * nu);
  }
  if ((nu.array() < 0.0).any()) {
    nu = nu.cwiseMax(0.0);
    nu /= nu.sum();
  }
  return nu;
}

Vector birth_death_nu(const BirthDeathRates& r) {
  const int top = r.top();
  if (static_cast<int>(r.death.size()) != top + 1) {
    throw std::invalid_argument("birth-death: death rates must have one more entry than birth rates");
  }
  if (r.death[0] != 0.0) throw std::invalid_argument("birth-death: d(0) must be zero");
  for (int n = 0; n < top; ++n) {
    if (!(r.birth[n] > 0.0)) throw std::invalid_argument("birth-death: b(n) must be positive");
  }
  for (int n = 1; n <= top; ++n) {
    if (!(r.death[n] > 0.0)) {
      throw std::invalid_argument("birth-death: d(" + std::to_string(n) + ") must be positive");
    }
  }

  Vector weight(top + 1);
  weight(0) = 1.0;
  double xi = 0.0;
  for (int n = 1; n <= top; ++n) {
    weight(n) = weight(n - 1) * r.birth[n - 1] / r.death[n];
    xi += weight(n);
  }
  const double nu0 = 1.0 / (1.0 + xi);
  return nu0 * weight;
}

namespace {

// Newton refinement of a simple eigenpair (B v = lambda v) on the bordered
// system with normalisation sum(v) = sum(v_start).
void polish_eigenpair(const Matrix& B, Vector& v, double& lambda) {
  const Eigen::Index n = B.rows();
  const double target = v.sum();
  for (int it = 0; it < 4; ++it) {
    Matrix J = Matrix::Zero(n + 1, n + 1);
    J.topLeftCorner(n, n) = B - lambda * Matrix::Identity(n, n);
    J.topRightCorner(n, 1) = -v;
    J.bottomLeftCorner(1, n).setOnes();
    Vector F(n + 1);
    F.head(n) = B * v - lambda * v;
    F(n) = v.sum() - target;
    Vector step = J.fullPivLu().solve(-F);
    v += step.head(n);
    lambda += step(n);
  }
}

Vector perron_vector(const Matrix& B, double& lambda) {
  Eigen::EigenSolver<Matrix> es(B);
  const auto& values = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    if (values(k).real() > values(best).real()) best = k;
  }
  lambda = values(best).real();
  Vector v = es.eigenvectors().col(best).real();
  if (v.sum() < 0.0) v = -v;
  v *= static_cast<double>(v.size()) / v.sum();
  polish_eigenpair(B, v, lambda);
  return v;
}

}  // namespace

TiltedSolution tilted_exponent(const GeneratorMatrix& gen, const Vector& alpha, double q) {
  if (alpha.size() != gen.size()) throw std::invalid_argument("tilted_exponent: size mismatch");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("tilted_exponent: q must lie in (0,1]");
  require_irreducible(gen, "tilted_exponent");

  const Matrix B = gen.matrix() - q * Matrix(alpha.asDiagonal());
  TiltedSolution sol;
  sol.q = q;
  if (B.rows() == 1) {
    sol.eta = q * alpha(0);
    sol.psi = Vector::Ones(1);
    sol.phi = Vector::Ones(1);
    return sol;
  }

  double lambda = 0.0;
  Vector psi = perron_vector(B, lambda);
  double lambda_left = 0.0;
  Vector phi = perron_vector(B.transpose(), lambda_left);
  if ((psi.array() <= 0.0).any() || (phi.array() <= 0.0).any()) {
    throw std::runtime_error("tilted_exponent: Perron vector lost positivity");
  }
  sol.eta = -lambda;
  sol.psi = psi / psi.minCoeff();
  sol.phi = phi / phi.sum();
  sol.upper_constant = sol.psi.maxCoeff();
  sol.lower_constant = 1.0 / sol.upper_constant;
  return sol;
}

QOptimum optimize_q(const GeneratorMatrix& gen, const Vector& alpha) {
  const Vector nu = stationary_distribution(gen);
  QOptimum out;
  out.mean_alpha = nu.dot(alpha);
  if (!(out.mean_alpha > 1e-12)) {
    std::ostringstream msg;
    msg << "no positive tilted exponent: sum nu*alpha = " << out.mean_alpha << " <= 0";
    throw NotApplicable(msg.str());
  }

  auto eta = [&](double q) { return tilted_exponent(gen, alpha, q).eta; };

  constexpr int kGrid = 64;
  std::vector<double> values(kGrid + 1, 0.0);
  int best = 1;
  for (int k = 1; k <= kGrid; ++k) {
    values[k] = eta(static_cast<double>(k) / kGrid);
    if (values[k] > values[best]) best = k;
  }

  // eta is concave in q, so golden-section on the bracketing cells is valid.
  double lo = std::max(static_cast<double>(best - 1) / kGrid, 1e-9);
  double hi = std::min(static_cast<double>(best + 1) / kGrid, 1.0);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double fa = eta(a), fb = eta(b);
  while (hi - lo > 1e-6) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + inv_phi * (hi - lo);
      fb = eta(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - inv_phi * (hi - lo);
      fa = eta(a);
    }
  }

  out.q = static_cast<double>(best) / kGrid;
  out.eta = values[best];
  const double mid = 0.5 * (lo + hi);
  const double fmid = eta(mid);
  if (fmid > out.eta) {
    out.q = mid;
    out.eta = fmid;
  }
  return out;
}

Vector best_alpha(const Vector& rho, const std::vector<std::vector<int>>& partition) {
  const int blocks = static_cast<int>(partition.size());
  Vector alpha(blocks);
  for (int n = 0; n < blocks; ++n) {
    if (partition[n].empty()) throw std::invalid_argument("best_alpha: empty block");
    double inf = std::numeric_limits<double>::infinity();
    for (int i : partition[n]) {
      if (i < 0 || i >= rho.size()) throw std::invalid_argument("best_alpha: index out of range");
      inf = std::min(inf, rho(i));
    }
    alpha(n) = inf;
  }
  for (int n = blocks - 2; n >= 0; --n) alpha(n) = std::min(alpha(n), alpha(n + 1));
  return alpha;
}

}  // namespace switching
