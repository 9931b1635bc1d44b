#ifndef SWITCHING_CHAIN_HPP_
#define SWITCHING_CHAIN_HPP_

#include "switching/types.hpp"

#include <vector>

namespace switching {

// Generator of a continuous-time Markov chain on a finite set: non-negative
// off-diagonal entries, rows summing to zero.
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;
  // Validates; throws std::invalid_argument when Q is not a generator.
  explicit GeneratorMatrix(Matrix Q);

  // Off-diagonal rates -> generator (diagonal is overwritten).
  static GeneratorMatrix from_rates(const Matrix& rates);

  const Matrix& matrix() const { return Q_; }
  int size() const { return static_cast<int>(Q_.rows()); }

 private:
  Matrix Q_;
};

// b(n) for 0 <= n < top, d(n) for 1 <= n <= top. d(0) is implicitly zero.
struct BirthDeathRates {
  std::vector<double> birth;  // size top
  std::vector<double> death;  // size top + 1, death[0] == 0

  int top() const { return static_cast<int>(birth.size()); }
};

GeneratorMatrix birth_death_generator(const BirthDeathRates& r);

struct IrreducibilityReport {
  bool irreducible = false;
  // Strongly connected components in reverse topological order.
  std::vector<std::vector<int>> components;
};

// Strong connectivity of the graph with an edge i->j iff a(i,j) > 0.
IrreducibilityReport irreducibility(const Matrix& rates);

// Unique nu with nu Q = 0, sum nu = 1. Throws NotApplicable if Q is reducible.
Vector stationary_distribution(const GeneratorMatrix& Q);

// Product formula nu(n) = nu(0) prod_{k<=n} b(k-1)/d(k), nu(0) = 1/(1+Xi).
Vector birth_death_nu(const BirthDeathRates& r);

struct TiltedSolution {
  double eta = 0.0;
  Vector psi;      // right Perron vector, min entry 1
  Vector phi;      // left Perron vector, entries sum to 1
  double q = 0.0;
  double upper_constant = 1.0;  // max psi / min psi
  double lower_constant = 1.0;  // its reciprocal
};

// Perron eigenpair of Q - q diag(alpha):
//   (Q - q diag(alpha)) psi = -eta psi,  psi > 0.
// Throws NotApplicable for reducible Q and std::invalid_argument for q
// outside (0,1] or mismatched sizes.
TiltedSolution tilted_exponent(const GeneratorMatrix& Q, const Vector& alpha, double q);

struct QOptimum {
  double q = 0.0;
  double eta = 0.0;
  double mean_alpha = 0.0;  // sum nu alpha
};

// argmax_{q in (0,1]} eta(q): 64-point grid then golden-section to 1e-6.
// Throws NotApplicable when sum nu alpha <= 0.
QOptimum optimize_q(const GeneratorMatrix& Q, const Vector& alpha);

// Maximal non-decreasing minorant of the block infima of rho.
Vector best_alpha(const Vector& rho, const std::vector<std::vector<int>>& partition);

}  // namespace switching

#endif  // SWITCHING_CHAIN_HPP_
