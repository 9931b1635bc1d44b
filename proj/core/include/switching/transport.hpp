#ifndef SWITCHING_TRANSPORT_HPP_
#define SWITCHING_TRANSPORT_HPP_

#include "switching/model.hpp"

#include <span>
#include <variant>
#include <vector>

namespace switching {

// Weighted atoms (x_k, i_k) on E x F.
struct EmpiricalMeasure {
  std::vector<Vector> points;
  std::vector<int> regimes;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  // Throws std::invalid_argument unless sizes agree, weights are >= 0 and
  // sum to 1 within 1e-12, and all points share one dimension.
  void validate() const;
  bool uniform() const;

  static EmpiricalMeasure uniform_cloud(std::vector<Vector> points, std::vector<int> regimes);
  // Scalar samples, all in regime 0.
  static EmpiricalMeasure from_scalars(std::span<const double> xs);
};

// d^q(x, y) + 1_{i != j}.
struct PowerMetric {
  double q = 1.0;
};
// 1_{i != j} + 1_{i = j} (1 ^ d^q).
struct TruncatedD {
  double q = 1.0;
};
// sqrt((1_{i != j} + 1_{i = j} (d^q / delta ^ 1)) (1 + d^q(x, x0) + d^q(y, x0))).
// Not a metric (no triangle inequality).
struct WeightedTilde {
  double q = 1.0;
  double delta = 1.0;
  Vector x0;
};

using TransportCost = std::variant<PowerMetric, TruncatedD, WeightedTilde>;

double eval_cost(const TransportCost& cost, const QuadraticMetric& metric, const Vector& x, int i,
                 const Vector& y, int j);

Matrix cost_matrix(const TransportCost& cost, const QuadraticMetric& metric,
                   const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

enum class OtMethod { Auto, Assignment, Transportation };

struct OtResult {
  double value = 0.0;
  Matrix plan;                  // mu.size() x nu.size(), marginals mu.weights / nu.weights
  std::vector<int> assignment;  // assignment form only: atom k of mu -> assignment[k]
  double dual_value = 0.0;      // value of the certifying dual solution
  OtMethod method = OtMethod::Auto;
};

// Exact discrete optimal transport. Auto picks the assignment solver for
// equal-size uniform measures (n <= 512) and the transportation solver for
// general weights (n, m <= 128). Throws LimitError beyond those sizes.
OtResult ot_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                  const TransportCost& cost, const QuadraticMetric& metric,
                  OtMethod method = OtMethod::Auto);

// Same problem on a precomputed cost matrix.
OtResult ot_exact(const Matrix& cost, std::span<const double> mu_weights,
                  std::span<const double> nu_weights, OtMethod method = OtMethod::Auto);

// Minimum-cost perfect matching on a square matrix; returns row -> column.
// Also returns potentials u, v with u_i + v_j <= C_ij, tight on the matching.
struct AssignmentResult {
  std::vector<int> row_to_col;
  double cost = 0.0;
  Vector u, v;
};
AssignmentResult solve_assignment(const Matrix& cost);

// W1 between equal-size scalar samples: mean |a_(k) - b_(k)| over order
// statistics.
double w1_sorted_1d(std::vector<double> a, std::vector<double> b);
// Measure form; requires dim 1, uniform weights, equal sizes and a single
// common regime.
double w1_sorted_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

}  // namespace switching

#endif  // SWITCHING_TRANSPORT_HPP_
