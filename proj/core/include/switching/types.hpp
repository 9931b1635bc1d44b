#ifndef SWITCHING_TYPES_HPP_
#define SWITCHING_TYPES_HPP_

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace switching {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Index into the finite regime set F.
struct RegimeId {
  int index = 0;

  constexpr RegimeId() = default;
  constexpr explicit RegimeId(int i) : index(i) {}

  friend constexpr auto operator<=>(RegimeId, RegimeId) = default;
};

// A (master seed, stream) pair. Distinct pairs give independent streams and
// the same pair reproduces the same draws.
struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

// Malformed or inconsistent model description.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A criterion or construction whose preconditions do not hold for the
// supplied model (e.g. state-dependent rates passed to a constant-rate check).
class NotApplicable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input outside the supported size or value range of an algorithm.
class LimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace switching

#endif  // SWITCHING_TYPES_HPP_
