#ifndef SWITCHCERT_EXAMPLES_HPP_
#define SWITCHCERT_EXAMPLES_HPP_

#include "switching/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace switchcert {

struct ExampleParams {
  std::optional<double> a1;   // rate out of the regime labelled "1"
  std::optional<double> am1;  // rate out of the regime labelled "-1"
  std::optional<double> rate; // replaces every nonzero off-diagonal rate
};

std::vector<std::string> example_tags();

// Throws std::invalid_argument for an unknown tag.
switching::SwitchingSpec make_example(const std::string& tag, const ExampleParams& params = {});

// Applies rate overrides to a constant-rate spec. Throws SpecError when the
// spec has no matching labels or state-dependent rates.
void apply_overrides(switching::SwitchingSpec& spec, const ExampleParams& params);

}  // namespace switchcert

#endif  // SWITCHCERT_EXAMPLES_HPP_
