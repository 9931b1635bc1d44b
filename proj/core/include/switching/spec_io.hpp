#ifndef SWITCHING_SPEC_IO_HPP_
#define SWITCHING_SPEC_IO_HPP_

#include "switching/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace switching {

// JSON model files. Matrices are arrays of rows, vectors plain arrays.
//
// {
//   "name": "...", "dim": d, "labels": [...],
//   "regimes": [{"type": "affine", "A": [[...]], "c": [...]},
//               {"type": "ou", "A": ..., "c": ..., "sigma": [[...]]}],
//   "rates": {"type": "constant", "c": [[...]]}
//          | {"type": "sigmoid", "base": ..., "amplitude": ..., "w": [...], "b": 0},
//   "metric": {"M": [[...]], "q": 0.5, "x0": [...], "trunc": true},
//   "rho": [...], "partition": [[...], ...], "regime_metrics": [[[...]]]
// }
//
// Parsing runs check_spec; all failures surface as SpecError.
SwitchingSpec parse_spec(std::string_view json_text);
SwitchingSpec load_spec(const std::filesystem::path& path);

std::string spec_to_json(const SwitchingSpec& spec, int indent = 2);

}  // namespace switching

#endif  // SWITCHING_SPEC_IO_HPP_
