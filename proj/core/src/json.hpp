#ifndef SWITCHING_SRC_JSON_HPP_
#define SWITCHING_SRC_JSON_HPP_

#ifdef SWITCHING_VENDORED_JSON
#include "json.hpp"
#else
#include <nlohmann/json.hpp>
#endif

#include "switching/types.hpp"

namespace switching::detail {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

template <typename J>
J to_json_vector(const Vector& v) {
  J out = J::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

template <typename J>
J to_json_matrix(const Matrix& m) {
  J out = J::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    J row = J::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace switching::detail

#endif  // SWITCHING_SRC_JSON_HPP_
