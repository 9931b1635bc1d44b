#include "switching/spec_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace switching {

namespace {

using detail::json;
using detail::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SpecError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

Vector vector_of(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = number(v[k], where + "[" + std::to_string(k) + "]");
  }
  return out;
}

Matrix matrix_of(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array()) fail(where, "expected an array of rows");
  const std::size_t cols = v[0].size();
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) fail(rw, "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(v[r][c], rw + "[" + std::to_string(c) + "]");
    }
  }
  return out;
}

RegimeDynamics regime_of(const json& v, int dim, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  const std::string type = v.value("type", std::string("affine"));
  Matrix A = matrix_of(field(v, "A", where), where + ".A");
  Vector c = v.contains("c") ? vector_of(v["c"], where + ".c") : Vector::Zero(dim);
  if (type == "affine") return AffineFlow{std::move(A), std::move(c)};
  if (type == "ou") {
    Matrix sigma = matrix_of(field(v, "sigma", where), where + ".sigma");
    return OrnsteinUhlenbeck{std::move(A), std::move(c), std::move(sigma)};
  }
  fail(where + ".type", "unknown regime type '" + type + "'");
}

RateModel rates_of(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  const std::string type = v.value("type", std::string("constant"));
  if (type == "constant") return ConstantRates{matrix_of(field(v, "c", where), where + ".c")};
  if (type == "sigmoid") {
    SigmoidRates s;
    s.base = matrix_of(field(v, "base", where), where + ".base");
    s.amplitude = matrix_of(field(v, "amplitude", where), where + ".amplitude");
    s.w = vector_of(field(v, "w", where), where + ".w");
    s.b = v.contains("b") ? number(v["b"], where + ".b") : 0.0;
    return s;
  }
  fail(where + ".type", "unknown rate model '" + type + "'");
}

SwitchingSpec spec_of(const json& root) {
  if (!root.is_object()) fail("spec", "top level must be an object");
  SwitchingSpec spec;
  spec.name = root.value("name", std::string());
  const json& dim = field(root, "dim", "spec");
  if (!dim.is_number_integer() || dim.get<long long>() < 1) fail("dim", "expected a positive integer");
  spec.dim = dim.get<int>();

  const json& regimes = field(root, "regimes", "spec");
  if (!regimes.is_array() || regimes.empty()) fail("regimes", "expected a non-empty array");
  for (std::size_t k = 0; k < regimes.size(); ++k) {
    spec.regimes.push_back(regime_of(regimes[k], spec.dim, "regimes[" + std::to_string(k) + "]"));
  }

  if (root.contains("labels")) {
    const json& labels = root["labels"];
    if (!labels.is_array()) fail("labels", "expected an array");
    for (const auto& l : labels) {
      if (l.is_string()) {
        spec.labels.push_back(l.get<std::string>());
      } else if (l.is_number()) {
        spec.labels.push_back(l.dump());
      } else {
        fail("labels", "expected strings");
      }
    }
  }

  spec.rates = rates_of(field(root, "rates", "spec"), "rates");

  if (root.contains("metric")) {
    const json& m = root["metric"];
    if (!m.is_object()) fail("metric", "expected an object");
    spec.metric.M = m.contains("M") ? matrix_of(m["M"], "metric.M")
                                    : Matrix::Identity(spec.dim, spec.dim);
    spec.metric.q = m.contains("q") ? number(m["q"], "metric.q") : 1.0;
    spec.metric.x0 = m.contains("x0") ? vector_of(m["x0"], "metric.x0") : Vector::Zero(spec.dim);
    if (m.contains("trunc")) {
      if (!m["trunc"].is_boolean()) fail("metric.trunc", "expected a boolean");
      spec.metric.trunc = m["trunc"].get<bool>();
    }
  } else {
    spec.metric.M = Matrix::Identity(spec.dim, spec.dim);
    spec.metric.x0 = Vector::Zero(spec.dim);
  }

  if (root.contains("rho") && !root["rho"].is_null()) spec.rho = vector_of(root["rho"], "rho");

  if (root.contains("partition") && !root["partition"].is_null()) {
    const json& p = root["partition"];
    if (!p.is_array()) fail("partition", "expected an array of blocks");
    std::vector<std::vector<int>> blocks;
    for (std::size_t b = 0; b < p.size(); ++b) {
      const std::string where = "partition[" + std::to_string(b) + "]";
      if (!p[b].is_array()) fail(where, "expected an array of regime indices");
      std::vector<int> block;
      for (const auto& e : p[b]) {
        if (!e.is_number_integer()) fail(where, "expected integer regime indices");
        block.push_back(e.get<int>());
      }
      blocks.push_back(std::move(block));
    }
    spec.partition = std::move(blocks);
  }

  if (root.contains("regime_metrics") && !root["regime_metrics"].is_null()) {
    const json& rm = root["regime_metrics"];
    if (!rm.is_array()) fail("regime_metrics", "expected an array of matrices");
    for (std::size_t k = 0; k < rm.size(); ++k) {
      spec.regime_metrics.push_back(matrix_of(rm[k], "regime_metrics[" + std::to_string(k) + "]"));
    }
  }

  check_spec(spec);
  return spec;
}

}  // namespace

SwitchingSpec parse_spec(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return spec_of(root);
  } catch (const json::exception& e) {
    throw SpecError(std::string("invalid spec: ") + e.what());
  }
}

SwitchingSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open spec file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

std::string spec_to_json(const SwitchingSpec& spec, int indent) {
  using detail::to_json_matrix;
  using detail::to_json_vector;
  ordered_json root;
  root["name"] = spec.name;
  root["dim"] = spec.dim;
  if (!spec.labels.empty()) root["labels"] = spec.labels;

  ordered_json regimes = ordered_json::array();
  for (const auto& r : spec.regimes) {
    ordered_json reg;
    if (const auto* ou = std::get_if<OrnsteinUhlenbeck>(&r)) {
      reg["type"] = "ou";
      reg["A"] = to_json_matrix<ordered_json>(ou->A);
      reg["c"] = to_json_vector<ordered_json>(ou->c);
      reg["sigma"] = to_json_matrix<ordered_json>(ou->sigma);
    } else {
      const auto& af = std::get<AffineFlow>(r);
      reg["type"] = "affine";
      reg["A"] = to_json_matrix<ordered_json>(af.A);
      reg["c"] = to_json_vector<ordered_json>(af.c);
    }
    regimes.push_back(std::move(reg));
  }
  root["regimes"] = std::move(regimes);

  ordered_json rates;
  if (const auto* cr = std::get_if<ConstantRates>(&spec.rates)) {
    rates["type"] = "constant";
    rates["c"] = to_json_matrix<ordered_json>(cr->c);
  } else {
    const auto& s = std::get<SigmoidRates>(spec.rates);
    rates["type"] = "sigmoid";
    rates["base"] = to_json_matrix<ordered_json>(s.base);
    rates["amplitude"] = to_json_matrix<ordered_json>(s.amplitude);
    rates["w"] = to_json_vector<ordered_json>(s.w);
    rates["b"] = s.b;
  }
  root["rates"] = std::move(rates);

  ordered_json metric;
  metric["M"] = to_json_matrix<ordered_json>(spec.metric.M);
  metric["q"] = spec.metric.q;
  metric["x0"] = to_json_vector<ordered_json>(spec.metric.x0);
  metric["trunc"] = spec.metric.trunc;
  root["metric"] = std::move(metric);

  if (spec.rho) root["rho"] = to_json_vector<ordered_json>(*spec.rho);
  if (spec.partition) root["partition"] = *spec.partition;
  if (!spec.regime_metrics.empty()) {
    ordered_json rm = ordered_json::array();
    for (const auto& m : spec.regime_metrics) rm.push_back(to_json_matrix<ordered_json>(m));
    root["regime_metrics"] = std::move(rm);
  }
  return root.dump(indent) + "\n";
}

}  // namespace switching
