#include "switching/certify.hpp"

#include "json.hpp"

#include <cstdio>
#include <sstream>

namespace switching {

using detail::ordered_json;
using detail::to_json_matrix;
using detail::to_json_vector;

namespace {

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? number(*v) : ordered_json(nullptr);
}

ordered_json certificate_json(const Certificate& c) {
  ordered_json j;
  j["tag"] = c.tag;
  j["verdict"] = verdict_name(c.verdict);
  j["value"] = number(c.value);
  j["note"] = c.note;
  j["nu"] = to_json_vector<ordered_json>(c.nu);
  j["curvature"] = to_json_vector<ordered_json>(c.curvature);
  j["rho0"] = optional_number(c.rho0);
  j["rho1"] = optional_number(c.rho1);
  j["a0"] = optional_number(c.a0);
  j["a1"] = optional_number(c.a1);
  j["birth"] = c.birth;
  j["death"] = c.death;
  j["alpha"] = to_json_vector<ordered_json>(c.alpha);
  j["q_star"] = optional_number(c.q_star);
  j["eta_star"] = optional_number(c.eta_star);
  j["upper_constant"] = optional_number(c.upper_constant);
  j["lower_constant"] = optional_number(c.lower_constant);
  j["expansion"] = optional_number(c.expansion);
  ordered_json as = ordered_json::array();
  for (const auto& a : c.assumptions) {
    ordered_json e;
    e["id"] = a.id;
    e["name"] = a.name;
    e["pass"] = a.pass;
    e["witness"] = a.witness;
    as.push_back(std::move(e));
  }
  j["assumptions"] = std::move(as);
  return j;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_vector(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) s += (k ? ", " : "") + fmt(v(k));
  return s + "]";
}

}  // namespace

std::string certificates_to_json(const CertificateReport& r, int indent) {
  ordered_json root;
  root["name"] = r.name;
  root["pass"] = r.any_pass();

  ordered_json v;
  v["a_bar"] = number(r.validation.a_bar);
  v["kappa"] = number(r.validation.kappa);
  v["irreducible"] = r.validation.irreducible;
  v["constant_rates"] = r.validation.constant_rates;
  v["components"] = r.validation.components;
  root["validation"] = std::move(v);

  ordered_json c;
  c["rho"] = to_json_vector<ordered_json>(r.curvature.rho);
  c["source"] = r.curvature.source;
  root["curvature"] = std::move(c);

  ordered_json certs = ordered_json::array();
  for (const auto& cert : r.certificates) certs.push_back(certificate_json(cert));
  root["certificates"] = std::move(certs);

  if (r.hormander) {
    ordered_json h;
    h["rank"] = r.hormander->rank;
    h["fields"] = r.hormander->fields;
    h["generations"] = r.hormander->generations;
    root["hormander"] = std::move(h);
  } else {
    root["hormander"] = nullptr;
  }
  root["elliptic"] = r.elliptic;

  if (r.regime_metrics) {
    ordered_json m;
    m["curvature"] = to_json_matrix<ordered_json>(r.regime_metrics->curvature);
    m["growth"] = to_json_matrix<ordered_json>(r.regime_metrics->growth);
    root["regime_metrics"] = std::move(m);
  } else {
    root["regime_metrics"] = nullptr;
  }
  root["diagnostics"] = r.diagnostics;
  return root.dump(indent) + "\n";
}

std::string certificates_to_text(const CertificateReport& r) {
  std::ostringstream os;
  os << "spec: " << (r.name.empty() ? "(unnamed)" : r.name) << '\n';
  os << "a_bar " << fmt(r.validation.a_bar) << "  kappa " << fmt(r.validation.kappa)
     << "  irreducible " << (r.validation.irreducible ? "yes" : "no") << '\n';
  os << "rho " << fmt_vector(r.curvature.rho) << '\n';
  for (const auto& c : r.certificates) {
    os << c.tag << ": " << verdict_name(c.verdict);
    if (std::isfinite(c.value)) os << "  value " << fmt(c.value);
    if (c.q_star) os << "  q* " << fmt(*c.q_star);
    if (c.eta_star) os << "  eta* " << fmt(*c.eta_star);
    os << '\n';
    if (!c.note.empty()) os << "  note: " << c.note << '\n';
    for (const auto& a : c.assumptions) {
      os << "  [" << (a.pass ? "ok" : "--") << "] " << a.id << " " << a.name << ": " << a.witness << '\n';
    }
  }
  if (r.hormander) os << "bracket rank " << r.hormander->rank << '\n';
  if (r.regime_metrics) {
    const auto& m = *r.regime_metrics;
    for (Eigen::Index i = 0; i < m.curvature.rows(); ++i) {
      os << "regime " << i << " curvature per metric " << fmt_vector(m.curvature.row(i).transpose())
         << "  growth " << fmt_vector(m.growth.row(i).transpose()) << '\n';
    }
  }
  for (const auto& d : r.diagnostics) os << "diagnostic: " << d << '\n';
  os << (r.any_pass() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace switching
