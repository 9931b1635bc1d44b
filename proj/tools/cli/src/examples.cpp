#include "switchcert/examples.hpp"

#include <algorithm>
#include <stdexcept>

namespace switchcert {

using switching::AffineFlow;
using switching::ConstantRates;
using switching::Matrix;
using switching::SpecError;
using switching::SwitchingSpec;
using switching::Vector;

namespace {

SwitchingSpec base(std::string name, int dim) {
  SwitchingSpec s;
  s.name = std::move(name);
  s.dim = dim;
  s.metric.M = Matrix::Identity(dim, dim);
  s.metric.q = 1.0;
  s.metric.x0 = Vector::Zero(dim);
  s.metric.trunc = true;
  return s;
}

SwitchingSpec intro_plane() {
  SwitchingSpec s = base("intro-plane", 2);
  s.labels = {"-1", "1"};
  for (double i : {-1.0, 1.0}) {
    Vector c(2);
    c << i, 0.0;
    s.regimes.emplace_back(AffineFlow{-Matrix::Identity(2, 2), c});
  }
  Matrix r(2, 2);
  r << 0, 1, 1, 0;
  s.rates = ConstantRates{r};
  return s;
}

SwitchingSpec elementary() {
  SwitchingSpec s = base("elementary", 1);
  s.labels = {"-1", "1"};
  s.regimes.emplace_back(AffineFlow{Matrix::Constant(1, 1, -1.0), Vector::Zero(1)});
  s.regimes.emplace_back(AffineFlow{Matrix::Constant(1, 1, 1.0), Vector::Zero(1)});
  Matrix r(2, 2);
  r << 0, 1, 2, 0;
  s.rates = ConstantRates{r};
  return s;
}

SwitchingSpec dilation_chain() {
  SwitchingSpec s = base("dilation-chain", 1);
  s.labels = {"0", "1", "2"};
  for (double a : {1.5, 0.5, -1.0}) {
    s.regimes.emplace_back(AffineFlow{Matrix::Constant(1, 1, -a), Vector::Zero(1)});
  }
  Matrix r(3, 3);
  r << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  s.rates = ConstantRates{r};
  s.partition = std::vector<std::vector<int>>{{2}, {1}, {0}};
  return s;
}

SwitchingSpec spiral() {
  SwitchingSpec s = base("spiral", 2);
  s.labels = {"0", "1"};
  Matrix A0(2, 2), A1(2, 2);
  A0 << -1, 3, -1.0 / 3.0, -1;
  A1 << -1, -1.0 / 3.0, 3, -1;
  s.regimes.emplace_back(AffineFlow{A0, Vector::Zero(2)});
  s.regimes.emplace_back(AffineFlow{A1, Vector::Zero(2)});
  Matrix r(2, 2);
  r << 0, 1, 1, 0;
  s.rates = ConstantRates{r};
  Matrix M0 = Matrix::Zero(2, 2), M1 = Matrix::Zero(2, 2);
  M0.diagonal() << 1.0 / 9.0, 1.0;
  M1.diagonal() << 1.0, 1.0 / 9.0;
  s.regime_metrics = {M0, M1};
  return s;
}

int find_label(const SwitchingSpec& spec, const std::string& label) {
  auto it = std::find(spec.labels.begin(), spec.labels.end(), label);
  if (it == spec.labels.end()) throw SpecError("no regime labelled " + label);
  return static_cast<int>(it - spec.labels.begin());
}

void set_exit_rate(Matrix& c, int i, double value) {
  int nonzero = 0;
  for (Eigen::Index j = 0; j < c.cols(); ++j) nonzero += (j != i && c(i, j) != 0.0);
  if (c.cols() == 2) {
    c(i, 1 - i) = value;
  } else if (nonzero == 1) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (j != i && c(i, j) != 0.0) c(i, j) = value;
    }
  } else {
    throw SpecError("exit-rate override needs a single target regime");
  }
}

}  // namespace

std::vector<std::string> example_tags() {
  return {"intro-plane", "elementary", "dilation-chain", "spiral"};
}

void apply_overrides(SwitchingSpec& spec, const ExampleParams& p) {
  if (!p.a1 && !p.am1 && !p.rate) return;
  auto* rates = std::get_if<ConstantRates>(&spec.rates);
  if (!rates) throw SpecError("rate overrides need constant rates");
  Matrix& c = rates->c;
  if (p.rate) {
    if (!(*p.rate >= 0.0)) throw SpecError("--rate must be >= 0");
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        if (i != j && c(i, j) != 0.0) c(i, j) = *p.rate;
      }
    }
  }
  if (p.a1) {
    if (!(*p.a1 >= 0.0)) throw SpecError("--a1 must be >= 0");
    set_exit_rate(c, find_label(spec, "1"), *p.a1);
  }
  if (p.am1) {
    if (!(*p.am1 >= 0.0)) throw SpecError("--am1 must be >= 0");
    set_exit_rate(c, find_label(spec, "-1"), *p.am1);
  }
  switching::check_spec(spec);
}

SwitchingSpec make_example(const std::string& tag, const ExampleParams& params) {
  SwitchingSpec s;
  if (tag == "intro-plane") {
    s = intro_plane();
  } else if (tag == "elementary") {
    s = elementary();
  } else if (tag == "dilation-chain") {
    s = dilation_chain();
  } else if (tag == "spiral") {
    s = spiral();
  } else {
    throw std::invalid_argument("unknown example '" + tag + "'");
  }
  apply_overrides(s, params);
  switching::check_spec(s);
  return s;
}

}  // namespace switchcert
