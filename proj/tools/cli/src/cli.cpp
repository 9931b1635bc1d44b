#include "switchcert/cli.hpp"

#include "switchcert/examples.hpp"

#include "switching/certify.hpp"
#include "switching/coupling.hpp"
#include "switching/csv.hpp"
#include "switching/parallel.hpp"
#include "switching/sim.hpp"
#include "switching/spec_io.hpp"
#include "switching/transport.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace switchcert {

using namespace switching;
using ordered_json = nlohmann::ordered_json;

namespace {

struct SpecSource {
  std::string file;
  std::string example;
  double a1 = 0, am1 = 0, rate = 0;
  CLI::Option* a1_opt = nullptr;
  CLI::Option* am1_opt = nullptr;
  CLI::Option* rate_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("spec", file, "Spec file (JSON)");
    app->add_option("--example", example, "Built-in example instead of a file");
    a1_opt = app->add_option("--a1", a1, "Exit rate of the regime labelled 1");
    am1_opt = app->add_option("--am1", am1, "Exit rate of the regime labelled -1");
    rate_opt = app->add_option("--rate", rate, "Replace every nonzero switching rate");
  }

  ExampleParams params() const {
    ExampleParams p;
    if (a1_opt && a1_opt->count()) p.a1 = a1;
    if (am1_opt && am1_opt->count()) p.am1 = am1;
    if (rate_opt && rate_opt->count()) p.rate = rate;
    return p;
  }

  SwitchingSpec load() const {
    if (!file.empty() && !example.empty()) throw SpecError("give either a spec file or --example");
    SwitchingSpec spec;
    if (!example.empty()) {
      try {
        spec = make_example(example, {});
      } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
      }
    } else if (!file.empty()) {
      spec = load_spec(file);
    } else {
      throw SpecError("no spec given (file or --example)");
    }
    apply_overrides(spec, params());
    return spec;
  }
};

struct Grid {
  std::string text;
  CLI::Option* opt = nullptr;

  std::vector<double> resolve(double T, int default_steps) const {
    double start = 0.0, end = T;
    long steps = default_steps;
    if (opt && opt->count()) {
      const auto a = text.find(':');
      const auto b = a == std::string::npos ? a : text.find(':', a + 1);
      if (b == std::string::npos) throw std::invalid_argument("--grid expects start:end:steps");
      try {
        start = std::stod(text.substr(0, a));
        end = std::stod(text.substr(a + 1, b - a - 1));
        steps = std::stol(text.substr(b + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("--grid expects start:end:steps");
      }
    }
    if (!(start >= 0.0) || !(end > start) || steps < 1 || !std::isfinite(end)) {
      throw std::invalid_argument("--grid needs 0 <= start < end and steps >= 1");
    }
    std::vector<double> g(static_cast<std::size_t>(steps) + 1);
    for (long k = 0; k <= steps; ++k) g[k] = start + (end - start) * k / steps;
    g.back() = end;
    return g;
  }
};

Vector parse_point(const std::string& text, int dim, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" + cell + "'");
    }
  }
  if (static_cast<int>(v.size()) != dim) {
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(dim) +
                                " comma-separated values");
  }
  return Eigen::Map<Vector>(v.data(), dim);
}

Vector unit(int dim, double scale) {
  Vector v = Vector::Zero(dim);
  v(0) = scale;
  return v;
}

ordered_json to_json(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr));
  return a;
}

ordered_json to_json(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::invalid_argument("cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

RegimeId check_regime(const SwitchingSpec& spec, int i, const char* what) {
  if (i < 0 || i >= spec.num_regimes()) {
    throw std::invalid_argument(std::string(what) + " out of range");
  }
  return RegimeId(i);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certificates and simulation for regime-switching Markov processes", "switchcert"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int jobs = 1;
  std::string output;

  auto add_common = [&](CLI::App* sub, bool random) {
    sub->add_option("-o,--output", output, "Write the result to a file");
    if (random) {
      sub->add_option("--seed", seed, "Master seed");
      sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    }
  };

  // example
  auto* ex = app.add_subcommand("example", "Emit a built-in spec as JSON");
  std::string ex_tag;
  SpecSource ex_src;
  ex->add_option("tag", ex_tag, "intro-plane | elementary | dilation-chain | spiral")->required();
  ex_src.a1_opt = ex->add_option("--a1", ex_src.a1, "Exit rate of the regime labelled 1");
  ex_src.am1_opt = ex->add_option("--am1", ex_src.am1, "Exit rate of the regime labelled -1");
  ex_src.rate_opt = ex->add_option("--rate", ex_src.rate, "Replace every nonzero switching rate");
  add_common(ex, false);

  // certify
  auto* cert = app.add_subcommand("certify", "Validate a spec and run every criterion");
  SpecSource cert_src;
  cert_src.attach(cert);
  std::string cert_format = "json";
  cert->add_option("--format", cert_format, "json | text")->check(CLI::IsMember({"json", "text"}));
  add_common(cert, false);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate paths or estimate an expectation");
  SpecSource sim_src;
  sim_src.attach(sim);
  double sim_T = 10.0;
  std::size_t sim_paths = 1;
  Grid sim_grid;
  double sim_r = 0.0;
  std::string sim_x, sim_observable, sim_format = "csv";
  int sim_i = 0;
  bool sim_final = false;
  sim->add_option("--T", sim_T, "Time horizon")->check(CLI::PositiveNumber);
  sim->add_option("--paths", sim_paths, "Number of paths")->check(CLI::PositiveNumber);
  sim_grid.opt = sim->add_option("--grid", sim_grid.text, "start:end:steps");
  auto* sim_r_opt = sim->add_option("--r", sim_r, "Uniformization rate");
  sim->add_option("--x0", sim_x, "Initial point, comma separated");
  sim->add_option("--i0", sim_i, "Initial regime index");
  sim->add_flag("--final", sim_final, "Only the state at time T of each path");
  sim->add_option("--observable", sim_observable,
                  "Estimate E f(X_t, I_t): one, norm, lognorm, norm2, x:k, regime:k, vq:q");
  sim->add_option("--format", sim_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  add_common(sim, true);

  // couple
  auto* cpl = app.add_subcommand("couple", "Coupled copies and Wasserstein decay curves");
  SpecSource cpl_src;
  cpl_src.attach(cpl);
  std::string cpl_mode = "constant", cpl_x, cpl_y, cpl_format = "csv";
  double cpl_T = 20.0, cpl_q = 0.0, cpl_r = 0.0, cpl_delta = 0.5;
  std::size_t cpl_paths = 1000;
  Grid cpl_grid;
  int cpl_i = 0, cpl_j = -1, cpl_l0 = 0;
  bool cpl_trace = false;
  cpl->add_option("--mode", cpl_mode, "constant | uniformized | dominating")
      ->check(CLI::IsMember({"constant", "uniformized", "dominating"}));
  auto* cpl_q_opt = cpl->add_option("--q", cpl_q, "Exponent q in (0,1]");
  cpl->add_option("--T", cpl_T, "Horizon when --grid is absent")->check(CLI::PositiveNumber);
  cpl_grid.opt = cpl->add_option("--grid", cpl_grid.text, "start:end:steps");
  cpl->add_option("--paths", cpl_paths, "Number of coupled pairs")->check(CLI::PositiveNumber);
  auto* cpl_r_opt = cpl->add_option("--r", cpl_r, "Poisson intensity");
  cpl->add_option("--delta", cpl_delta, "delta of the contracting distance")
      ->check(CLI::PositiveNumber);
  cpl->add_option("--x", cpl_x, "First initial point");
  cpl->add_option("--y", cpl_y, "Second initial point");
  cpl->add_option("--i", cpl_i, "First initial regime");
  cpl->add_option("--j", cpl_j, "Second initial regime (default: last)");
  cpl->add_option("--l0", cpl_l0, "Initial level of the dominating chain");
  cpl->add_flag("--trace", cpl_trace, "Emit the first coupled run instead of a curve");
  cpl->add_option("--format", cpl_format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  add_common(cpl, true);

  // wasserstein
  auto* ws = app.add_subcommand("wasserstein", "Exact transport cost between two sample CSVs");
  std::string ws_a, ws_b, ws_cost = "trunc-d", ws_method = "auto", ws_plan, ws_format = "text";
  SpecSource ws_src;
  double ws_q = 1.0, ws_delta = 1.0;
  ws->add_option("a", ws_a, "First sample CSV")->required();
  ws->add_option("b", ws_b, "Second sample CSV")->required();
  ws->add_option("--cost", ws_cost, "power | trunc-d | tilde")
      ->check(CLI::IsMember({"power", "trunc-d", "tilde"}));
  ws->add_option("--q", ws_q, "Exponent q in (0,1]");
  ws->add_option("--delta", ws_delta, "delta of the tilde cost")->check(CLI::PositiveNumber);
  ws->add_option("--spec", ws_src.file, "Spec file supplying the metric");
  ws->add_option("--example", ws_src.example, "Built-in example supplying the metric");
  ws->add_option("--method", ws_method, "auto | assignment | transportation")
      ->check(CLI::IsMember({"auto", "assignment", "transportation"}));
  ws->add_option("--plan", ws_plan, "Also write the optimal plan as CSV");
  ws->add_option("--format", ws_format, "text | json")->check(CLI::IsMember({"text", "json"}));
  add_common(ws, false);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "switchcert: " << e.what() << '\n';
    return kBadInput;
  }

  try {
    if (ex->parsed()) {
      const SwitchingSpec spec = make_example(ex_tag, ex_src.params());
      Sink sink(output, out);
      *sink << spec_to_json(spec);
      return kOk;
    }

    if (cert->parsed()) {
      const SwitchingSpec spec = cert_src.load();
      const CertificateReport report = certify_all(spec);
      Sink sink(output, out);
      *sink << (cert_format == "json" ? certificates_to_json(report) : certificates_to_text(report));
      return report.any_pass() ? kOk : kNoCertificate;
    }

    if (sim->parsed()) {
      const SwitchingSpec spec = sim_src.load();
      const Vector x0 = sim_x.empty() ? unit(spec.dim, 1.0) : parse_point(sim_x, spec.dim, "--x0");
      const RegimeId i0 = check_regime(spec, sim_i, "--i0");
      SimOptions opts;
      if (sim_r_opt->count()) opts.rate = sim_r;
      const double T = sim_grid.opt->count() ? sim_grid.resolve(sim_T, 1).back() : sim_T;
      opts.grid = sim_final ? std::vector<double>{T} : sim_grid.resolve(sim_T, 100);
      Sink sink(output, out);

      if (!sim_observable.empty()) {
        const Observable f = Observable::parse(sim_observable);
        const ExpectationCurve c = estimate_expectation_curve(spec, f, x0, i0, opts.grid,
                                                              sim_paths, seed, opts, jobs);
        if (sim_format == "csv") {
          write_curve_csv(*sink, c.times, c.means, c.stderrs);
        } else {
          ordered_json j;
          j["observable"] = sim_observable;
          j["paths"] = sim_paths;
          j["seed"] = seed;
          j["times"] = to_json(c.times);
          j["means"] = to_json(c.means);
          j["stderrs"] = to_json(c.stderrs);
          j["blowups"] = c.blowups;
          *sink << j.dump(2) << '\n';
        }
        return kOk;
      }
      if (sim_format != "csv") throw std::invalid_argument("paths are emitted as csv only");
      const auto paths = parallel_map(sim_paths, jobs, [&](std::size_t k) {
        return simulate_path(spec, x0, i0, T, SeedSpec{seed, k}, opts);
      });
      const bool with_path = sim_paths > 1;
      write_trajectory_header(*sink, spec.dim, with_path);
      for (std::size_t k = 0; k < paths.size(); ++k) {
        write_trajectory_rows(*sink, paths[k], with_path ? static_cast<int>(k) : -1);
      }
      return kOk;
    }

    if (cpl->parsed()) {
      const SwitchingSpec spec = cpl_src.load();
      const double q = cpl_q_opt->count() ? cpl_q : spec.metric.q;
      if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("--q must lie in (0,1]");
      const Vector x = cpl_x.empty() ? unit(spec.dim, 1.0) : parse_point(cpl_x, spec.dim, "--x");
      const Vector y = cpl_y.empty() ? unit(spec.dim, 2.0) : parse_point(cpl_y, spec.dim, "--y");
      const RegimeId i = check_regime(spec, cpl_i, "--i");
      const RegimeId j =
          check_regime(spec, cpl_j < 0 ? spec.num_regimes() - 1 : cpl_j, "--j");
      const std::vector<double> grid = cpl_grid.resolve(cpl_T, 40);
      CouplingOptions copts;
      copts.grid = grid;
      if (cpl_r_opt->count()) copts.rate = cpl_r;
      const double T = grid.back();
      Sink sink(output, out);

      if (cpl_mode == "dominating") {
        if (!spec.partition) throw SpecError("dominating coupling needs a partition");
        const auto runs = parallel_map(cpl_trace ? 1 : cpl_paths, jobs, [&](std::size_t k) {
          return couple_with_dominating(spec, *spec.partition, x, i, T, SeedSpec{seed, k}, copts,
                                        cpl_l0);
        });
        if (cpl_trace || cpl_format == "csv") {
          write_coupled_csv(*sink, spec, runs.front());
          return kOk;
        }
        int gap = std::numeric_limits<int>::max();
        std::size_t met = 0;
        for (const auto& r : runs) {
          gap = std::min(gap, r.min_block_gap);
          met += r.t_meet.has_value();
        }
        ordered_json j;
        j["mode"] = cpl_mode;
        j["paths"] = runs.size();
        j["met_fraction"] = static_cast<double>(met) / static_cast<double>(runs.size());
        j["min_block_gap"] = met ? ordered_json(gap) : ordered_json(nullptr);
        j["invariant_holds"] = !met || gap >= 0;
        *sink << j.dump(2) << '\n';
        return kOk;
      }

      const CouplingMode mode = parse_coupling_mode(cpl_mode);
      if (cpl_trace) {
        const CoupledRun run = mode == CouplingMode::Constant
                                   ? couple_constant(spec, x, y, i, j, T, SeedSpec{seed, 0}, copts)
                                   : couple_uniformized(spec, x, y, i, j, T, SeedSpec{seed, 0}, copts);
        write_coupled_csv(*sink, spec, run);
        return kOk;
      }
      DecayOptions dopts;
      dopts.mode = mode;
      dopts.delta = cpl_delta;
      dopts.coupling = copts;
      const DecayCurve c = wasserstein_decay_curve(spec, x, y, i, j, grid, cpl_paths, q, seed,
                                                   dopts, jobs);
      if (cpl_format == "csv") {
        write_curve_csv(*sink, c.times, c.mean_d, c.stderr_d);
      } else {
        ordered_json js;
        js["mode"] = cpl_mode;
        js["q"] = q;
        js["paths"] = cpl_paths;
        js["seed"] = seed;
        js["times"] = to_json(c.times);
        js["mean_d"] = to_json(c.mean_d);
        js["stderr_d"] = to_json(c.stderr_d);
        js["mean_tilde"] = to_json(c.mean_tilde);
        js["stderr_tilde"] = to_json(c.stderr_tilde);
        js["rate"] = to_json(c.rate);
        js["rate_stderr"] = to_json(c.rate_stderr);
        js["degenerate"] = c.degenerate;
        js["meeting_rate"] = to_json(c.meeting_rate);
        js["met_fraction"] = c.met_fraction;
        js["separated_fraction"] = c.separated_fraction;
        js["blowups"] = c.blowups;
        *sink << js.dump(2) << '\n';
      }
      return kOk;
    }

    if (ws->parsed()) {
      const EmpiricalMeasure a = load_measure_csv(ws_a);
      const EmpiricalMeasure b = load_measure_csv(ws_b);
      const int dim = static_cast<int>(a.points.front().size());
      if (b.points.front().size() != dim) throw std::invalid_argument("samples differ in dimension");
      Matrix M = Matrix::Identity(dim, dim);
      Vector x0 = Vector::Zero(dim);
      if (!ws_src.file.empty() || !ws_src.example.empty()) {
        const SwitchingSpec spec = ws_src.load();
        if (spec.dim != dim) throw std::invalid_argument("spec dimension differs from samples");
        M = spec.metric.M;
        x0 = spec.metric.x0;
      }
      if (!(ws_q > 0.0 && ws_q <= 1.0)) throw std::invalid_argument("--q must lie in (0,1]");
      TransportCost cost;
      if (ws_cost == "power") {
        cost = PowerMetric{ws_q};
      } else if (ws_cost == "trunc-d") {
        cost = TruncatedD{ws_q};
      } else {
        cost = WeightedTilde{ws_q, ws_delta, x0};
      }
      const OtMethod method = ws_method == "assignment"       ? OtMethod::Assignment
                              : ws_method == "transportation" ? OtMethod::Transportation
                                                              : OtMethod::Auto;
      const OtResult res = ot_exact(a, b, cost, QuadraticMetric(M), method);
      if (!ws_plan.empty()) {
        std::ofstream pf(ws_plan, std::ios::binary);
        if (!pf) throw std::invalid_argument("cannot write " + ws_plan);
        write_plan_csv(pf, res.plan);
      }
      Sink sink(output, out);
      if (ws_format == "text") {
        *sink << format_double(res.value) << '\n';
      } else {
        ordered_json j;
        j["cost"] = ws_cost;
        j["q"] = ws_q;
        j["value"] = res.value;
        j["dual_value"] = res.dual_value;
        j["method"] = res.method == OtMethod::Assignment ? "assignment" : "transportation";
        j["n"] = a.size();
        j["m"] = b.size();
        *sink << j.dump(2) << '\n';
      }
      return kOk;
    }
  } catch (const SpecError& e) {
    err << "switchcert: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    err << "switchcert: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace switchcert
