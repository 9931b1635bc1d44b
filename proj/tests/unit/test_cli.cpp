#include "switchcert/cli.hpp"
#include "switchcert/examples.hpp"

#include "switching/coupling.hpp"
#include "switching/spec_io.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace switching;
using namespace switchcert;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::filesystem::path tmp(const std::string& name) {
  std::filesystem::create_directories(SWITCHING_TMP_DIR);
  return std::filesystem::path(SWITCHING_TMP_DIR) / name;
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"certify", "--example", "elementary"}).code == kOk);
  CHECK(run({"certify", "--example", "elementary", "--a1", "1", "--am1", "2"}).code == kNoCertificate);
  CHECK(run({"certify", "/nonexistent.json"}).code == kBadInput);
  CHECK(run({"bogus"}).code == kBadInput);
  CHECK(run({"example", "nope"}).code == kBadInput);
  CHECK(run({"simulate", "--example", "elementary", "--T", "-1"}).code == kBadInput);
  const Result r = run({"certify", "--example", "elementary", "--format", "text"});
  CHECK(r.out.ends_with("PASS\n"));
}

TEST_CASE("examples round-trip through JSON") {
  for (const auto& tag : example_tags()) {
    const Result r = run({"example", tag});
    REQUIRE(r.code == kOk);
    CHECK(spec_to_json(parse_spec(r.out)) == spec_to_json(make_example(tag, {})));
  }
  const SwitchingSpec spiral = parse_spec(run({"example", "spiral"}).out);
  Matrix A0(2, 2), A1(2, 2);
  A0 << -1, 3, -1.0 / 3.0, -1;
  A1 << -1, -1.0 / 3.0, 3, -1;
  CHECK(drift_matrix(spiral.regimes[0]) == A0);
  CHECK(drift_matrix(spiral.regimes[1]) == A1);

  const SwitchingSpec plane = parse_spec(run({"example", "intro-plane"}).out);
  for (int i = 0; i < 2; ++i) {
    CHECK(drift_matrix(plane.regimes[i]) == -Matrix::Identity(2, 2));
    CHECK(drift_offset(plane.regimes[i])(0) == std::stod(plane.labels[i]));
  }
}

TEST_CASE("rate overrides") {
  const SwitchingSpec e = parse_spec(run({"example", "elementary", "--a1", "3", "--am1", "0.5"}).out);
  const Matrix c = constant_rate_matrix(e);
  CHECK(c(1, 0) == 3.0);
  CHECK(c(0, 1) == 0.5);
  const SwitchingSpec d = parse_spec(run({"example", "dilation-chain", "--rate", "4"}).out);
  const Matrix r = constant_rate_matrix(d);
  CHECK(r(0, 1) == 4.0);
  CHECK(r(0, 2) == 0.0);
  CHECK(run({"example", "spiral", "--am1", "1"}).code == kBadInput);
  CHECK(run({"example", "elementary", "--a1", "-1"}).code == kBadInput);
}

TEST_CASE("simulate is reproducible") {
  const std::vector<std::string> args{"simulate", "--example", "elementary", "--paths", "3", "--seed", "5"};
  const Result a = run(args);
  REQUIRE(a.code == kOk);
  CHECK(a.out == run(args).out);
  std::vector<std::string> more = args;
  more.insert(more.end(), {"--jobs", "3"});
  CHECK(a.out == run(more).out);
  CHECK(a.out != run({"simulate", "--example", "elementary", "--paths", "3", "--seed", "6"}).out);
}

TEST_CASE("couple gives a decaying curve") {
  const Result r = run({"couple", "--example", "elementary", "--paths", "1000", "--seed", "2"});
  REQUIRE(r.code == kOk);
  const auto rows = parse_csv(r.out);
  std::vector<double> t, m, se;
  for (const auto& row : rows) t.push_back(row[0]), m.push_back(row[1]), se.push_back(row[2]);
  CHECK(t.size() == 41);
  const LinearFit f = fit_decay_rate(t, m, se, t.size() / 2);
  CHECK(-f.slope > 0.0);
}

TEST_CASE("wasserstein of a sample with itself") {
  const auto path = tmp("cli_sample.csv");
  const Result s = run({"simulate", "--example", "intro-plane", "--paths", "20", "--final", "-o", path.string()});
  REQUIRE(s.code == kOk);
  const Result w = run({"wasserstein", path.string(), path.string()});
  REQUIRE(w.code == kOk);
  CHECK(std::stod(w.out) == 0.0);
  CHECK(run({"wasserstein", path.string(), "/nonexistent.csv"}).code == kBadInput);
}
