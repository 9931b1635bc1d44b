#include "helpers.hpp"

#include "switching/csv.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace switching;
using namespace testing_util;

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -1e-300, 3.0, 1.0 / 3.0, 6.02214076e23}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("measure CSV") {
  std::istringstream weighted("i,x_1,x_2,weight\n0,1,2,0.25\n1,-1,0.5,0.75\n");
  const EmpiricalMeasure m = read_measure_csv(weighted);
  REQUIRE(m.size() == 2);
  CHECK(m.regimes == std::vector<int>{0, 1});
  CHECK(m.points[1] == vec({-1, 0.5}));
  CHECK(m.weights == std::vector<double>{0.25, 0.75});

  std::istringstream plain("x_1,i\n3,0\n4,0\n5,1\n6,1\n");
  const EmpiricalMeasure u = read_measure_csv(plain);
  CHECK(u.uniform());
  CHECK(u.points[3](0) == 6.0);
  CHECK(u.regimes[2] == 1);

  std::istringstream bad("i,x_1,weight\n0,1,0.5\n");
  CHECK_THROWS(read_measure_csv(bad));
}

TEST_CASE("trajectory rows read back as a measure") {
  SwitchingSpec s = elementary(2.0, 1.0);
  SimOptions o;
  o.grid = {2.0};
  std::ostringstream out;
  write_trajectory_header(out, 1, true);
  std::vector<Trajectory> paths;
  for (std::uint64_t k = 0; k < 5; ++k) {
    paths.push_back(simulate_path(s, vec({1}), RegimeId(0), 2.0, {3, k}, o));
    write_trajectory_rows(out, paths.back(), static_cast<int>(k));
  }
  std::istringstream in(out.str());
  const EmpiricalMeasure m = read_measure_csv(in);
  REQUIRE(m.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(m.points[k] == paths[k].grid_states[0]);
    CHECK(m.regimes[k] == paths[k].grid_regimes[0]);
  }
}

TEST_CASE("plan CSV") {
  std::ostringstream out;
  write_plan_csv(out, mat(2, 2, {0.5, 0, 0, 0.5}));
  CHECK(out.str() == "k,l,mass\n0,0,0.5\n1,1,0.5\n");
}
