#include <benchmark/benchmark.h>

#include "switching/sim.hpp"

using namespace switching;

namespace {

SwitchingSpec spiral(double rate) {
  SwitchingSpec s;
  s.dim = 2;
  Matrix A0(2, 2), A1(2, 2);
  A0 << -1, 3, -1.0 / 3.0, -1;
  A1 << -1, -1.0 / 3.0, 3, -1;
  s.regimes.emplace_back(AffineFlow{A0, Vector::Zero(2)});
  s.regimes.emplace_back(AffineFlow{A1, Vector::Zero(2)});
  Matrix r(2, 2);
  r << 0, rate, rate, 0;
  s.rates = ConstantRates{r};
  s.metric.M = Matrix::Identity(2, 2);
  s.metric.x0 = Vector::Zero(2);
  return s;
}

void BM_FlowStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const AffineFlow f{-Matrix::Identity(d, d) + 0.1 * Matrix::Ones(d, d), Vector::Ones(d)};
  Vector x = Vector::Ones(d);
  for (auto _ : state) {
    x = flow_step(f, x, 0.01);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_FlowStep)->Arg(1)->Arg(2)->Arg(8)->Arg(32);

void BM_SimulatePath(benchmark::State& state) {
  const SwitchingSpec s = spiral(static_cast<double>(state.range(0)));
  Vector x0(2);
  x0 << 1, 0;
  std::uint64_t k = 0;
  for (auto _ : state) {
    const Trajectory p = simulate_path(s, x0, RegimeId(0), 10.0, SeedSpec{1, k++});
    benchmark::DoNotOptimize(p.final_state.data());
  }
}
BENCHMARK(BM_SimulatePath)->Arg(1)->Arg(5)->Arg(50);

void BM_ExpectationCurve(benchmark::State& state) {
  const SwitchingSpec s = spiral(1.0);
  Vector x0(2);
  x0 << 1, 0;
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);
  const Observable f = Observable::parse("norm");
  for (auto _ : state) {
    const ExpectationCurve c = estimate_expectation_curve(s, f, x0, RegimeId(0), grid, 1000, 3, {},
                                                          static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(c.means.data());
  }
}
BENCHMARK(BM_ExpectationCurve)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
