#include <benchmark/benchmark.h>

#include "switching/chain.hpp"

#include <random>

using namespace switching;

namespace {

GeneratorMatrix random_generator(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  Matrix r = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) r(i, j) = u(gen);
  return GeneratorMatrix::from_rates(r);
}

Vector mean_positive_alpha(int n) { return Vector::LinSpaced(n, -1.0, 2.0); }

void BM_TiltedExponent(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GeneratorMatrix Q = random_generator(n, 1);
  const Vector alpha = mean_positive_alpha(n);
  for (auto _ : state) {
    const TiltedSolution s = tilted_exponent(Q, alpha, 0.5);
    benchmark::DoNotOptimize(s.eta);
  }
}
BENCHMARK(BM_TiltedExponent)->Arg(2)->Arg(8)->Arg(32)->Arg(128);

void BM_OptimizeQ(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GeneratorMatrix Q = random_generator(n, 2);
  const Vector alpha = mean_positive_alpha(n);
  for (auto _ : state) {
    const QOptimum o = optimize_q(Q, alpha);
    benchmark::DoNotOptimize(o.eta);
  }
}
BENCHMARK(BM_OptimizeQ)->Arg(2)->Arg(8)->Arg(32);

void BM_StationaryDistribution(benchmark::State& state) {
  const GeneratorMatrix Q = random_generator(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    const Vector nu = stationary_distribution(Q);
    benchmark::DoNotOptimize(nu.data());
  }
}
BENCHMARK(BM_StationaryDistribution)->Arg(2)->Arg(32)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
