#include <benchmark/benchmark.h>

#include "switching/transport.hpp"

#include <random>

using namespace switching;

namespace {

EmpiricalMeasure cloud(int n, int dim, std::uint64_t seed, double shift) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  std::vector<Vector> pts;
  std::vector<int> regimes;
  for (int k = 0; k < n; ++k) {
    pts.push_back(Vector::NullaryExpr(dim, [&] { return g(gen) + shift; }));
    regimes.push_back(k % 2);
  }
  return EmpiricalMeasure::uniform_cloud(std::move(pts), std::move(regimes));
}

void BM_Assignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EmpiricalMeasure a = cloud(n, 2, 1, 0.0), b = cloud(n, 2, 2, 0.5);
  const QuadraticMetric I(Matrix::Identity(2, 2));
  for (auto _ : state) {
    const OtResult r = ot_exact(a, b, TruncatedD{0.5}, I, OtMethod::Assignment);
    benchmark::DoNotOptimize(r.value);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_Assignment)->RangeMultiplier(2)->Range(16, 512)->Complexity()->Unit(benchmark::kMillisecond);

void BM_Transportation(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EmpiricalMeasure a = cloud(n, 2, 3, 0.0), b = cloud(n, 2, 4, 0.5);
  const QuadraticMetric I(Matrix::Identity(2, 2));
  for (auto _ : state) {
    const OtResult r = ot_exact(a, b, TruncatedD{0.5}, I, OtMethod::Transportation);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_Transportation)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMillisecond);

void BM_SortedW1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g;
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = g(gen);
  for (auto& x : b) x = g(gen) + 1;
  for (auto _ : state) benchmark::DoNotOptimize(w1_sorted_1d(a, b));
}
BENCHMARK(BM_SortedW1)->RangeMultiplier(8)->Range(64, 1 << 15);

}  // namespace

BENCHMARK_MAIN();
