#include <benchmark/benchmark.h>

#include "switching/certify.hpp"

using namespace switching;

namespace {

SwitchingSpec ladder(int n) {
  SwitchingSpec s;
  s.dim = 1;
  Matrix r = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    s.regimes.emplace_back(AffineFlow{Matrix::Constant(1, 1, 1.0 - 2.0 * k / (n - 1)), Vector::Zero(1)});
    if (k + 1 < n) r(k, k + 1) = r(k + 1, k) = 1.0;
  }
  s.rates = ConstantRates{r};
  s.metric.M = Matrix::Identity(1, 1);
  s.metric.x0 = Vector::Zero(1);
  std::vector<std::vector<int>> part;
  for (int k = n - 1; k >= 0; --k) part.push_back({k});
  s.partition = part;
  return s;
}

void BM_LogNorm(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Matrix A = Matrix::Random(d, d);
  const Matrix R = Matrix::Random(d, d);
  const Matrix M = R.transpose() * R + Matrix::Identity(d, d);
  for (auto _ : state) benchmark::DoNotOptimize(log_norm(A, M).mu);
}
BENCHMARK(BM_LogNorm)->Arg(2)->Arg(8)->Arg(32);

void BM_HormanderRank(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  SwitchingSpec s;
  s.dim = d;
  s.regimes.emplace_back(AffineFlow{-Matrix::Identity(d, d), Vector::Unit(d, 0)});
  Matrix shift = Matrix::Zero(d, d);
  for (int k = 0; k + 1 < d; ++k) shift(k + 1, k) = 1.0;
  s.regimes.emplace_back(AffineFlow{shift - Matrix::Identity(d, d), Vector::Zero(d)});
  Matrix r(2, 2);
  r << 0, 1, 1, 0;
  s.rates = ConstantRates{r};
  s.metric.M = Matrix::Identity(d, d);
  s.metric.x0 = Vector::Zero(d);
  for (auto _ : state) benchmark::DoNotOptimize(hormander_rank(s, s.metric.x0, d).rank);
}
BENCHMARK(BM_HormanderRank)->Arg(2)->Arg(4)->Arg(8);

void BM_CertifyAll(benchmark::State& state) {
  const SwitchingSpec s = ladder(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const CertificateReport r = certify_all(s);
    benchmark::DoNotOptimize(r.certificates.data());
  }
}
BENCHMARK(BM_CertifyAll)->Arg(3)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
