#include "robq/distance.hpp"
#include "robq/fwht.hpp"
#include "robq/privacy.hpp"
#include "robq/regression.hpp"
#include "robq/rng.hpp"
#include "robq/transforms.hpp"

#include <algorithm>

#include <benchmark/benchmark.h>

using namespace robq;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(rows, cols);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  return X;
}

void BM_Fwht(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::vector<double> v(d, 1.0);
  for (auto _ : state) {
    fwht_inplace(v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(d));
}
BENCHMARK(BM_Fwht)->RangeMultiplier(4)->Range(1 << 8, 1 << 16);

void BM_FastJlApply(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  FastJlMap map(fast_jl_rows(d, 0.25), d, 1);
  const Vector x = random_matrix(static_cast<Eigen::Index>(d), 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(map.apply(x));
}
BENCHMARK(BM_FastJlApply)->Arg(1024)->Arg(4096);

void BM_GaussianJlApply(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  GaussianJlMap map(128, d, 1);
  const Vector x = random_matrix(static_cast<Eigen::Index>(d), 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(map.apply(x));
}
BENCHMARK(BM_GaussianJlApply)->Arg(1024)->Arg(4096);

void BM_SrhtApply(benchmark::State& state) {
  SrhtStack h(static_cast<std::size_t>(state.range(0)), 128, 1);
  const Vector z = random_matrix(128, 1, 3).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(h.apply(z));
}
BENCHMARK(BM_SrhtApply)->Arg(16)->Arg(128);

void BM_PrivateMedian(benchmark::State& state) {
  const OutputGrid grid(1e-3, 4.0, 1.01);
  Rng rng(4);
  std::vector<double> values(static_cast<std::size_t>(state.range(0)));
  for (auto& v : values) v = 1.0 + 0.1 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(private_median(values, grid, 1.0, rng));
}
BENCHMARK(BM_PrivateMedian)->Arg(5)->Arg(83)->Arg(1000);

void BM_RegressionUpdate(benchmark::State& state) {
  const Matrix A = random_matrix(200, 20, 5);
  RegressionSketch sk(A, random_matrix(200, 1, 6).col(0), 0.25, 7);
  Rng rng(8);
  for (auto _ : state) {
    SparseUpdate u;
    for (int j = 0; j < 5; ++j) u.entries.emplace_back(rng.uniform_index(200), rng.normal());
    std::sort(u.entries.begin(), u.entries.end());
    u.entries.erase(std::unique(u.entries.begin(), u.entries.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; }),
                    u.entries.end());
    benchmark::DoNotOptimize(sk.update(u));
  }
}
BENCHMARK(BM_RegressionUpdate);

void BM_AdeSrhtQuery(benchmark::State& state) {
  const Matrix X = random_matrix(20, 128, 9);
  AdeSrhtOptions opts;
  opts.quiet = true;
  opts.params = ade_srht_params(20, 128, 10, 0.3);  // sized for Q = 10; the budget below is just headroom
  const Vector q = random_matrix(128, 1, 10).col(0);
  AdeSrht ade(X, 1 << 20, 0.3, 11, opts);
  for (auto _ : state) benchmark::DoNotOptimize(ade.query(q));
}
BENCHMARK(BM_AdeSrhtQuery)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
