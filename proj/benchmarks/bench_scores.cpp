#include <benchmark/benchmark.h>

#include <vector>

#include "flats/gaussian.hpp"
#include "flats/knn.hpp"
#include "flats/lof.hpp"
#include "flats/metrics.hpp"
#include "flats/random.hpp"
#include "flats/ratio.hpp"

namespace {

flats::FeaturePack random_pack(std::uint64_t seed, std::size_t n, std::size_t m) {
  flats::Rng rng(seed);
  std::vector<float> v(n * m);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return flats::FeaturePack(n, m, std::move(v));
}

void BM_KnnScores(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto train = random_pack(1, n, 768);
  const auto queries = random_pack(2, 256, 768);
  const auto index = flats::build_knn_index(train, 10);
  for (auto _ : state) benchmark::DoNotOptimize(flats::knn_scores(index, queries));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_KnnScores)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_FlatsScores(benchmark::State& state) {
  const auto train = random_pack(1, 4000, 768);
  const auto aux = random_pack(3, 4000, 768);
  const auto queries = random_pack(2, 256, 768);
  const auto ind = flats::build_knn_index(train, 10);
  const auto out = flats::build_knn_index(aux, 10);
  for (auto _ : state) benchmark::DoNotOptimize(flats::flats_scores(ind, out, queries, 0.5));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_FlatsScores)->Unit(benchmark::kMillisecond);

void BM_MahaFit(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto train = random_pack(1, 4000, m);
  std::vector<std::int32_t> y(4000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::int32_t>(i % 10);
  const flats::LabelPack labels(y);
  for (auto _ : state) benchmark::DoNotOptimize(flats::fit_gaussian(train, labels));
}
BENCHMARK(BM_MahaFit)->Arg(128)->Arg(768)->Unit(benchmark::kMillisecond);

void BM_MahaScores(benchmark::State& state) {
  const auto train = random_pack(1, 4000, 768);
  std::vector<std::int32_t> y(4000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<std::int32_t>(i % 10);
  const auto model = flats::fit_gaussian(train, flats::LabelPack(y));
  const auto queries = random_pack(2, 256, 768);
  for (auto _ : state) benchmark::DoNotOptimize(flats::maha_scores(model, queries));
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_MahaScores)->Unit(benchmark::kMillisecond);

void BM_LofFit(benchmark::State& state) {
  const auto train = random_pack(1, 2000, 128);
  for (auto _ : state) benchmark::DoNotOptimize(flats::LofModel(flats::build_knn_index(train, 10)));
}
BENCHMARK(BM_LofFit)->Unit(benchmark::kMillisecond);

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  flats::Rng rng(4);
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal() + 0.5;
  const flats::ScoreSeries ind(a), ood(b);
  for (auto _ : state) benchmark::DoNotOptimize(flats::auroc(ind, ood));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_Auroc)->RangeMultiplier(4)->Range(1024, 262144)->Complexity(benchmark::oNLogN);

}  // namespace
BENCHMARK_MAIN();
