#include <benchmark/benchmark.h>

#include <random>

#include "ranksim/outlier_eval.hpp"
#include "ranksim/rank_metrics.hpp"

using namespace ranksim;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t dims) {
  std::normal_distribution<double> gauss;
  std::vector<double> v(dims);
  for (auto& x : v) x = gauss(rng);
  return v;
}

std::vector<Vector> random_vectors(std::size_t count, std::size_t dims) {
  std::mt19937_64 rng(17);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_vector(rng, dims));
  return out;
}

void BM_RankProfile(benchmark::State& state) {
  std::mt19937_64 rng(1);
  auto v = random_vector(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(RankProfile::of(v));
}
BENCHMARK(BM_RankProfile)->Arg(50)->Arg(300)->Arg(1000);

void BM_Cosine(benchmark::State& state) {
  std::mt19937_64 rng(2);
  auto x = random_vector(rng, 300);
  auto y = random_vector(rng, 300);
  for (auto _ : state) benchmark::DoNotOptimize(cosine(x, y));
}
BENCHMARK(BM_Cosine);

// Ranks precomputed: the cost of the sum alone.
void BM_APSynPProfiles(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto px = RankProfile::of(random_vector(rng, 300));
  auto py = RankProfile::of(random_vector(rng, 300));
  for (auto _ : state) benchmark::DoNotOptimize(apsynp(px, py, 0.1));
}
BENCHMARK(BM_APSynPProfiles);

void BM_APSynPRaw(benchmark::State& state) {
  std::mt19937_64 rng(4);
  auto x = random_vector(rng, 300);
  auto y = random_vector(rng, 300);
  MetricSpec spec{};
  for (auto _ : state) benchmark::DoNotOptimize(similarity(spec, x, y));
}
BENCHMARK(BM_APSynPRaw);

void BM_CompactnessPairwise(benchmark::State& state) {
  auto vs = random_vectors(9, 300);
  MetricSpec spec{MetricKind(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(compactness_pairwise(vs, spec));
}
BENCHMARK(BM_CompactnessPairwise)
    ->Arg(static_cast<int>(MetricKind::Cosine))
    ->Arg(static_cast<int>(MetricKind::APSynP));

void BM_CompactnessPrototype(benchmark::State& state) {
  auto vs = random_vectors(9, 300);
  MetricSpec spec{MetricKind(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(compactness_prototype(vs, spec));
}
BENCHMARK(BM_CompactnessPrototype)
    ->Arg(static_cast<int>(MetricKind::Cosine))
    ->Arg(static_cast<int>(MetricKind::APSynP));

}  // namespace
BENCHMARK_MAIN();
