#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <random>

#include "star/agent.hpp"
#include "star/scenario.hpp"
#include "star/vector_index.hpp"

namespace {

const star::SyntheticScenario& scenario(double horizon) {
  static const star::RefHashEmbedder e;
  static std::map<double, star::SyntheticScenario> cache;
  auto it = cache.find(horizon);
  if (it == cache.end()) {
    star::ScenarioSpec spec;
    spec.horizon = horizon;
    it = cache.emplace(horizon, star::generate_synthetic_memory(spec, e)).first;
  }
  return it->second;
}

// Text retrieval stage (all rounds, no answer generation) per query.
void BM_TextRetrieval(benchmark::State& state) {
  const star::RefHashEmbedder e;
  const auto& sc = scenario(static_cast<double>(state.range(0)) * 3.0);
  const auto index = star::VectorIndex::over_captions(sc.snapshot);
  const star::RetrievalConfig cfg;
  const star::MidpointKeyframeSelector selector;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& task = sc.tasks[i++ % sc.tasks.size()];
    auto r = star::run_rounds(task.query, sc.snapshot, index, cfg, e, selector);
    benchmark::DoNotOptimize(r);
  }
  state.counters["captions"] = static_cast<double>(sc.snapshot.captions().size());
}
BENCHMARK(BM_TextRetrieval)->Arg(400)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ThresholdSearch(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  const std::size_t n = static_cast<std::size_t>(state.range(0)), d = 64;
  auto unit = [&] {
    std::vector<double> v(d);
    double s = 0;
    for (auto& x : v) {
      x = g(rng);
      s += x * x;
    }
    for (auto& x : v) x /= std::sqrt(s);
    return v;
  };
  std::vector<star::VectorIndex::Entry> entries;
  for (std::size_t i = 0; i < n; ++i) entries.push_back({static_cast<star::RecordId>(i + 1), unit(), {}, {}});
  const star::VectorIndex index(d, std::move(entries));
  const auto q = unit();
  for (auto _ : state) benchmark::DoNotOptimize(index.search_above_threshold(q, 0.3));
}
BENCHMARK(BM_ThresholdSearch)->Arg(1000)->Arg(10000)->Arg(100000);

}  // namespace
