#include <benchmark/benchmark.h>

#include <random>

#include "star/ib_clustering.hpp"

namespace {

// Random rows on a chain plus random chords, n primitives, 4 cues.
void BM_Agglomerate(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u;
  std::vector<star::RecordId> ids;
  std::vector<star::RelevanceDistribution> rows;
  std::vector<star::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(static_cast<star::RecordId>(i + 1));
    star::RelevanceDistribution r{0.0};
    double s = 0;
    for (int j = 0; j < 4; ++j) {
      r.push_back(u(rng));
      s += r.back();
    }
    for (auto& x : r) x /= s;
    rows.push_back(r);
    if (i > 0) edges.emplace_back(ids[i - 1], ids[i]);
    if (i > 3 && u(rng) < 0.5) edges.emplace_back(ids[i - 3], ids[i]);
  }
  const auto graph = star::AdjacencyGraph::from_edges(ids, edges);
  for (auto _ : state) benchmark::DoNotOptimize(star::agglomerate(ids, rows, graph, 0.05));
}
BENCHMARK(BM_Agglomerate)->Arg(30)->Arg(100)->Arg(300);

}  // namespace
