#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "star/memory_store.hpp"
#include "star/task_relevance.hpp"

namespace star {

// Costs closer than this are treated as equal and resolved by member ids.
inline constexpr double kCostTieTolerance = 1e-12;
// Merge costs below this are rounding noise around an exact zero.
inline constexpr double kZeroCost = 1e-14;
// Below this the working set carries no task information and delta is 0.
inline constexpr double kZeroInformation = 1e-12;

using Edge = std::pair<RecordId, RecordId>;

// Undirected primitive adjacency; edges stored once with first < second.
struct AdjacencyGraph {
  std::vector<RecordId> nodes;  // ascending
  std::vector<Edge> edges;      // ascending
  double radius = 0.0;
  bool cooccurrence = false;

  // Sorts and deduplicates; drops self loops; rejects edges on unknown nodes.
  static AdjacencyGraph from_edges(std::vector<RecordId> nodes, std::vector<Edge> edges);

  bool has_edge(RecordId a, RecordId b) const;
};

// Edge iff centroid distance <= r_adj, or (with use_cooccurrence) both
// primitives are listed by one caption. Throws EmptyWorkingSet.
AdjacencyGraph build_adjacency(const MemorySnapshot& snapshot, std::span<const RecordId> working_set,
                               double r_adj, bool use_cooccurrence);

struct Cluster {
  int id = 0;
  std::vector<RecordId> members;  // ascending
  double prior = 0.0;             // |members| / N
  RelevanceDistribution conditional;

  RecordId key() const { return members.front(); }
};

// (p_i + p_j) * JS_pi(P_i, P_j) with pi proportional to the priors. Equals the
// drop in I(X; Y) caused by merging the two clusters.
double merge_cost(const Cluster& a, const Cluster& b);

// A partition of the working set into clusters plus the contracted cluster
// graph. Clusters are addressed by key, their smallest member id.
class ClusterPartition {
 public:
  // Singleton clusters over ids (rows[i] is p(y | ids[i])) with the edges of graph.
  ClusterPartition(std::span<const RecordId> ids, std::span<const RelevanceDistribution> rows,
                   const AdjacencyGraph& graph);

  std::size_t source_count() const { return source_count_; }
  std::size_t size() const { return alive_; }

  // Live clusters ordered by key; ids are assigned 0, 1, ... in that order.
  std::vector<Cluster> clusters() const;
  Cluster cluster(RecordId key) const;
  std::vector<RecordId> neighbors(RecordId key) const;
  // Cluster-level edges as (key, key) pairs, ascending.
  std::vector<Edge> edges() const;
  bool adjacent(RecordId a, RecordId b) const;

  double cost(RecordId a, RecordId b) const;

  // Merges the two adjacent clusters: prior p_a + p_b, conditional the
  // prior-weighted mixture, neighbour sets unioned. Returns the merged key.
  // Throws NotAdjacent.
  RecordId merge(RecordId a, RecordId b);

  // I(clusters; Y) recomputed from scratch.
  double information() const;

 private:
  struct Slot {
    std::vector<RecordId> members;
    RelevanceDistribution conditional;
    std::set<std::size_t> neighbors;
    bool alive = true;
  };

  std::size_t slot_of(RecordId key) const;
  Cluster make_cluster(const Slot& s, int id) const;

  std::vector<Slot> slots_;
  std::vector<std::pair<RecordId, std::size_t>> key_to_slot_;  // sorted by key
  std::size_t source_count_ = 0;
  std::size_t alive_ = 0;
};

// Functional form of ClusterPartition::merge.
ClusterPartition merge_step(ClusterPartition partition, const Edge& pair);

enum class StopReason { DeltaExceeded, GraphExhausted, SingleCluster };

std::string_view to_string(StopReason reason);

struct MergeStep {
  std::size_t step = 0;
  RecordId first = 0;   // keys of the merged clusters, first < second
  RecordId second = 0;
  double cost = 0.0;
  double info_after = 0.0;
  double delta = 0.0;
};

struct MergeTrace {
  double initial_information = 0.0;
  std::vector<MergeStep> steps;
  std::optional<MergeStep> rejected;
  StopReason stop_reason = StopReason::GraphExhausted;

  // One JSON object per line: header, one line per executed merge, footer.
  std::string to_jsonl() const;
};

struct ClusteringResult {
  std::vector<Cluster> clusters;
  MergeTrace trace;
};

// Greedy agglomerative IB from singletons. Each step takes the adjacent pair
// of minimum cost (ties within kCostTieTolerance go to the smallest
// (key, other key)); delta = cost / I(X; Y). A merge whose delta exceeds
// delta_bar is rolled back and ends the loop. When I(X; Y) is zero every
// merge is lossless and delta is 0.
ClusteringResult agglomerate(std::span<const RecordId> ids,
                             std::span<const RelevanceDistribution> rows,
                             const AdjacencyGraph& graph, double delta_bar);

ClusteringResult agglomerate(const MemorySnapshot& snapshot, std::span<const RecordId> working_set,
                             const TaskCueSet& cues, const AdjacencyGraph& graph,
                             double delta_bar);

}  // namespace star
