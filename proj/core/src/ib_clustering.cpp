#include "star/ib_clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

#include "record_json.hpp"
#include "star/error.hpp"

namespace star {

AdjacencyGraph AdjacencyGraph::from_edges(std::vector<RecordId> nodes, std::vector<Edge> edges) {
  AdjacencyGraph g;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.nodes = std::move(nodes);
  for (auto [a, b] : edges) {
    if (a == b) continue;
    if (!std::binary_search(g.nodes.begin(), g.nodes.end(), a) ||
        !std::binary_search(g.nodes.begin(), g.nodes.end(), b)) {
      throw Error(ErrorCode::InconsistentComponents,
                  "edge (" + std::to_string(a) + ", " + std::to_string(b) + ") on unknown node");
    }
    g.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

bool AdjacencyGraph::has_edge(RecordId a, RecordId b) const {
  return std::binary_search(edges.begin(), edges.end(), Edge{std::min(a, b), std::max(a, b)});
}

AdjacencyGraph build_adjacency(const MemorySnapshot& snapshot, std::span<const RecordId> working_set,
                               double r_adj, bool use_cooccurrence) {
  if (working_set.empty()) throw Error(ErrorCode::EmptyWorkingSet, "no primitives to cluster");
  if (!(r_adj > 0.0)) throw Error(ErrorCode::InvalidConfig, "adjacency radius must be > 0");

  std::vector<RecordId> nodes(working_set.begin(), working_set.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<const Primitive*> prims;
  prims.reserve(nodes.size());
  for (RecordId id : nodes) prims.push_back(&snapshot.primitive(id));

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    for (std::size_t j = i + 1; j < prims.size(); ++j) {
      if (distance(prims[i]->centroid, prims[j]->centroid) <= r_adj) {
        edges.emplace_back(nodes[i], nodes[j]);
      }
    }
  }
  if (use_cooccurrence) {
    std::vector<RecordId> local;
    for (const auto& c : snapshot.captions()) {
      local.clear();
      for (RecordId pid : c.primitive_ids) {
        if (std::binary_search(nodes.begin(), nodes.end(), pid)) local.push_back(pid);
      }
      for (std::size_t i = 0; i < local.size(); ++i) {
        for (std::size_t j = i + 1; j < local.size(); ++j) edges.emplace_back(local[i], local[j]);
      }
    }
  }
  auto g = AdjacencyGraph::from_edges(std::move(nodes), std::move(edges));
  g.radius = r_adj;
  g.cooccurrence = use_cooccurrence;
  return g;
}

double merge_cost(const Cluster& a, const Cluster& b) {
  const Cluster& lo = a.key() < b.key() ? a : b;
  const Cluster& hi = a.key() < b.key() ? b : a;
  const double mass = lo.prior + hi.prior;
  const double js = weighted_js_divergence(lo.conditional, hi.conditional, lo.prior / mass,
                                           hi.prior / mass);
  const double d = mass * js;
  return d < kZeroCost ? 0.0 : d;
}

ClusterPartition::ClusterPartition(std::span<const RecordId> ids,
                                   std::span<const RelevanceDistribution> rows,
                                   const AdjacencyGraph& graph)
    : source_count_(ids.size()), alive_(ids.size()) {
  if (ids.size() != rows.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one conditional row is needed per primitive");
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyWorkingSet, "no primitives to cluster");
  slots_.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    slots_.push_back(Slot{{ids[i]}, rows[i], {}, true});
    key_to_slot_.emplace_back(ids[i], i);
  }
  std::sort(key_to_slot_.begin(), key_to_slot_.end());
  for (std::size_t i = 1; i < key_to_slot_.size(); ++i) {
    if (key_to_slot_[i - 1].first == key_to_slot_[i].first) {
      throw Error(ErrorCode::DuplicateId, "primitive " + std::to_string(key_to_slot_[i].first));
    }
  }
  for (auto [a, b] : graph.edges) {
    auto ia = std::lower_bound(key_to_slot_.begin(), key_to_slot_.end(), std::pair{a, std::size_t{0}});
    auto ib = std::lower_bound(key_to_slot_.begin(), key_to_slot_.end(), std::pair{b, std::size_t{0}});
    // Edges touching primitives outside the working set are ignored.
    if (ia == key_to_slot_.end() || ia->first != a || ib == key_to_slot_.end() || ib->first != b) {
      continue;
    }
    slots_[ia->second].neighbors.insert(ib->second);
    slots_[ib->second].neighbors.insert(ia->second);
  }
}

std::size_t ClusterPartition::slot_of(RecordId key) const {
  auto it = std::lower_bound(key_to_slot_.begin(), key_to_slot_.end(), std::pair{key, std::size_t{0}});
  if (it == key_to_slot_.end() || it->first != key || !slots_[it->second].alive) {
    throw Error(ErrorCode::InconsistentComponents, "no live cluster with key " + std::to_string(key));
  }
  return it->second;
}

Cluster ClusterPartition::make_cluster(const Slot& s, int id) const {
  return Cluster{id, s.members,
                 static_cast<double>(s.members.size()) / static_cast<double>(source_count_),
                 s.conditional};
}

std::vector<Cluster> ClusterPartition::clusters() const {
  std::vector<Cluster> out;
  out.reserve(alive_);
  for (auto [key, slot] : key_to_slot_) {
    if (slots_[slot].alive) out.push_back(make_cluster(slots_[slot], static_cast<int>(out.size())));
  }
  return out;
}

Cluster ClusterPartition::cluster(RecordId key) const { return make_cluster(slots_[slot_of(key)], 0); }

std::vector<RecordId> ClusterPartition::neighbors(RecordId key) const {
  std::vector<RecordId> out;
  for (std::size_t n : slots_[slot_of(key)].neighbors) out.push_back(slots_[n].members.front());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Edge> ClusterPartition::edges() const {
  std::vector<Edge> out;
  for (const auto& s : slots_) {
    if (!s.alive) continue;
    for (std::size_t n : s.neighbors) {
      const RecordId a = s.members.front();
      const RecordId b = slots_[n].members.front();
      if (a < b) out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool ClusterPartition::adjacent(RecordId a, RecordId b) const {
  return slots_[slot_of(a)].neighbors.contains(slot_of(b));
}

double ClusterPartition::cost(RecordId a, RecordId b) const {
  return merge_cost(make_cluster(slots_[slot_of(a)], 0), make_cluster(slots_[slot_of(b)], 0));
}

RecordId ClusterPartition::merge(RecordId a, RecordId b) {
  std::size_t sa = slot_of(a);
  std::size_t sb = slot_of(b);
  if (!slots_[sa].neighbors.contains(sb)) {
    throw Error(ErrorCode::NotAdjacent,
                "clusters " + std::to_string(a) + " and " + std::to_string(b) + " are not adjacent");
  }
  if (slots_[sb].members.front() < slots_[sa].members.front()) std::swap(sa, sb);
  Slot& keep = slots_[sa];
  Slot& gone = slots_[sb];

  const double na = static_cast<double>(keep.members.size());
  const double nb = static_cast<double>(gone.members.size());
  for (std::size_t y = 0; y < keep.conditional.size(); ++y) {
    keep.conditional[y] = (na * keep.conditional[y] + nb * gone.conditional[y]) / (na + nb);
  }
  std::vector<RecordId> members;
  members.reserve(keep.members.size() + gone.members.size());
  std::merge(keep.members.begin(), keep.members.end(), gone.members.begin(), gone.members.end(),
             std::back_inserter(members));
  keep.members = std::move(members);

  for (std::size_t n : gone.neighbors) {
    slots_[n].neighbors.erase(sb);
    if (n != sa) {
      slots_[n].neighbors.insert(sa);
      keep.neighbors.insert(n);
    }
  }
  keep.neighbors.erase(sb);
  keep.neighbors.erase(sa);
  gone.neighbors.clear();
  gone.members.clear();
  gone.alive = false;
  --alive_;
  return keep.members.front();
}

double ClusterPartition::information() const {
  std::vector<double> priors;
  std::vector<RelevanceDistribution> rows;
  for (const auto& s : slots_) {
    if (!s.alive) continue;
    priors.push_back(static_cast<double>(s.members.size()) / static_cast<double>(source_count_));
    rows.push_back(s.conditional);
  }
  return mutual_information(JointModel::weighted(std::move(priors), std::move(rows)));
}

ClusterPartition merge_step(ClusterPartition partition, const Edge& pair) {
  partition.merge(pair.first, pair.second);
  return partition;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::DeltaExceeded: return "delta_exceeded";
    case StopReason::GraphExhausted: return "graph_exhausted";
    case StopReason::SingleCluster: return "single_cluster";
  }
  return "unknown";
}

namespace {

detail::json step_json(const MergeStep& s) {
  return {{"step", s.step},
          {"merged", {s.first, s.second}},
          {"cost", s.cost},
          {"info_after", s.info_after},
          {"delta", s.delta}};
}

}  // namespace

std::string MergeTrace::to_jsonl() const {
  std::string out = detail::json{{"initial_information", initial_information}}.dump() + "\n";
  for (const auto& s : steps) out += step_json(s).dump() + "\n";
  detail::json footer = {{"stop_reason", std::string(to_string(stop_reason))},
                         {"merges", steps.size()}};
  footer["rejected"] = rejected ? step_json(*rejected) : detail::json(nullptr);
  out += footer.dump() + "\n";
  return out;
}

ClusteringResult agglomerate(std::span<const RecordId> ids,
                             std::span<const RelevanceDistribution> rows,
                             const AdjacencyGraph& graph, double delta_bar) {
  if (!(delta_bar >= 0.0)) throw Error(ErrorCode::InvalidConfig, "delta_bar must be >= 0");
  ClusterPartition part(ids, rows, graph);

  MergeTrace trace;
  trace.initial_information = mutual_information(
      JointModel::uniform(std::vector<RelevanceDistribution>(rows.begin(), rows.end())));
  const double total = trace.initial_information;
  double info = total;

  // Candidate merges ordered by (cost, key, other key).
  using Candidate = std::tuple<double, RecordId, RecordId>;
  std::set<Candidate> queue;
  std::map<Edge, double> cost_of;
  auto push = [&](RecordId a, RecordId b) {
    const Edge e{std::min(a, b), std::max(a, b)};
    const double c = part.cost(e.first, e.second);
    queue.emplace(c, e.first, e.second);
    cost_of[e] = c;
  };
  auto drop_touching = [&](RecordId key) {
    for (RecordId n : part.neighbors(key)) {
      const Edge e{std::min(key, n), std::max(key, n)};
      auto it = cost_of.find(e);
      if (it == cost_of.end()) continue;
      queue.erase(Candidate{it->second, e.first, e.second});
      cost_of.erase(it);
    }
  };
  for (auto [a, b] : part.edges()) push(a, b);

  while (true) {
    if (part.size() == 1) {
      trace.stop_reason = StopReason::SingleCluster;
      break;
    }
    if (queue.empty()) {
      trace.stop_reason = StopReason::GraphExhausted;
      break;
    }
    const double best_cost = std::get<0>(*queue.begin());
    Candidate pick = *queue.begin();
    for (auto it = queue.begin(); it != queue.end() && std::get<0>(*it) <= best_cost + kCostTieTolerance;
         ++it) {
      if (std::pair{std::get<1>(*it), std::get<2>(*it)} < std::pair{std::get<1>(pick), std::get<2>(pick)}) {
        pick = *it;
      }
    }
    const auto [cost, a, b] = pick;
    MergeStep step;
    step.step = trace.steps.size() + 1;
    step.first = a;
    step.second = b;
    step.cost = cost;
    step.info_after = std::max(0.0, info - cost);
    step.delta = total > kZeroInformation ? cost / total : 0.0;
    if (step.delta > delta_bar) {
      trace.rejected = step;
      trace.stop_reason = StopReason::DeltaExceeded;
      break;
    }
    drop_touching(a);
    drop_touching(b);
    const RecordId merged = part.merge(a, b);
    for (RecordId n : part.neighbors(merged)) push(merged, n);
    info = step.info_after;
    trace.steps.push_back(step);
  }
  return {part.clusters(), std::move(trace)};
}

ClusteringResult agglomerate(const MemorySnapshot& snapshot, std::span<const RecordId> working_set,
                             const TaskCueSet& cues, const AdjacencyGraph& graph,
                             double delta_bar) {
  std::vector<RelevanceDistribution> rows;
  rows.reserve(working_set.size());
  for (RecordId id : working_set) rows.push_back(relevance_of(snapshot.primitive(id).feature, cues));
  return agglomerate(working_set, rows, graph, delta_bar);
}

}  // namespace star
