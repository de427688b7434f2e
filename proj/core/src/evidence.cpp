#include "star/evidence.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "record_json.hpp"
#include "star/error.hpp"

namespace star {

bool CaptionPool::contains(RecordId caption_id) const {
  return std::any_of(hits.begin(), hits.end(),
                     [&](const SearchHit& h) { return h.record_id == caption_id; });
}

CaptionPool retrieve_caption_pool(const VectorIndex& captions, const TaskCueSet& cues, double tau) {
  if (cues.cues.empty()) throw Error(ErrorCode::InvalidConfig, "cue set is empty");
  std::unordered_map<RecordId, double> best;
  for (const auto& cue : cues.cues) {
    for (const auto& hit : captions.search_above_threshold(cue.embedding, tau)) {
      auto [it, inserted] = best.emplace(hit.record_id, hit.score);
      if (!inserted) it->second = std::max(it->second, hit.score);
    }
  }
  CaptionPool pool;
  pool.tau = tau;
  pool.hits.reserve(best.size());
  for (auto [id, score] : best) pool.hits.push_back({id, score});
  std::sort(pool.hits.begin(), pool.hits.end(), hit_order);
  return pool;
}

std::vector<RecordId> induce_primitive_subset(const CaptionPool& pool,
                                              const MemorySnapshot& snapshot) {
  std::vector<RecordId> ids;
  for (const auto& hit : pool.hits) {
    const auto& c = snapshot.caption(hit.record_id);
    ids.insert(ids.end(), c.primitive_ids.begin(), c.primitive_ids.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Grouping group_captions(const CaptionPool& pool, std::span<const Cluster> clusters,
                        const MemorySnapshot& snapshot) {
  std::unordered_map<RecordId, int> owner;
  for (const auto& cl : clusters) {
    for (RecordId m : cl.members) owner[m] = cl.id;
  }
  std::map<int, std::vector<RecordId>> by_cluster;
  Grouping out;
  for (const auto& hit : pool.hits) {
    const auto& c = snapshot.caption(hit.record_id);
    std::vector<int> hit_clusters;
    for (RecordId pid : c.primitive_ids) {
      if (auto it = owner.find(pid); it != owner.end()) hit_clusters.push_back(it->second);
    }
    std::sort(hit_clusters.begin(), hit_clusters.end());
    hit_clusters.erase(std::unique(hit_clusters.begin(), hit_clusters.end()), hit_clusters.end());
    if (hit_clusters.empty()) {
      out.ungrouped.push_back(c.id);
      continue;
    }
    for (int cid : hit_clusters) by_cluster[cid].push_back(c.id);
  }
  for (auto& [cid, ids] : by_cluster) out.groups.push_back({cid, std::move(ids)});
  return out;
}

namespace {

double caption_relevance(const CaptionRecord& c, const TaskCueSet& cues) {
  double best = 0.0;
  for (const auto& cue : cues.cues) best = std::max(best, similarity(c.embedding, cue.embedding));
  return best;
}

}  // namespace

std::vector<Representative> select_representatives(const Grouping& groups,
                                                   std::span<const Cluster> clusters,
                                                   const TaskCueSet& cues,
                                                   const MemorySnapshot& snapshot,
                                                   double tau) {
  std::unordered_map<int, const Cluster*> by_id;
  for (const auto& cl : clusters) by_id[cl.id] = &cl;

  std::vector<Representative> reps;
  for (const auto& g : groups.groups) {
    if (g.caption_ids.empty()) continue;
    auto it = by_id.find(g.cluster_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::InconsistentComponents,
                  "group for unknown cluster " + std::to_string(g.cluster_id));
    }
    const Cluster& cl = *it->second;
    double affinity = 0.0;
    std::size_t hits = 0;
    for (RecordId m : cl.members) {
      const auto theta = cue_scores(snapshot.primitive(m).feature, cues);
      affinity = std::max(affinity, *std::max_element(theta.begin() + 1, theta.end()));
      hits = std::max<std::size_t>(
          hits, std::count_if(theta.begin() + 1, theta.end(), [&](double x) { return x >= tau; }));
    }
    std::optional<Representative> best;
    for (RecordId cid : g.caption_ids) {
      const auto& c = snapshot.caption(cid);
      Representative r{g.cluster_id, cid, caption_relevance(c, cues), 1.0 - cl.conditional[0],
                       c.t_start, affinity, hits};
      const bool better = !best || r.score > best->score ||
                          (r.score == best->score &&
                           (r.t_start < best->t_start ||
                            (r.t_start == best->t_start && r.caption_id < best->caption_id)));
      if (better) best = r;
    }
    reps.push_back(*best);
  }
  return reps;
}

std::vector<RankedEvidence> rank_evidence(std::vector<Representative> reps, std::size_t K,
                                          const MemorySnapshot& snapshot) {
  if (K < 1) throw Error(ErrorCode::InvalidConfig, "K must be >= 1");
  std::sort(reps.begin(), reps.end(), [](const Representative& a, const Representative& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.cue_hits != b.cue_hits) return a.cue_hits > b.cue_hits;
    if (a.affinity != b.affinity) return a.affinity > b.affinity;
    if (a.task_mass != b.task_mass) return a.task_mass > b.task_mass;
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    if (a.caption_id != b.caption_id) return a.caption_id < b.caption_id;
    return a.cluster_id < b.cluster_id;
  });
  std::vector<RankedEvidence> out;
  std::unordered_set<RecordId> used;
  int rank = 0;
  double last_score = -1.0;
  for (const auto& r : reps) {
    if (out.size() == K) break;
    if (!used.insert(r.caption_id).second) continue;
    if (r.score != last_score) {
      ++rank;
      last_score = r.score;
    }
    const auto& c = snapshot.caption(r.caption_id);
    out.push_back({r.cluster_id, r.caption_id, r.score, rank, c.t_start, c.t_end, c.text});
  }
  return out;
}

std::vector<double> MidpointKeyframeSelector::select(std::span<const RankedEvidence> text,
                                                     const MemorySnapshot&) const {
  std::vector<double> ts;
  for (std::size_t i = 0; i < std::min(count_, text.size()); ++i) {
    ts.push_back(0.5 * (text[i].t_start + text[i].t_end));
  }
  return ts;
}

KeyframeLookup select_keyframes(std::span<const RankedEvidence> text,
                                const KeyframeSelector& selector, const MemorySnapshot& snapshot,
                                double tol) {
  if (text.empty()) return {};
  const auto ts = selector.select(text, snapshot);
  return keyframes_at(snapshot, ts, tol);
}

const Cluster* EvidenceSet::find_cluster(int id) const {
  for (const auto& c : clusters) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::string EvidenceSet::to_canonical() const {
  using detail::json;
  json j = json::object();
  json cl = json::array();
  for (const auto& c : clusters) {
    cl.push_back({{"id", c.id},
                  {"members", c.members},
                  {"prior", c.prior},
                  {"conditional", c.conditional}});
  }
  j["clusters"] = std::move(cl);
  json cfg = json::object();
  for (const auto& [k, v] : config.entries()) cfg[k] = v;
  j["config"] = std::move(cfg);
  json kf = json::array();
  for (const auto& k : keyframes) kf.push_back(detail::to_json(k));
  j["keyframes"] = std::move(kf);
  j["missing_keyframes"] = missing_keyframes;
  j["pool_size"] = pool_size;
  j["stage"] = stage;
  j["tau"] = tau;
  json te = json::array();
  for (const auto& e : text) {
    te.push_back({{"cluster_id", e.cluster_id},
                  {"caption_id", e.caption_id},
                  {"score", e.score},
                  {"rank", e.rank},
                  {"t_start", e.t_start},
                  {"t_end", e.t_end},
                  {"text", e.text}});
  }
  j["text_evidence"] = std::move(te);
  j["ungrouped"] = ungrouped;
  return detail::round_floats(j).dump();
}

EvidenceSet assemble_evidence(const CaptionPool& pool, std::vector<Cluster> clusters,
                              const Grouping& groups, std::vector<RankedEvidence> text,
                              const KeyframeLookup& keyframes, const RetrievalConfig& config) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InconsistentComponents, m); };
  if (text.size() > config.K) fail("more text entries than K");
  std::unordered_set<int> seen_clusters;
  std::unordered_set<RecordId> pool_ids;
  for (const auto& h : pool.hits) pool_ids.insert(h.record_id);
  for (const auto& e : text) {
    if (!seen_clusters.insert(e.cluster_id).second) {
      fail("cluster " + std::to_string(e.cluster_id) + " has two representatives");
    }
    if (!pool_ids.contains(e.caption_id)) {
      fail("caption " + std::to_string(e.caption_id) + " is not in the pool");
    }
    auto g = std::find_if(groups.groups.begin(), groups.groups.end(),
                          [&](const CaptionGroup& x) { return x.cluster_id == e.cluster_id; });
    if (g == groups.groups.end() ||
        std::find(g->caption_ids.begin(), g->caption_ids.end(), e.caption_id) ==
            g->caption_ids.end()) {
      fail("caption " + std::to_string(e.caption_id) + " is not grouped under cluster " +
           std::to_string(e.cluster_id));
    }
  }
  EvidenceSet ev;
  ev.text = std::move(text);
  for (const auto* k : keyframes.keyframes) ev.keyframes.push_back(*k);
  ev.missing_keyframes = keyframes.missing;
  ev.clusters = std::move(clusters);
  ev.ungrouped = groups.ungrouped;
  ev.pool_size = pool.hits.size();
  ev.tau = pool.tau;
  ev.config = config;
  return ev;
}

RetrievalRun retrieve_evidence(const MemorySnapshot& snapshot, const VectorIndex& captions,
                               const TaskCueSet& cues, const RetrievalConfig& config, double tau,
                               const KeyframeSelector& selector) {
  RetrievalRun run;
  const CaptionPool pool = retrieve_caption_pool(captions, cues, tau);
  run.working_set = induce_primitive_subset(pool, snapshot);
  std::vector<Cluster> clusters;
  if (!run.working_set.empty()) {
    const auto graph =
        build_adjacency(snapshot, run.working_set, config.r_adj, config.cooccurrence_edges);
    auto result = agglomerate(snapshot, run.working_set, cues, graph, config.delta_bar);
    clusters = std::move(result.clusters);
    run.trace = std::move(result.trace);
  }
  const Grouping groups = group_captions(pool, clusters, snapshot);
  auto reps = select_representatives(groups, clusters, cues, snapshot, tau);
  auto text = rank_evidence(std::move(reps), config.K, snapshot);
  const auto kfs = select_keyframes(text, selector, snapshot, config.keyframe_tol);
  run.evidence = assemble_evidence(pool, std::move(clusters), groups, std::move(text), kfs, config);
  return run;
}

}  // namespace star

namespace star {
namespace {

Cluster pseudo_cluster(int id, std::vector<RecordId> members, const MemorySnapshot& snapshot,
                       const TaskCueSet& cues) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  Cluster cl;
  cl.id = id;
  cl.conditional.assign(cues.size() + 1, 0.0);
  if (members.empty()) {
    cl.conditional[0] = 1.0;
  } else {
    for (RecordId m : members) {
      const auto row = relevance_of(snapshot.primitive(m).feature, cues);
      for (std::size_t y = 0; y < row.size(); ++y) {
        cl.conditional[y] += row[y] / static_cast<double>(members.size());
      }
    }
  }
  const auto total = snapshot.primitives().size();
  cl.prior = total == 0 ? 0.0 : static_cast<double>(members.size()) / static_cast<double>(total);
  cl.members = std::move(members);
  return cl;
}

bool shares_token(const std::string& text, const TaskCueSet& cues) {
  const auto tokens = tokenize(text);
  for (const auto& cue : cues.cues) {
    for (const auto& t : tokenize(cue.text)) {
      if (std::find(tokens.begin(), tokens.end(), t) != tokens.end()) return true;
    }
  }
  return false;
}

EvidenceSet package(std::vector<RankedEvidence> text, std::vector<Cluster> clusters,
                    std::size_t pool_size, const MemorySnapshot& snapshot,
                    const RetrievalConfig& config, const KeyframeSelector& selector,
                    std::string stage) {
  EvidenceSet ev;
  const auto kfs = select_keyframes(text, selector, snapshot, config.keyframe_tol);
  for (const auto* k : kfs.keyframes) ev.keyframes.push_back(*k);
  ev.missing_keyframes = kfs.missing;
  ev.text = std::move(text);
  ev.clusters = std::move(clusters);
  ev.pool_size = pool_size;
  ev.tau = 0.0;
  ev.stage = std::move(stage);
  ev.config = config;
  return ev;
}

}  // namespace

EvidenceSet retrieve_topk_evidence(const MemorySnapshot& snapshot, const VectorIndex& captions,
                                   const TaskCueSet& cues, const RetrievalConfig& config,
                                   const KeyframeSelector& selector, bool lexical_gate) {
  // Score every caption by its best cue, then keep the K best.
  std::unordered_map<RecordId, double> best;
  for (const auto& cue : cues.cues) {
    for (const auto& hit : captions.search_above_threshold(cue.embedding, 0.0)) {
      auto [it, inserted] = best.emplace(hit.record_id, hit.score);
      if (!inserted) it->second = std::max(it->second, hit.score);
    }
  }
  std::vector<SearchHit> hits;
  for (auto [id, score] : best) {
    if (lexical_gate && (score <= 0.0 || !shares_token(snapshot.caption(id).text, cues))) continue;
    hits.push_back({id, score});
  }
  std::sort(hits.begin(), hits.end(), hit_order);
  if (hits.size() > config.K) hits.resize(config.K);

  std::vector<RankedEvidence> text;
  std::vector<Cluster> clusters;
  int rank = 0;
  double last = -1.0;
  for (const auto& h : hits) {
    const auto& c = snapshot.caption(h.record_id);
    const int id = static_cast<int>(clusters.size());
    clusters.push_back(pseudo_cluster(id, c.primitive_ids, snapshot, cues));
    if (h.score != last) {
      ++rank;
      last = h.score;
    }
    text.push_back({id, c.id, h.score, rank, c.t_start, c.t_end, c.text});
  }
  return package(std::move(text), std::move(clusters), best.size(), snapshot, config, selector,
                 "topk");
}

EvidenceSet retrieve_object_evidence(const MemorySnapshot& snapshot, const VectorIndex& primitives,
                                     const TaskCueSet& cues, const RetrievalConfig& config,
                                     const KeyframeSelector& selector) {
  std::unordered_map<RecordId, double> best;
  for (const auto& cue : cues.cues) {
    for (const auto& hit : primitives.search_topk(cue.embedding, config.K)) {
      auto [it, inserted] = best.emplace(hit.record_id, hit.score);
      if (!inserted) it->second = std::max(it->second, hit.score);
    }
  }
  std::vector<SearchHit> hits;
  for (auto [id, score] : best) hits.push_back({id, score});
  std::sort(hits.begin(), hits.end(), hit_order);

  // Latest caption listing each primitive.
  std::unordered_map<RecordId, const CaptionRecord*> latest;
  for (const auto& c : snapshot.captions()) {
    for (RecordId pid : c.primitive_ids) latest[pid] = &c;
  }

  std::vector<RankedEvidence> text;
  std::vector<Cluster> clusters;
  std::unordered_set<RecordId> used;
  int rank = 0;
  double last = -1.0;
  for (const auto& h : hits) {
    if (text.size() == config.K) break;
    auto it = latest.find(h.record_id);
    if (it == latest.end() || !used.insert(it->second->id).second) continue;
    const auto& c = *it->second;
    const int id = static_cast<int>(clusters.size());
    clusters.push_back(pseudo_cluster(id, {h.record_id}, snapshot, cues));
    if (h.score != last) {
      ++rank;
      last = h.score;
    }
    text.push_back({id, c.id, h.score, rank, c.t_start, c.t_end, c.text});
  }
  return package(std::move(text), std::move(clusters), hits.size(), snapshot, config, selector,
                 "object");
}

}  // namespace star
