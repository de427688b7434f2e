#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "star/config.hpp"
#include "star/ib_clustering.hpp"
#include "star/memory_store.hpp"
#include "star/task_relevance.hpp"
#include "star/vector_index.hpp"

namespace star {

// High-recall caption pool: every caption scoring >= tau against some cue,
// scored by its best cue, in hit_order.
struct CaptionPool {
  std::vector<SearchHit> hits;
  double tau = 0.0;

  bool empty() const { return hits.empty(); }
  bool contains(RecordId caption_id) const;
};

CaptionPool retrieve_caption_pool(const VectorIndex& captions, const TaskCueSet& cues, double tau);

// Union of the primitive ids listed by pool captions, ascending.
std::vector<RecordId> induce_primitive_subset(const CaptionPool& pool,
                                              const MemorySnapshot& snapshot);

struct CaptionGroup {
  int cluster_id = 0;
  std::vector<RecordId> caption_ids;  // pool order
};

struct Grouping {
  std::vector<CaptionGroup> groups;  // one per cluster with a non-empty group, by cluster id
  std::vector<RecordId> ungrouped;   // pool captions touching no cluster
};

// A caption joins the group of every cluster sharing a primitive with it.
Grouping group_captions(const CaptionPool& pool, std::span<const Cluster> clusters,
                        const MemorySnapshot& snapshot);

struct Representative {
  int cluster_id = 0;
  RecordId caption_id = 0;
  double score = 0.0;           // max-over-cues caption similarity
  double task_mass = 0.0;       // 1 - p(null | cluster)
  double t_start = 0.0;
  double affinity = 0.0;        // best cue similarity among the cluster's members
  std::size_t cue_hits = 0;     // most cues any member matches at tau
};

// Best caption of each group: highest score, then earlier t_start, then
// lower caption id. tau only feeds cue_hits.
std::vector<Representative> select_representatives(const Grouping& groups,
                                                   std::span<const Cluster> clusters,
                                                   const TaskCueSet& cues,
                                                   const MemorySnapshot& snapshot,
                                                   double tau = 0.0);

struct RankedEvidence {
  int cluster_id = 0;
  RecordId caption_id = 0;
  double score = 0.0;
  int rank = 0;  // 1-based dense rank over score
  double t_start = 0.0;
  double t_end = 0.0;
  std::string text;
};

// Orders by score, then cue hits, cluster affinity, task mass, then t_start,
// caption id and cluster id; drops repeated captions (first occurrence wins) and keeps K.
std::vector<RankedEvidence> rank_evidence(std::vector<Representative> representatives,
                                          std::size_t K, const MemorySnapshot& snapshot);

class KeyframeSelector {
 public:
  virtual ~KeyframeSelector() = default;
  virtual std::vector<double> select(std::span<const RankedEvidence> text,
                                     const MemorySnapshot& snapshot) const = 0;
};

// Clip midpoints of the first min(3, |text|) entries.
class MidpointKeyframeSelector final : public KeyframeSelector {
 public:
  explicit MidpointKeyframeSelector(std::size_t count = 3) : count_(count) {}
  std::vector<double> select(std::span<const RankedEvidence> text,
                             const MemorySnapshot& snapshot) const override;

 private:
  std::size_t count_;
};

KeyframeLookup select_keyframes(std::span<const RankedEvidence> text,
                                const KeyframeSelector& selector, const MemorySnapshot& snapshot,
                                double tol = 1.0);

// R = R_text (+) R_img plus the debugging context that produced it.
struct EvidenceSet {
  std::vector<RankedEvidence> text;
  std::vector<KeyframeRecord> keyframes;
  std::vector<double> missing_keyframes;
  std::vector<Cluster> clusters;
  std::vector<RecordId> ungrouped;
  std::size_t pool_size = 0;
  double tau = 0.0;
  std::string stage = "star";  // "star", "topk" or "object"
  RetrievalConfig config;

  bool empty() const { return text.empty(); }
  const Cluster* find_cluster(int id) const;

  // Canonical single-object JSON: sorted keys, floats at 9 significant digits.
  std::string to_canonical() const;
};

// Packages the pieces and checks that they agree. Throws InconsistentComponents.
EvidenceSet assemble_evidence(const CaptionPool& pool, std::vector<Cluster> clusters,
                              const Grouping& groups, std::vector<RankedEvidence> text,
                              const KeyframeLookup& keyframes, const RetrievalConfig& config);

struct RetrievalRun {
  EvidenceSet evidence;
  MergeTrace trace;
  std::vector<RecordId> working_set;
};

// Whole text pipeline: pool, induced subset, IB clusters, groups,
// representatives, ranking and keyframe fusion, at the given tau.
RetrievalRun retrieve_evidence(const MemorySnapshot& snapshot, const VectorIndex& captions,
                               const TaskCueSet& cues, const RetrievalConfig& config, double tau,
                               const KeyframeSelector& selector);

// Plain cosine top-K over captions with no clustering. Each entry becomes its
// own pseudo-cluster over the caption's primitives. With lexical_gate set, a
// caption must share at least one token with some cue.
EvidenceSet retrieve_topk_evidence(const MemorySnapshot& snapshot, const VectorIndex& captions,
                                   const TaskCueSet& cues, const RetrievalConfig& config,
                                   const KeyframeSelector& selector, bool lexical_gate);

// Retrieval over primitive captions only: the K best primitives, each reported
// through the latest caption that lists it.
EvidenceSet retrieve_object_evidence(const MemorySnapshot& snapshot, const VectorIndex& primitives,
                                     const TaskCueSet& cues, const RetrievalConfig& config,
                                     const KeyframeSelector& selector);

}  // namespace star
