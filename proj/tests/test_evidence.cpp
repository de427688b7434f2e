#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "star/agent.hpp"
#include "star/error.hpp"
#include "star/evidence.hpp"
#include "star/scenario.hpp"
#include "support/fixtures.hpp"

using namespace star;

namespace {

struct Tiny {
  RefHashEmbedder embedder;
  MemorySnapshot snapshot = fixtures::embed_and_seal(fixtures::tiny_parts(), embedder);
  VectorIndex index = VectorIndex::over_captions(snapshot);

  TaskCueSet cues(std::vector<std::string> texts) const {
    return TaskCueSet::from_texts(texts, embedder);
  }
};

struct Synthetic {
  RefHashEmbedder embedder;
  SyntheticScenario scenario = generate_synthetic_memory(ScenarioSpec{}, embedder);
  VectorIndex index = VectorIndex::over_captions(scenario.snapshot);
};

const Synthetic& synthetic() {
  static const Synthetic s;
  return s;
}

Cluster make_cluster(int id, std::vector<RecordId> members, std::size_t m) {
  Cluster c;
  c.id = id;
  c.members = std::move(members);
  c.prior = 0.1;
  c.conditional.assign(m + 1, 1.0 / static_cast<double>(m + 1));
  return c;
}

}  // namespace

TEST(CaptionPool, IsUnionOfPerCueThresholdSearches) {
  Tiny t;
  const auto cues = t.cues({"police call pole", "white box"});
  for (double tau : {0.0, 0.2, 0.4, 0.55, 0.8, 1.0}) {
    const auto pool = retrieve_caption_pool(t.index, cues, tau);
    std::set<RecordId> expected;
    for (const auto& c : t.snapshot.captions()) {
      double best = 0.0;
      for (const auto& q : cues.cues) best = std::max(best, similarity(c.embedding, q.embedding));
      if (best >= tau) expected.insert(c.id);
    }
    std::set<RecordId> got;
    for (const auto& h : pool.hits) got.insert(h.record_id);
    EXPECT_EQ(got, expected) << "tau " << tau;
    EXPECT_TRUE(std::is_sorted(pool.hits.begin(), pool.hits.end(), hit_order));
    EXPECT_EQ(pool.tau, tau);
  }
}

TEST(CaptionPool, ScoresAreBestCue) {
  Tiny t;
  const auto cues = t.cues({"police call pole", "forklift"});
  const auto pool = retrieve_caption_pool(t.index, cues, 0.0);
  for (const auto& h : pool.hits) {
    const auto& c = t.snapshot.caption(h.record_id);
    double best = 0.0;
    for (const auto& q : cues.cues) best = std::max(best, similarity(c.embedding, q.embedding));
    EXPECT_DOUBLE_EQ(h.score, best);
  }
}

TEST(CaptionPool, RelaxingTauGrowsPool) {
  const auto& s = synthetic();
  const auto cues = TaskCueSet::from_texts(std::vector<std::string>{"fire hydrant"}, s.embedder);
  std::size_t prev = 0;
  for (double tau : {0.9, 0.7, 0.55, 0.45, 0.3}) {
    const auto pool = retrieve_caption_pool(s.index, cues, tau);
    EXPECT_GE(pool.hits.size(), prev);
    prev = pool.hits.size();
  }
}

TEST(InducedSubset, UnionOfListedPrimitives) {
  Tiny t;
  CaptionPool pool;
  pool.hits = {{3, 0.9}, {1, 0.8}, {6, 0.7}};
  EXPECT_EQ(induce_primitive_subset(pool, t.snapshot), (std::vector<RecordId>{1, 2, 4}));
  EXPECT_TRUE(induce_primitive_subset(CaptionPool{}, t.snapshot).empty());
}

TEST(Grouping, CaptionsJoinEveryTouchedCluster) {
  Tiny t;
  CaptionPool pool;
  pool.hits = {{1, 0.9}, {3, 0.8}, {5, 0.7}};
  const std::vector<Cluster> clusters{make_cluster(0, {1}, 1), make_cluster(1, {2, 4}, 1)};
  const auto g = group_captions(pool, clusters, t.snapshot);
  ASSERT_EQ(g.groups.size(), 2u);
  EXPECT_EQ(g.groups[0].caption_ids, (std::vector<RecordId>{1}));
  EXPECT_EQ(g.groups[1].caption_ids, (std::vector<RecordId>{1, 3}));
  EXPECT_EQ(g.ungrouped, (std::vector<RecordId>{5}));
}

TEST(Representatives, BestScoreThenEarlierThenLowerId) {
  Tiny t;
  const auto cues = t.cues({"yellow police call pole again"});
  // Captions 3 and 6 both describe the pole; 6 matches the cue text exactly.
  Grouping g;
  g.groups = {{0, {3, 6}}};
  const std::vector<Cluster> clusters{make_cluster(0, {4}, 1)};
  const auto reps = select_representatives(g, clusters, cues, t.snapshot);
  ASSERT_EQ(reps.size(), 1u);
  EXPECT_EQ(reps[0].caption_id, 6);
  EXPECT_NEAR(reps[0].score, 1.0, 1e-12);

  // Same caption text twice: the earlier clip wins.
  auto parts = fixtures::tiny_parts();
  parts.captions[5].text = parts.captions[2].text;
  const auto snap = fixtures::embed_and_seal(parts, t.embedder);
  const auto reps2 = select_representatives(g, clusters, cues, snap);
  EXPECT_EQ(reps2[0].caption_id, 3);
}

TEST(Representatives, UnknownClusterIsInconsistent) {
  Tiny t;
  Grouping g;
  g.groups = {{7, {3}}};
  const std::vector<Cluster> clusters{make_cluster(0, {4}, 1)};
  try {
    select_representatives(g, clusters, t.cues({"pole"}), t.snapshot);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InconsistentComponents);
  }
}

TEST(Ranking, OrderTiesAndTruncation) {
  Tiny t;
  std::vector<Representative> reps{
      {0, 1, 0.7, 0.5, 3, 0.9},  {1, 2, 0.9, 0.5, 9, 0.9},  {2, 3, 0.7, 0.5, 12, 0.95},
      {3, 4, 0.7, 0.8, 15, 0.9}, {4, 5, 0.7, 0.8, 18, 0.9}, {5, 2, 0.6, 0.5, 9, 0.9},
  };
  const auto out = rank_evidence(reps, 10, t.snapshot);
  std::vector<RecordId> ids;
  std::vector<int> ranks;
  for (const auto& e : out) {
    ids.push_back(e.caption_id);
    ranks.push_back(e.rank);
  }
  // 0.9 first; among 0.7: affinity 0.95, then task mass 0.8 by t_start, then 0.5.
  // The second appearance of caption 2 is dropped.
  EXPECT_EQ(ids, (std::vector<RecordId>{2, 3, 4, 5, 1}));
  EXPECT_EQ(ranks, (std::vector<int>{1, 2, 2, 2, 2}));
  EXPECT_EQ(out[0].text, t.snapshot.caption(2).text);

  const auto top2 = rank_evidence(reps, 2, t.snapshot);
  ASSERT_EQ(top2.size(), 2u);
  EXPECT_EQ(top2[1].caption_id, 3);
  EXPECT_THROW(rank_evidence(reps, 0, t.snapshot), Error);
}

TEST(Ranking, CueHitsDecideSharedCaption) {
  Tiny t;
  // Two clusters share caption 1; the one whose member matches more cues keeps it.
  std::vector<Representative> reps{{0, 1, 0.7, 0.5, 3, 1.0, 1}, {1, 1, 0.7, 0.5, 3, 0.8, 2}};
  const auto out = rank_evidence(reps, 6, t.snapshot);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cluster_id, 1);
}

TEST(Keyframes, MidpointOfClipResolvesToEarlierNeighbour) {
  Tiny t;
  RankedEvidence e;
  e.caption_id = 2;
  e.t_start = 9;
  e.t_end = 12;
  const std::vector<RankedEvidence> text{e};
  const auto kf = select_keyframes(text, MidpointKeyframeSelector{}, t.snapshot, 1.0);
  ASSERT_EQ(kf.keyframes.size(), 1u);
  EXPECT_EQ(kf.keyframes[0]->timestamp, 10.0);
  EXPECT_TRUE(kf.missing.empty());
}

TEST(Keyframes, AtMostThreeAndNoneForEmptyText) {
  Tiny t;
  std::vector<RankedEvidence> text;
  for (int i = 0; i < 5; ++i) {
    RankedEvidence e;
    e.t_start = 20.0 * i;
    e.t_end = 20.0 * i + 3;
    text.push_back(e);
  }
  EXPECT_EQ(MidpointKeyframeSelector{}.select(text, t.snapshot).size(), 3u);
  EXPECT_TRUE(select_keyframes({}, MidpointKeyframeSelector{}, t.snapshot, 1.0).keyframes.empty());
}

TEST(Assemble, RejectsInconsistentPieces) {
  Tiny t;
  CaptionPool pool;
  pool.hits = {{3, 0.9}};
  Grouping g;
  g.groups = {{0, {3}}};
  const std::vector<Cluster> clusters{make_cluster(0, {4}, 1)};
  RetrievalConfig cfg;
  RankedEvidence good{0, 3, 0.9, 1, 12, 15, "x"};
  EXPECT_NO_THROW(assemble_evidence(pool, clusters, g, {good}, {}, cfg));

  auto expect_inconsistent = [&](std::vector<RankedEvidence> text, const RetrievalConfig& c) {
    try {
      assemble_evidence(pool, clusters, g, std::move(text), {}, c);
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InconsistentComponents);
    }
  };
  RankedEvidence not_pooled = good;
  not_pooled.caption_id = 1;
  expect_inconsistent({not_pooled}, cfg);
  RankedEvidence wrong_cluster = good;
  wrong_cluster.cluster_id = 5;
  expect_inconsistent({wrong_cluster}, cfg);
  expect_inconsistent({good, good}, cfg);
  RetrievalConfig k0 = cfg;
  k0.K = 1;
  RankedEvidence other = good;
  other.cluster_id = 1;
  expect_inconsistent({good, other}, k0);
}

TEST(RetrieveEvidence, TinyPolePicksThePole) {
  Tiny t;
  const auto cues = t.cues({"police call pole"});
  RetrievalConfig cfg;
  const auto run = retrieve_evidence(t.snapshot, t.index, cues, cfg, cfg.tau, MidpointKeyframeSelector{});
  ASSERT_FALSE(run.evidence.empty());
  const auto& top = run.evidence.text.front();
  const Cluster* cl = run.evidence.find_cluster(top.cluster_id);
  ASSERT_NE(cl, nullptr);
  EXPECT_NE(std::find(cl->members.begin(), cl->members.end(), 4), cl->members.end());
}

TEST(RetrieveEvidence, EmptyPoolGivesEmptyEvidence) {
  Tiny t;
  const auto cues = t.cues({"zebra giraffe"});
  RetrievalConfig cfg;
  const auto run = retrieve_evidence(t.snapshot, t.index, cues, cfg, 0.99, MidpointKeyframeSelector{});
  EXPECT_TRUE(run.evidence.empty());
  EXPECT_TRUE(run.working_set.empty());
}

// Properties over every task of the synthetic scenario.
TEST(RetrieveEvidence, SyntheticInvariants) {
  const auto& s = synthetic();
  RetrievalConfig cfg;
  for (const auto& task : s.scenario.tasks) {
    const auto dir = plan_query(task.query);
    const auto cues = TaskCueSet::from_texts(dir.cues, s.embedder, cfg.alpha, cfg.gamma_topk);
    const auto run =
        retrieve_evidence(s.scenario.snapshot, s.index, cues, cfg, cfg.tau, MidpointKeyframeSelector{});
    const auto& ev = run.evidence;
    EXPECT_LE(ev.text.size(), cfg.K) << task.id;
    std::set<int> clusters;
    std::set<RecordId> captions;
    for (const auto& e : ev.text) {
      EXPECT_TRUE(clusters.insert(e.cluster_id).second) << task.id;
      EXPECT_TRUE(captions.insert(e.caption_id).second) << task.id;
      EXPECT_GE(e.score, cfg.tau) << task.id;
    }
    // Every working-set primitive lands in exactly one cluster.
    std::vector<RecordId> covered;
    for (const auto& c : ev.clusters) covered.insert(covered.end(), c.members.begin(), c.members.end());
    std::sort(covered.begin(), covered.end());
    EXPECT_EQ(covered, run.working_set) << task.id;
    EXPECT_LE(ev.keyframes.size(), 3u);
  }
}

TEST(RetrieveEvidence, CanonicalFormIsStable) {
  const auto& s = synthetic();
  RetrievalConfig cfg;
  const auto cues = TaskCueSet::from_texts(std::vector<std::string>{"white box"}, s.embedder);
  const auto a = retrieve_evidence(s.scenario.snapshot, s.index, cues, cfg, cfg.tau,
                                   MidpointKeyframeSelector{});
  const auto b = retrieve_evidence(s.scenario.snapshot, s.index, cues, cfg, cfg.tau,
                                   MidpointKeyframeSelector{});
  EXPECT_EQ(a.evidence.to_canonical(), b.evidence.to_canonical());
  EXPECT_EQ(a.trace.to_jsonl(), b.trace.to_jsonl());
}

TEST(Baselines, TopkHasNoClusteringAndObjectUsesPrimitives) {
  const auto& s = synthetic();
  RetrievalConfig cfg;
  const auto cues = TaskCueSet::from_texts(std::vector<std::string>{"forklift"}, s.embedder);
  const auto topk = retrieve_topk_evidence(s.scenario.snapshot, s.index, cues, cfg,
                                           MidpointKeyframeSelector{}, false);
  EXPECT_EQ(topk.text.size(), cfg.K);
  EXPECT_EQ(topk.stage, "topk");
  for (std::size_t i = 1; i < topk.text.size(); ++i) EXPECT_LE(topk.text[i].score, topk.text[i - 1].score);

  const auto prims = VectorIndex::over_primitives(s.scenario.snapshot);
  const auto obj = retrieve_object_evidence(s.scenario.snapshot, prims, cues, cfg,
                                            MidpointKeyframeSelector{});
  EXPECT_EQ(obj.stage, "object");
  ASSERT_FALSE(obj.text.empty());
  for (const auto& c : obj.clusters) EXPECT_EQ(c.members.size(), 1u);
}

TEST(Baselines, LexicalGateDropsUnrelatedCaptions) {
  const auto& s = synthetic();
  RetrievalConfig cfg;
  const auto cues = TaskCueSet::from_texts(std::vector<std::string>{"hydrant"}, s.embedder);
  const auto gated = retrieve_topk_evidence(s.scenario.snapshot, s.index, cues, cfg,
                                            MidpointKeyframeSelector{}, true);
  for (const auto& e : gated.text) EXPECT_NE(e.text.find("hydrant"), std::string::npos);
}
