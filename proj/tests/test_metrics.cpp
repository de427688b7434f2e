#include <gtest/gtest.h>

#include "star/error.hpp"
#include "star/metrics.hpp"

using namespace star;

namespace {

RankedEvidence clip(double t0, double t1, RecordId id = 1) {
  RankedEvidence e;
  e.caption_id = id;
  e.t_start = t0;
  e.t_end = t1;
  return e;
}

EvidenceSet with_text(std::vector<RankedEvidence> text) {
  EvidenceSet ev;
  ev.text = std::move(text);
  return ev;
}

QATask spatial_task(Vec3 gt) {
  QATask t;
  t.kind = QueryKind::Spatial;
  t.gt_position = gt;
  return t;
}

Answer spatial_answer(Vec3 p) {
  Answer a;
  a.kind = QueryKind::Spatial;
  a.found = true;
  a.position = p;
  return a;
}

struct Bench {
  RefHashEmbedder embedder;
  SyntheticScenario scenario = generate_synthetic_memory(ScenarioSpec{}, embedder);
  MetricReport star = run_benchmark(scenario.snapshot, scenario.tasks, Method::Star, {}, embedder);
  MetricReport naive = run_benchmark(scenario.snapshot, scenario.tasks, Method::NaiveTopk, {}, embedder);
};

const Bench& bench() {
  static const Bench b;
  return b;
}

}  // namespace

TEST(Recall, ToleranceWindow) {
  QATask t;
  t.evidence_times = {100.0};
  EXPECT_EQ(recall_at_k(with_text({clip(95, 98)}), t, 6), 1);     // 100 <= 98 + 5
  EXPECT_EQ(recall_at_k(with_text({clip(105, 108)}), t, 6), 1);   // 100 >= 105 - 5
  EXPECT_EQ(recall_at_k(with_text({clip(105.5, 108)}), t, 6), 0);
  EXPECT_EQ(recall_at_k(with_text({clip(90, 94.9)}), t, 6), 0);
  EXPECT_EQ(recall_at_k(with_text({}), t, 6), 0);
}

TEST(Recall, OnlyFirstKEntriesCount) {
  QATask t;
  t.evidence_times = {500.0, 20.0};
  const auto ev = with_text({clip(300, 303), clip(301, 304), clip(18, 21)});
  EXPECT_EQ(recall_at_k(ev, t, 2), 0);
  EXPECT_EQ(recall_at_k(ev, t, 3), 1);
}

TEST(Redundancy, Examples) {
  EXPECT_EQ(redundancy(std::vector<RankedEvidence>{}), 0.0);
  EXPECT_EQ(redundancy(std::vector<RankedEvidence>{clip(0, 3)}), 0.0);
  // Midpoints 1.5, 101.5, 201.5: all alone.
  EXPECT_EQ(redundancy(std::vector<RankedEvidence>{clip(0, 3), clip(100, 103), clip(200, 203)}), 0.0);
  // 1.5, 4.5, 11.5 fit one 10 s window; 300 is apart.
  EXPECT_DOUBLE_EQ(redundancy(std::vector<RankedEvidence>{clip(0, 3), clip(3, 6), clip(10, 13),
                                                          clip(300, 303)}),
                   0.75);
}

TEST(Score, SpatialThresholdIsStrict) {
  const auto t = spatial_task({0, 0, 0});
  EXPECT_TRUE(score_answer(spatial_answer({4.9, 0, 0}), t).success);
  const auto at5 = score_answer(spatial_answer({5, 0, 0}), t);
  EXPECT_FALSE(at5.success);
  EXPECT_DOUBLE_EQ(*at5.error, 5.0);
  Answer none;
  none.kind = QueryKind::Spatial;
  EXPECT_FALSE(score_answer(none, t).error.has_value());
}

TEST(Score, TemporalThresholdIsInclusive) {
  QATask t;
  t.kind = QueryKind::Temporal;
  t.query.issued_at = 1000;
  t.gt_time = 400;  // truth: 600 s ago
  Answer a;
  a.kind = QueryKind::Temporal;
  a.found = true;
  a.time_ago = 720;
  EXPECT_TRUE(score_answer(a, t).success);
  a.time_ago = 721;
  EXPECT_FALSE(score_answer(a, t).success);
  a.time_ago = 480;
  EXPECT_TRUE(score_answer(a, t).success);
}

TEST(Score, BinaryAndDescriptive) {
  QATask b;
  b.kind = QueryKind::Binary;
  b.gt_binary = false;
  Answer a;
  a.kind = QueryKind::Binary;
  a.found = false;
  EXPECT_TRUE(score_answer(a, b).success);
  a.found = true;
  a.text = "yes";
  EXPECT_FALSE(score_answer(a, b).success);

  QATask d;
  d.kind = QueryKind::Descriptive;
  d.key_tokens = {"green"};
  Answer da;
  da.kind = QueryKind::Descriptive;
  da.found = true;
  da.text = "Green ladder near shelf 3";
  EXPECT_TRUE(score_answer(da, d).success);
  da.text = "greenish ladder";
  EXPECT_FALSE(score_answer(da, d).success);
}

TEST(Score, KindMismatch) {
  Answer a;
  a.kind = QueryKind::Temporal;
  try {
    score_answer(a, spatial_task({0, 0, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KindMismatch);
  }
}

TEST(Method, Parsing) {
  EXPECT_EQ(parse_method("star"), Method::Star);
  EXPECT_EQ(parse_method("naive_topk"), Method::NaiveTopk);
  EXPECT_EQ(parse_method("object_caption"), Method::ObjectCaption);
  EXPECT_EQ(to_string(Method::NaiveTopk), "naive_topk");
  try {
    parse_method("bogus");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownMethod);
  }
}

TEST(Benchmark, ReportShape) {
  const auto& r = bench().star;
  EXPECT_EQ(r.tasks, 100u);
  EXPECT_EQ(r.outcomes.size(), 100u);
  ASSERT_NE(r.find(TaskCategory::Spatial), nullptr);
  EXPECT_EQ(r.find(TaskCategory::Spatial)->tasks, 40u);
  EXPECT_EQ(r.find(TaskCategory::Temporal), nullptr);
  EXPECT_GE(r.recall_at_k, 0.0);
  EXPECT_LE(r.recall_at_k, 1.0);
  EXPECT_EQ(r.to_jsonl().find("latency"), std::string::npos);
  EXPECT_NE(r.to_jsonl(true).find("latency"), std::string::npos);
}

TEST(Benchmark, DeterministicAcrossThreads) {
  const auto& b = bench();
  BenchmarkOptions opt;
  opt.threads = 4;
  const auto again = run_benchmark(b.scenario.snapshot, b.scenario.tasks, Method::Star, {}, b.embedder, opt);
  EXPECT_EQ(again.to_jsonl(), b.star.to_jsonl());
}

TEST(Benchmark, ClusteringIsLessRedundantThanTopk) {
  EXPECT_LE(bench().star.redundancy, bench().naive.redundancy);
}

TEST(Benchmark, RecallGrowsWithK) {
  const auto& b = bench();
  double prev = -1.0;
  for (std::size_t k : {1, 3, 6}) {
    RetrievalConfig cfg;
    cfg.K = k;
    const auto r = run_benchmark(b.scenario.snapshot, b.scenario.tasks, Method::NaiveTopk, cfg, b.embedder);
    EXPECT_GE(r.recall_at_k, prev) << k;
    prev = r.recall_at_k;
  }
}
