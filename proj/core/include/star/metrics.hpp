#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "star/agent.hpp"
#include "star/config.hpp"
#include "star/embedding.hpp"
#include "star/evidence.hpp"
#include "star/memory_store.hpp"
#include "star/scenario.hpp"

namespace star {

inline constexpr double kRecallTolerance = 5.0;        // seconds
inline constexpr double kSpatialThreshold = 5.0;       // meters, strict
inline constexpr double kTemporalThreshold = 120.0;    // seconds, inclusive
inline constexpr double kRedundancyWindow = 10.0;      // seconds

// 1 iff one of the first k text entries has [t_start - tol, t_end + tol]
// containing one of the task's evidence times.
int recall_at_k(const EvidenceSet& evidence, const QATask& task, std::size_t k,
                double tol = kRecallTolerance);

// Largest fraction of text entries whose clip midpoints fit in one window of
// the given width. Zero unless at least two entries share a window.
double redundancy(std::span<const RankedEvidence> text, double window = kRedundancyWindow);

struct Score {
  bool success = false;
  std::optional<double> error;  // meters or seconds; absent when nothing was predicted
};

// Throws KindMismatch when answer.kind != task.kind.
Score score_answer(const Answer& answer, const QATask& task);

enum class Method { Star, NaiveTopk, ObjectCaption };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);  // throws UnknownMethod

struct TaskOutcome {
  std::string task_id;
  TaskCategory category = TaskCategory::Spatial;
  bool success = false;
  std::optional<double> error;
  int recall = 0;
  double redundancy = 0.0;
  std::optional<Vec3> position;
  std::string answer;
  int rounds_used = 0;
  std::size_t evidence_size = 0;
  double latency_ms = 0.0;
};

struct CategoryStats {
  TaskCategory category = TaskCategory::Spatial;
  std::size_t tasks = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  std::optional<double> mean_error;  // spatial/multimodal meters, temporal seconds
};

struct MetricReport {
  Method method = Method::Star;
  std::size_t k = 6;
  std::size_t tasks = 0;
  std::vector<CategoryStats> categories;  // only categories with tasks, in enum order
  double success_rate = 0.0;
  double recall_at_k = 0.0;
  double redundancy = 0.0;  // mean over tasks
  double latency_mean_ms = 0.0;
  double latency_p95_ms = 0.0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<TaskOutcome> outcomes;

  const CategoryStats* find(TaskCategory c) const;

  // Latency is wall-clock dependent and only included when asked for.
  std::string to_table(bool timing = false) const;
  std::string to_jsonl(bool timing = false) const;
};

struct BenchmarkOptions {
  bool keep_outcomes = true;
  std::size_t threads = 1;
};

// Evaluates every task with the chosen method. Star runs the full multi-round
// agent; naive_topk is plain cosine top-K over captions; object_caption
// searches primitive captions only. All methods share the planner and the
// extractive answer generator.
MetricReport run_benchmark(const MemorySnapshot& snapshot, std::span<const QATask> tasks,
                           Method method, const RetrievalConfig& config, const Embedder& embedder,
                           const BenchmarkOptions& options = {});

}  // namespace star
