#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "star/config.hpp"
#include "star/embedding.hpp"
#include "star/evidence.hpp"
#include "star/geometry.hpp"
#include "star/memory_store.hpp"
#include "star/vector_index.hpp"

namespace star {

enum class QueryKind { Spatial, Temporal, Binary, Descriptive };
enum class Tool { Text, Time, Position };

std::string_view to_string(QueryKind kind);
QueryKind parse_query_kind(std::string_view s);
std::string_view to_string(Tool tool);

struct Query {
  std::string text;
  // Text stand-in for an image attached by the user ("this one").
  std::optional<std::string> observation;
  // "Now" in memory seconds; may lie past the horizon.
  double issued_at = 0.0;
};

struct PlannerDirective {
  std::vector<std::string> cues;
  QueryKind kind = QueryKind::Descriptive;
  Tool tool = Tool::Text;
  int round = 1;
  double tau = 0.0;
};

// Keyword planner. Kind: "where" -> spatial, "when"/"how long ago" ->
// temporal, leading yes/no auxiliary -> binary, otherwise descriptive. Cues are
// the runs of content words left after stop-word removal; a phrase introduced
// by "labeled"/"with"/"marked" inherits the head noun of the phrase before it.
// Observation text contributes cues the same way. Throws UnparseableQuery.
PlannerDirective plan_query(const Query& query);

// Cues plus single-word synonym variants ("pole" <-> "post", ...).
std::vector<std::string> expand_synonyms(const std::vector<std::string>& cues);

struct Answer {
  QueryKind kind = QueryKind::Descriptive;
  bool found = false;
  std::optional<Vec3> position;
  std::optional<double> time_ago;
  std::string text;
  EvidenceSet evidence;
  int rounds_used = 0;

  std::string to_canonical() const;
};

// "just now", "45 secs ago", "1 min ago", "8 mins ago", "3 hours ago".
std::string render_time_ago(double seconds);

class AnswerGenerator {
 public:
  virtual ~AnswerGenerator() = default;
  virtual Answer generate(const Query& query, const PlannerDirective& directive,
                          const EvidenceSet& evidence, const MemorySnapshot& snapshot) const = 0;
};

// Deterministic extractive answers. Spatial and temporal answers pick, across
// the clusters behind the text evidence, the member matching the most cues at
// the round's tau (then closest to all cues joined, then the largest summed
// cue similarity). Spatial: its bbox center. Temporal: issued_at minus its
// latest detection. Binary: "yes" iff some evidence caption or keyframe
// annotation contains some cue as a contiguous phrase. Descriptive: top
// caption plus the nearest keyframe annotation.
class ExtractiveAnswerGenerator final : public AnswerGenerator {
 public:
  explicit ExtractiveAnswerGenerator(const Embedder& embedder, double alpha = 0.1,
                                     std::size_t topk = 2)
      : embedder_(embedder), alpha_(alpha), topk_(topk) {}

  Answer generate(const Query& query, const PlannerDirective& directive,
                  const EvidenceSet& evidence, const MemorySnapshot& snapshot) const override;

 private:
  const Embedder& embedder_;
  double alpha_;
  std::size_t topk_;
};

// Posts {"query", "evidence", "kind"} as JSON to an http:// URL and expects
// {"text", "position", "time_ago"} back. One retry on failure; throws
// ExternalGenerator when both attempts fail or the response is malformed.
class HttpAnswerGenerator final : public AnswerGenerator {
 public:
  explicit HttpAnswerGenerator(std::string url,
                               std::chrono::milliseconds timeout = std::chrono::seconds(30));

  Answer generate(const Query& query, const PlannerDirective& directive,
                  const EvidenceSet& evidence, const MemorySnapshot& snapshot) const override;

  // Request body for the given inputs (exposed for tests and tooling).
  static std::string request_body(const Query& query, QueryKind kind, const EvidenceSet& evidence);
  // Parses and validates a response body. Throws ExternalGenerator.
  static Answer parse_response(std::string_view body, QueryKind kind);

 private:
  std::string base_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

struct RoundsResult {
  EvidenceSet evidence;
  std::vector<PlannerDirective> history;
  MergeTrace trace;  // from the last clustering round, if any

  int rounds_used() const { return static_cast<int>(history.size()); }
};

// Round 1: full pipeline at tau. Round 2: synonym-expanded cues at tau minus
// tau_relaxation. Round 3: cue-sharing cosine top-K without clustering. A round
// runs only if the previous one produced no text evidence.
RoundsResult run_rounds(const Query& query, const MemorySnapshot& snapshot,
                        const VectorIndex& captions, const RetrievalConfig& config,
                        const Embedder& embedder, const KeyframeSelector& selector);

struct QuerySession {
  Answer answer;
  RoundsResult rounds;
};

QuerySession answer_query(const Query& query, const MemorySnapshot& snapshot,
                          const VectorIndex& captions, const RetrievalConfig& config,
                          const Embedder& embedder, const KeyframeSelector& selector,
                          const AnswerGenerator& generator);

}  // namespace star
