#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "star/agent.hpp"
#include "star/embedding.hpp"
#include "star/geometry.hpp"
#include "star/memory_store.hpp"

namespace star {

// Parameters of the synthetic warehouse. The layout (four shelves, a staging
// area, a loop route through the aisles) is fixed; the seed drives object
// jitter, which white box carries the "digital twin" label and task sampling.
// Spec files use `key = value` lines with `#` comments, like config files.
struct ScenarioSpec {
  std::uint64_t seed = 42;
  double horizon = 1200.0;         // seconds
  double clip_length = 3.0;        // M, seconds
  double keyframe_rate = 1.0;      // Hz
  std::size_t tasks = 100;         // 40% spatial, 20% binary, 20% descriptive, 20% multimodal
  std::size_t temporal_tasks = 0;  // extra "when did you last see" tasks
  std::size_t white_boxes = 10;    // look-alike boxes in the staging area
  double speed = 1.0;              // m/s along the route
  double visibility_range = 8.0;   // meters
  double fov_deg = 90.0;           // full horizontal field of view

  void validate() const;  // throws InvalidSpec
  void set(std::string_view key, std::string_view value);
  void merge_file(const std::filesystem::path& path);
  std::vector<std::pair<std::string, std::string>> entries() const;
};

enum class TaskCategory { Spatial, Binary, Descriptive, Multimodal, Temporal };

std::string_view to_string(TaskCategory c);
TaskCategory parse_task_category(std::string_view s);

struct QATask {
  std::string id;
  TaskCategory category = TaskCategory::Spatial;
  QueryKind kind = QueryKind::Spatial;
  Query query;
  RecordId target = 0;                  // 0 when the queried object does not exist
  std::optional<Vec3> gt_position;      // spatial
  std::optional<double> gt_time;        // temporal: last detection
  std::optional<bool> gt_binary;        // binary
  std::vector<std::string> key_tokens;  // descriptive
  // Every timestamp at which the target was observed; recall counts a hit on
  // any of them.
  std::vector<double> evidence_times;
  std::optional<double> spatial_threshold;  // overrides the scoring default
};

struct SyntheticMemory {
  MemoryParts parts;  // records without vectors
  std::vector<QATask> tasks;
};

// Deterministic for a given spec. Throws InvalidSpec.
SyntheticMemory generate_synthetic_parts(const ScenarioSpec& spec);

struct SyntheticScenario {
  MemorySnapshot snapshot;
  std::vector<QATask> tasks;
};

// generate_synthetic_parts, embedded with `embedder` and sealed.
SyntheticScenario generate_synthetic_memory(const ScenarioSpec& spec, const Embedder& embedder);

}  // namespace star
