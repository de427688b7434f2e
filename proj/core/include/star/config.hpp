#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace star {

// Retrieval knobs. Config files use one `key = value` per line; `#` starts a
// comment. Keys match the field names below.
struct RetrievalConfig {
  double tau = 0.55;              // caption pool similarity threshold
  double alpha = 0.1;             // null-task floor
  std::size_t gamma_topk = 2;     // cues kept per primitive
  double delta_bar = 0.05;        // fractional information-loss budget per merge
  std::size_t K = 6;              // representatives kept
  double r_adj = 3.0;             // adjacency radius, meters
  bool cooccurrence_edges = true;
  int max_rounds = 3;
  double keyframe_tol = 1.0;      // seconds
  std::string embedder = "ref-hash-v1";
  std::size_t embedding_dim = 64;
  std::optional<std::string> external_generator_url;
  double tau_relaxation = 0.1;    // subtracted from tau in round 2
  double generator_timeout_s = 30.0;

  // Throws InvalidConfig on any out-of-range field.
  void validate() const;

  // Sets one field from its text form. Throws InvalidConfig on unknown keys
  // or unparsable values.
  void set(std::string_view key, std::string_view value);

  // Reads key = value lines on top of the current values.
  void merge_file(const std::filesystem::path& path);

  // Every field as (key, text value), sorted by key.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

}  // namespace star
