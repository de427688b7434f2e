#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "star/memory_store.hpp"
#include "star/scenario.hpp"

namespace star {

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

// A snapshot bundle is a directory holding captions.jsonl, primitives.jsonl and
// keyframes.jsonl (vectors included, canonical order) plus manifest.json with
// the embedding scheme, horizon, record counts, the SHA-256 of each file and
// the config that built it. Files are rewritten in full.
void write_snapshot_bundle(const MemorySnapshot& snapshot, const std::filesystem::path& dir,
                           const ConfigEcho& config = {});

struct LoadedBundle {
  MemorySnapshot snapshot;
  ConfigEcho config;
};

// Throws Io when files are missing or a hash does not match, plus every
// ingest error.
LoadedBundle load_snapshot_bundle(const std::filesystem::path& dir);

// Hex SHA-256 of a file's bytes. Throws Io.
std::string sha256_file(const std::filesystem::path& path);

// Raw record files without vectors, tasks.jsonl and scenario.json.
void write_scenario_files(const SyntheticMemory& memory, const ScenarioSpec& spec,
                          const std::filesystem::path& dir);

void write_tasks(const std::vector<QATask>& tasks, const std::filesystem::path& path);
// Throws MalformedRecord.
std::vector<QATask> read_tasks(const std::filesystem::path& path);

}  // namespace star
