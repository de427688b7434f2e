#include "star/bundle.hpp"

#include <array>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

#include "record_json.hpp"
#include "star/error.hpp"

namespace star {

namespace fs = std::filesystem;
using detail::json;

namespace {

constexpr const char* kFormat = "star-snapshot-v1";
constexpr const char* kRecordFiles[] = {"captions.jsonl", "primitives.jsonl", "keyframes.jsonl"};

// Doubles are written in their shortest round-trip form so reloading gives
// back the exact values.
void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename Range, typename Fn>
std::string jsonl(const Range& records, Fn&& to) {
  std::string out;
  for (const auto& r : records) out += to(r).dump() + "\n";
  return out;
}

std::string records_text(const MemorySnapshot& s, int which, bool vectors) {
  switch (which) {
    case 0: return jsonl(s.captions(), [&](const auto& c) { return detail::to_json(c, vectors); });
    case 1: return jsonl(s.primitives(), [&](const auto& p) { return detail::to_json(p, vectors); });
    default: return jsonl(s.keyframes(), [](const auto& k) { return detail::to_json(k); });
  }
}

json config_json(const ConfigEcho& config) {
  json j = json::object();
  for (const auto& [k, v] : config) j[k] = v;
  return j;
}

json task_to_json(const QATask& t) {
  json j = json::object();
  j["id"] = t.id;
  j["category"] = std::string(to_string(t.category));
  j["kind"] = std::string(to_string(t.kind));
  json q = json::object();
  q["text"] = t.query.text;
  q["observation"] = t.query.observation ? json(*t.query.observation) : json(nullptr);
  q["issued_at"] = t.query.issued_at;
  j["query"] = q;
  j["target"] = t.target;
  j["gt_position"] = t.gt_position ? detail::to_json(*t.gt_position) : json(nullptr);
  j["gt_time"] = t.gt_time ? json(*t.gt_time) : json(nullptr);
  j["gt_binary"] = t.gt_binary ? json(*t.gt_binary) : json(nullptr);
  j["key_tokens"] = t.key_tokens;
  j["evidence_times"] = t.evidence_times;
  j["spatial_threshold"] = t.spatial_threshold ? json(*t.spatial_threshold) : json(nullptr);
  return j;
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

QATask task_from_json(const json& j) {
  QATask t;
  t.id = j.at("id").get<std::string>();
  t.category = parse_task_category(j.at("category").get<std::string>());
  t.kind = parse_query_kind(j.at("kind").get<std::string>());
  const auto& q = j.at("query");
  t.query.text = q.at("text").get<std::string>();
  if (q.contains("observation") && !q["observation"].is_null()) {
    t.query.observation = q["observation"].get<std::string>();
  }
  t.query.issued_at = q.at("issued_at").get<double>();
  t.target = j.value("target", RecordId{0});
  auto opt = [&](const char* key) -> const json* {
    return j.contains(key) && !j[key].is_null() ? &j[key] : nullptr;
  };
  if (auto* p = opt("gt_position")) t.gt_position = vec3_from(*p);
  if (auto* p = opt("gt_time")) t.gt_time = p->get<double>();
  if (auto* p = opt("gt_binary")) t.gt_binary = p->get<bool>();
  if (auto* p = opt("key_tokens")) t.key_tokens = p->get<std::vector<std::string>>();
  if (auto* p = opt("evidence_times")) t.evidence_times = p->get<std::vector<double>>();
  if (auto* p = opt("spatial_threshold")) t.spatial_threshold = p->get<double>();
  const bool consistent = (t.kind == QueryKind::Spatial && t.gt_position) ||
                          (t.kind == QueryKind::Temporal && t.gt_time) ||
                          (t.kind == QueryKind::Binary && t.gt_binary) ||
                          t.kind == QueryKind::Descriptive;
  if (!consistent) throw std::invalid_argument("ground truth does not match task kind");
  return t;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  const std::string data = read_text(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed for " + path.string());
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

void write_snapshot_bundle(const MemorySnapshot& snapshot, const fs::path& dir,
                           const ConfigEcho& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  json files = json::object();
  for (int i = 0; i < 3; ++i) {
    const fs::path p = dir / kRecordFiles[i];
    write_text(p, records_text(snapshot, i, true));
    files[kRecordFiles[i]] = sha256_file(p);
  }
  json m = json::object();
  m["format"] = kFormat;
  m["embedding"] = {{"scheme", snapshot.embedding_spec().scheme_id},
                    {"dimension", snapshot.embedding_spec().dimension}};
  m["horizon"] = snapshot.horizon();
  m["counts"] = {{"captions", snapshot.captions().size()},
                 {"primitives", snapshot.primitives().size()},
                 {"keyframes", snapshot.keyframes().size()}};
  m["sha256"] = files;
  m["config"] = config_json(config);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

LoadedBundle load_snapshot_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  json m;
  try {
    m = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "unreadable manifest " + manifest_path.string() + ": " + e.what());
  }
  if (m.value("format", "") != kFormat) {
    throw Error(ErrorCode::Io, manifest_path.string() + " is not a snapshot manifest");
  }
  IngestOptions opts;
  try {
    for (const char* f : kRecordFiles) {
      const std::string expected = m.at("sha256").at(f).get<std::string>();
      if (sha256_file(dir / f) != expected) {
        throw Error(ErrorCode::Io, std::string(f) + " does not match the manifest hash");
      }
    }
    opts.supplied_scheme = m.at("embedding").at("scheme").get<std::string>();
    opts.horizon = m.at("horizon").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, "incomplete manifest " + manifest_path.string() + ": " + e.what());
  }
  LoadedBundle out{ingest_files(dir / kRecordFiles[0], dir / kRecordFiles[1],
                                dir / kRecordFiles[2], opts),
                   {}};
  if (m.contains("config") && m["config"].is_object()) {
    for (const auto& [k, v] : m["config"].items()) {
      out.config.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
  }
  return out;
}

void write_scenario_files(const SyntheticMemory& memory, const ScenarioSpec& spec,
                          const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
  const auto& parts = memory.parts;
  write_text(dir / kRecordFiles[0],
             jsonl(parts.captions, [](const auto& c) { return detail::to_json(c, false); }));
  write_text(dir / kRecordFiles[1],
             jsonl(parts.primitives, [](const auto& p) { return detail::to_json(p, false); }));
  write_text(dir / kRecordFiles[2],
             jsonl(parts.keyframes, [](const auto& k) { return detail::to_json(k); }));
  write_tasks(memory.tasks, dir / "tasks.jsonl");
  write_text(dir / "scenario.json", config_json(spec.entries()).dump(2) + "\n");
}

void write_tasks(const std::vector<QATask>& tasks, const fs::path& path) {
  write_text(path, jsonl(tasks, task_to_json));
}

std::vector<QATask> read_tasks(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<QATask> out;
  detail::for_each_record(in, path.filename().string(), [&](const json& j, std::size_t) {
    out.push_back(task_from_json(j));
  });
  return out;
}

}  // namespace star
