#include "star/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "star/error.hpp"

namespace star {
namespace {

// mt19937_64 output is fully specified by the standard; the distributions are
// not, so draws are mapped to ranges here to stay platform independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

struct WorldObject {
  std::string phrase;      // caption / feature text
  std::string type;        // phrase without the color word
  std::string color;       // empty when the object has no color attribute
  std::string detail;      // keyframe annotation text
  Vec3 center;
  Vec3 half;
  bool unique = false;     // the only object answering to its phrase
};

struct RoutePoint {
  Vec3 position;
  double yaw;
};

class Route {
 public:
  explicit Route(std::vector<Vec3> waypoints) : points_(std::move(waypoints)) {
    cumulative_.push_back(0.0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto& a = points_[i];
      const auto& b = points_[(i + 1) % points_.size()];
      cumulative_.push_back(cumulative_.back() + distance(a, b));
    }
  }

  RoutePoint at(double s) const {
    const double length = cumulative_.back();
    s = std::fmod(s, length);
    if (s < 0) s += length;
    std::size_t i = 0;
    while (i + 1 < cumulative_.size() - 1 && cumulative_[i + 1] <= s) ++i;
    const auto& a = points_[i];
    const auto& b = points_[(i + 1) % points_.size()];
    const double seg = cumulative_[i + 1] - cumulative_[i];
    const double f = seg > 0 ? (s - cumulative_[i]) / seg : 0.0;
    return {a + f * (b - a), std::atan2(b.y - a.y, b.x - a.x)};
  }

 private:
  std::vector<Vec3> points_;
  std::vector<double> cumulative_;
};

const Route& warehouse_route() {
  static const Route route({{2, 2, 0},   {12, 2, 0},  {12, 22, 0}, {20, 22, 0},
                            {20, 2, 0},  {28, 2, 0},  {28, 22, 0}, {36, 22, 0},
                            {36, 26, 0}, {2, 26, 0}});
  return route;
}

std::string area_name(const Vec3& p) {
  if (p.y > 23.0) return "staging area";
  if (p.y < 5.0) return "front aisle";
  if (p.x < 6.0) return "west aisle";
  if (p.x < 16.0) return "aisle one";
  if (p.x < 24.0) return "aisle two";
  if (p.x < 32.0) return "aisle three";
  return "east aisle";
}

std::vector<WorldObject> build_world(const ScenarioSpec& spec, Rng& rng) {
  std::vector<WorldObject> objs;
  auto jitter = [&](Vec3 c) {
    return Vec3{c.x + rng.uniform(-0.4, 0.4), c.y + rng.uniform(-0.4, 0.4), c.z};
  };
  auto add = [&](std::string phrase, std::string type, std::string color, std::string detail,
                 Vec3 center, Vec3 half, bool unique) {
    objs.push_back({std::move(phrase), std::move(type), std::move(color), std::move(detail),
                    center, half, unique});
  };

  static const char* kShelfNames[] = {"shelf 1", "shelf 2", "shelf 3", "shelf 4"};
  for (int k = 0; k < 4; ++k) {
    const int free_slots = static_cast<int>(rng.index(4));
    char detail[96];
    std::snprintf(detail, sizeof detail, "%s with %d free pallet slots", kShelfNames[k], free_slots);
    add(kShelfNames[k], kShelfNames[k], "", detail, {8.0 + 8.0 * k, 13.0, 1.5}, {0.6, 7.0, 1.5},
        true);
  }

  const std::size_t labeled = spec.white_boxes > 0 ? rng.index(spec.white_boxes) : 0;
  for (std::size_t i = 0; i < spec.white_boxes; ++i) {
    const double x = spec.white_boxes == 1
                         ? 20.0
                         : 6.0 + 28.0 * static_cast<double>(i) /
                                     static_cast<double>(spec.white_boxes - 1);
    const Vec3 c = jitter({x, 24.6, 0.25});
    if (i == labeled) {
      add("white box labeled digital twin", "box", "white", "white box labeled digital twin", c,
          {0.25, 0.25, 0.25}, true);
    } else {
      add("white box", "box", "white", "white box", c, {0.25, 0.25, 0.25}, false);
    }
  }

  for (double x : {6.0, 15.0, 24.0, 33.0}) {
    add("wooden pallet", "pallet", "", "wooden pallet", jitter({x, 4.4, 0.1}), {0.6, 0.5, 0.1},
        false);
  }
  for (double y : {8.0, 14.0, 20.0}) {
    add("orange traffic cone", "traffic cone", "orange", "orange traffic cone",
        jitter({4.6, y, 0.35}), {0.2, 0.2, 0.35}, false);
  }
  for (double y : {12.0, 16.0}) {
    add("blue barrel", "barrel", "blue", "blue barrel", jitter({37.5, y, 0.45}),
        {0.3, 0.3, 0.45}, false);
  }
  add("yellow pole", "pole", "yellow", "yellow pole", jitter({30.5, 3.6, 1.0}), {0.1, 0.1, 1.0},
      false);
  add("yellow pole", "pole", "yellow", "yellow pole", jitter({14.0, 27.6, 1.0}), {0.1, 0.1, 1.0},
      false);

  add("yellow police call pole", "police call pole", "yellow",
      "yellow police call pole with help sign", jitter({25.5, 3.6, 1.2}), {0.1, 0.1, 1.2}, true);
  add("yellow fire hydrant", "fire hydrant", "yellow", "yellow fire hydrant",
      jitter({3.6, 17.0, 0.4}), {0.2, 0.2, 0.4}, true);
  add("yellow forklift", "forklift", "yellow", "yellow forklift with raised forks",
      jitter({27.0, 27.8, 1.1}), {1.0, 0.6, 1.1}, true);
  add("red fire extinguisher", "fire extinguisher", "red", "red fire extinguisher on wall mount",
      jitter({13.4, 10.0, 0.5}), {0.15, 0.15, 0.5}, true);
  add("green ladder", "ladder", "green", "green ladder leaning on shelf",
      jitter({21.4, 15.0, 1.2}), {0.3, 0.1, 1.2}, true);
  add("gray trash bin", "trash bin", "gray", "gray trash bin", jitter({3.6, 5.0, 0.45}),
      {0.3, 0.3, 0.45}, true);
  add("blue charging station", "charging station", "blue", "blue charging station",
      jitter({37.6, 24.6, 0.8}), {0.4, 0.3, 0.8}, true);
  return objs;
}

bool visible(const RoutePoint& pose, const WorldObject& obj, const ScenarioSpec& spec) {
  const double dx = obj.center.x - pose.position.x;
  const double dy = obj.center.y - pose.position.y;
  if (std::hypot(dx, dy) > spec.visibility_range) return false;
  double rel = std::atan2(dy, dx) - pose.yaw;
  while (rel > std::numbers::pi) rel -= 2 * std::numbers::pi;
  while (rel < -std::numbers::pi) rel += 2 * std::numbers::pi;
  return std::abs(rel) <= 0.5 * spec.fov_deg * std::numbers::pi / 180.0;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

std::string fmt(double d) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ScenarioSpec::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidSpec, m); };
  if (!(horizon > 0.0)) fail("horizon must be > 0");
  if (!(clip_length > 0.0)) fail("clip_length must be > 0");
  if (!(keyframe_rate > 0.0)) fail("keyframe_rate must be > 0");
  if (!(speed > 0.0)) fail("speed must be > 0");
  if (!(visibility_range > 0.0)) fail("visibility_range must be > 0");
  if (!(fov_deg > 0.0 && fov_deg <= 360.0)) fail("fov_deg must lie in (0, 360]");
  if (white_boxes < 1) fail("white_boxes must be >= 1");
  if (horizon < clip_length) fail("horizon shorter than one clip");
}

void ScenarioSpec::set(std::string_view key, std::string_view raw) {
  const std::string v(trim(raw));
  auto num = [&]() {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size()) {
      throw Error(ErrorCode::InvalidSpec, std::string(key) + ": expected a number, got '" + v + "'");
    }
    return d;
  };
  auto count = [&]() -> std::uint64_t {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
      throw Error(ErrorCode::InvalidSpec,
                  std::string(key) + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
  };
  if (key == "seed") seed = count();
  else if (key == "horizon") horizon = num();
  else if (key == "clip_length") clip_length = num();
  else if (key == "keyframe_rate") keyframe_rate = num();
  else if (key == "tasks") tasks = count();
  else if (key == "temporal_tasks") temporal_tasks = count();
  else if (key == "white_boxes") white_boxes = count();
  else if (key == "speed") speed = num();
  else if (key == "visibility_range") visibility_range = num();
  else if (key == "fov_deg") fov_deg = num();
  else throw Error(ErrorCode::InvalidSpec, "unknown scenario key '" + std::string(key) + "'");
}

void ScenarioSpec::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidSpec, "cannot open scenario spec " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = line;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidSpec,
                  path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    set(trim(l.substr(0, eq)), l.substr(eq + 1));
  }
}

std::vector<std::pair<std::string, std::string>> ScenarioSpec::entries() const {
  return {{"clip_length", fmt(clip_length)},
          {"fov_deg", fmt(fov_deg)},
          {"horizon", fmt(horizon)},
          {"keyframe_rate", fmt(keyframe_rate)},
          {"seed", std::to_string(seed)},
          {"speed", fmt(speed)},
          {"tasks", std::to_string(tasks)},
          {"temporal_tasks", std::to_string(temporal_tasks)},
          {"visibility_range", fmt(visibility_range)},
          {"white_boxes", std::to_string(white_boxes)}};
}

std::string_view to_string(TaskCategory c) {
  switch (c) {
    case TaskCategory::Spatial: return "spatial";
    case TaskCategory::Binary: return "binary";
    case TaskCategory::Descriptive: return "descriptive";
    case TaskCategory::Multimodal: return "multimodal";
    case TaskCategory::Temporal: return "temporal";
  }
  return "spatial";
}

TaskCategory parse_task_category(std::string_view s) {
  if (s == "spatial") return TaskCategory::Spatial;
  if (s == "binary") return TaskCategory::Binary;
  if (s == "descriptive") return TaskCategory::Descriptive;
  if (s == "multimodal") return TaskCategory::Multimodal;
  if (s == "temporal") return TaskCategory::Temporal;
  throw Error(ErrorCode::InvalidSpec, "unknown task category '" + std::string(s) + "'");
}

SyntheticMemory generate_synthetic_parts(const ScenarioSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto world = build_world(spec, rng);
  const Route& route = warehouse_route();
  auto pose_at = [&](double t) { return route.at(spec.speed * t); };

  SyntheticMemory out;
  auto& parts = out.parts;
  parts.horizon = spec.horizon;

  // Keyframes and per-object detections.
  const auto n_keyframes =
      static_cast<std::size_t>(std::floor(spec.horizon * spec.keyframe_rate + 1e-9));
  std::vector<std::vector<double>> detections(world.size());
  std::vector<std::vector<std::size_t>> keyframe_visible(n_keyframes);
  for (std::size_t k = 0; k < n_keyframes; ++k) {
    const double t = static_cast<double>(k) / spec.keyframe_rate;
    const auto pose = pose_at(t);
    KeyframeRecord kf;
    kf.timestamp = t;
    char ref[48];
    std::snprintf(ref, sizeof ref, "keyframes/%06zu.jpg", k);
    kf.image_ref = ref;
    std::vector<std::string> notes;
    for (std::size_t o = 0; o < world.size(); ++o) {
      if (!visible(pose, world[o], spec)) continue;
      kf.visible_primitive_ids.push_back(static_cast<RecordId>(o + 1));
      notes.push_back(world[o].detail);
      detections[o].push_back(t);
      keyframe_visible[k].push_back(o);
    }
    if (!notes.empty()) kf.annotation = "visible: " + join(notes, "; ");
    parts.keyframes.push_back(std::move(kf));
  }

  for (std::size_t o = 0; o < world.size(); ++o) {
    const auto& w = world[o];
    Primitive p;
    p.id = static_cast<RecordId>(o + 1);
    p.centroid = w.center;
    p.bbox = Aabb{w.center - w.half, w.center + w.half};
    p.caption = w.phrase;
    p.detections = detections[o];
    parts.primitives.push_back(std::move(p));
  }

  // One caption per clip: the two nearest distinct objects in view at the
  // midpoint plus the area; primitive ids cover everything seen in the clip.
  const auto n_clips = static_cast<std::size_t>(std::floor(spec.horizon / spec.clip_length + 1e-9));
  for (std::size_t i = 0; i < n_clips; ++i) {
    CaptionRecord c;
    c.id = static_cast<RecordId>(i + 1);
    c.t_start = static_cast<double>(i) * spec.clip_length;
    c.t_end = c.t_start + spec.clip_length;
    const double mid = c.midpoint();
    const auto pose = pose_at(mid);
    c.pose = Pose{pose.position, pose.yaw};

    std::vector<std::size_t> seen;
    std::vector<std::pair<double, std::size_t>> at_mid;
    for (std::size_t o = 0; o < world.size(); ++o) {
      if (visible(pose, world[o], spec)) {
        seen.push_back(o);
        at_mid.emplace_back(distance(pose.position, Vec3{world[o].center.x, world[o].center.y, 0}), o);
      }
    }
    const auto first_kf = static_cast<std::size_t>(std::ceil(c.t_start * spec.keyframe_rate - 1e-9));
    for (std::size_t k = first_kf; k < n_keyframes; ++k) {
      if (static_cast<double>(k) / spec.keyframe_rate >= c.t_end) break;
      seen.insert(seen.end(), keyframe_visible[k].begin(), keyframe_visible[k].end());
    }
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::size_t o : seen) c.primitive_ids.push_back(static_cast<RecordId>(o + 1));

    std::sort(at_mid.begin(), at_mid.end());
    std::vector<std::string> mentioned;
    for (const auto& [d, o] : at_mid) {
      if (mentioned.size() == 2) break;
      if (std::find(mentioned.begin(), mentioned.end(), world[o].phrase) == mentioned.end()) {
        mentioned.push_back(world[o].phrase);
      }
    }
    const std::string area = area_name(pose.position);
    c.text = mentioned.empty() ? "empty " + area : join(mentioned, " and ") + " in " + area;
    parts.captions.push_back(std::move(c));
  }

  // Tasks.
  std::vector<std::size_t> uniques;
  for (std::size_t o = 0; o < world.size(); ++o) {
    if (world[o].unique && !detections[o].empty()) uniques.push_back(o);
  }
  std::vector<std::size_t> colored;
  for (std::size_t o : uniques) {
    if (!world[o].color.empty() && world[o].type != "box") colored.push_back(o);
  }
  if (uniques.empty() || colored.empty()) {
    throw Error(ErrorCode::InvalidSpec, "route never observes a distinctive object");
  }

  const std::size_t n = spec.tasks;
  const std::size_t n_binary = n / 5;
  const std::size_t n_descriptive = n / 5;
  const std::size_t n_multimodal = n / 5;
  const std::size_t n_spatial = n - n_binary - n_descriptive - n_multimodal;
  const double now = spec.horizon;

  auto base_task = [&](TaskCategory cat, QueryKind kind, std::size_t o) {
    QATask t;
    t.id = "t" + std::to_string(out.tasks.size() + 1);
    t.category = cat;
    t.kind = kind;
    t.query.issued_at = now;
    t.target = static_cast<RecordId>(o + 1);
    t.evidence_times = detections[o];
    return t;
  };

  static const char* kSpatialTemplates[] = {"Where is the %s?", "Where can I find the %s?",
                                            "Where did you see the %s?"};
  for (std::size_t i = 0; i < n_spatial; ++i) {
    const std::size_t o = uniques[rng.index(uniques.size())];
    auto t = base_task(TaskCategory::Spatial, QueryKind::Spatial, o);
    char q[160];
    std::snprintf(q, sizeof q, kSpatialTemplates[rng.index(3)], world[o].phrase.c_str());
    t.query.text = q;
    t.gt_position = parts.primitives[o].bbox.center();
    out.tasks.push_back(std::move(t));
  }

  static const char* kColors[] = {"red", "blue", "green", "yellow", "white", "gray", "orange"};
  for (std::size_t i = 0; i < n_binary; ++i) {
    const std::size_t o = colored[rng.index(colored.size())];
    auto t = base_task(TaskCategory::Binary, QueryKind::Binary, o);
    const bool yes = i % 2 == 0;
    std::string color = world[o].color;
    if (!yes) {
      // A color no object of this type has.
      do {
        color = kColors[rng.index(std::size(kColors))];
      } while (std::any_of(world.begin(), world.end(), [&](const WorldObject& w) {
        return w.type == world[o].type && w.color == color;
      }));
    }
    t.query.text = "Did you see a " + color + " " + world[o].type + "?";
    t.gt_binary = yes;
    out.tasks.push_back(std::move(t));
  }

  for (std::size_t i = 0; i < n_descriptive; ++i) {
    const std::size_t o = colored[rng.index(colored.size())];
    auto t = base_task(TaskCategory::Descriptive, QueryKind::Descriptive, o);
    t.query.text = "What color is the " + world[o].type + "?";
    t.key_tokens = {world[o].color};
    out.tasks.push_back(std::move(t));
  }

  for (std::size_t i = 0; i < n_multimodal; ++i) {
    const std::size_t o = uniques[rng.index(uniques.size())];
    auto t = base_task(TaskCategory::Multimodal, QueryKind::Spatial, o);
    t.query.text = "Where have you seen this one?";
    t.query.observation = world[o].detail;
    t.gt_position = parts.primitives[o].bbox.center();
    out.tasks.push_back(std::move(t));
  }

  for (std::size_t i = 0; i < spec.temporal_tasks; ++i) {
    const std::size_t o = uniques[rng.index(uniques.size())];
    auto t = base_task(TaskCategory::Temporal, QueryKind::Temporal, o);
    t.query.text = "When did you last see the " + world[o].phrase + "?";
    t.gt_time = detections[o].back();
    out.tasks.push_back(std::move(t));
  }
  return out;
}

SyntheticScenario generate_synthetic_memory(const ScenarioSpec& spec, const Embedder& embedder) {
  auto gen = generate_synthetic_parts(spec);
  gen.parts.embedding = embedder.spec();
  for (auto& c : gen.parts.captions) c.embedding = embedder.embed(c.text);
  for (auto& p : gen.parts.primitives) p.feature = embedder.embed(p.caption);
  return {MemorySnapshot::seal(std::move(gen.parts)), std::move(gen.tasks)};
}

}  // namespace star
