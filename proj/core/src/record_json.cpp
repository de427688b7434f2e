#include "record_json.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <initializer_list>
#include <set>

namespace star::detail {
namespace {

void check_fields(const json& j, std::initializer_list<std::string_view> allowed, bool strict) {
  if (!strict) return;
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw std::invalid_argument("unknown field '" + key + "'");
  }
}

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  return *it;
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw std::invalid_argument(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
  return v;
}

std::int64_t as_id(const json& j, const char* what) {
  if (!j.is_number_integer()) throw std::invalid_argument(std::string(what) + " must be an integer");
  return j.get<std::int64_t>();
}

std::vector<double> as_numbers(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(as_number(x, what));
  return out;
}

std::vector<RecordId> as_ids(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  std::vector<RecordId> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(as_id(x, what));
  return out;
}

Vec3 as_vec3(const json& j, const char* what) {
  const auto v = as_numbers(j, what);
  if (v.size() != 3) throw std::invalid_argument(std::string(what) + " must have 3 entries");
  return {v[0], v[1], v[2]};
}

std::string as_string(const json& j, const char* what) {
  if (!j.is_string()) throw std::invalid_argument(std::string(what) + " must be a string");
  return j.get<std::string>();
}

}  // namespace

CaptionRecord caption_from_json(const json& j, bool strict) {
  check_fields(j, {"id", "t_start", "t_end", "pose", "text", "embedding", "primitive_ids"}, strict);
  CaptionRecord c;
  c.id = as_id(require(j, "id"), "id");
  c.t_start = as_number(require(j, "t_start"), "t_start");
  c.t_end = as_number(require(j, "t_end"), "t_end");
  const auto pose = as_numbers(require(j, "pose"), "pose");
  if (pose.size() != 4) throw std::invalid_argument("pose must be [x, y, z, yaw]");
  c.pose = Pose{{pose[0], pose[1], pose[2]}, pose[3]};
  c.text = as_string(require(j, "text"), "text");
  if (auto it = j.find("embedding"); it != j.end() && !it->is_null()) {
    c.embedding = as_numbers(*it, "embedding");
  }
  c.primitive_ids = as_ids(require(j, "primitive_ids"), "primitive_ids");
  return c;
}

Primitive primitive_from_json(const json& j, bool strict) {
  check_fields(j, {"id", "centroid", "bbox", "caption", "feature", "detections"}, strict);
  Primitive p;
  p.id = as_id(require(j, "id"), "id");
  p.centroid = as_vec3(require(j, "centroid"), "centroid");
  const auto& bbox = require(j, "bbox");
  if (!bbox.is_array() || bbox.size() != 2) {
    throw std::invalid_argument("bbox must be [[minx,miny,minz],[maxx,maxy,maxz]]");
  }
  p.bbox = Aabb{as_vec3(bbox[0], "bbox"), as_vec3(bbox[1], "bbox")};
  p.caption = as_string(require(j, "caption"), "caption");
  if (auto it = j.find("feature"); it != j.end() && !it->is_null()) {
    p.feature = as_numbers(*it, "feature");
  }
  p.detections = as_numbers(require(j, "detections"), "detections");
  return p;
}

KeyframeRecord keyframe_from_json(const json& j, bool strict) {
  check_fields(j, {"timestamp", "image_ref", "visible_primitive_ids", "annotation"}, strict);
  KeyframeRecord k;
  k.timestamp = as_number(require(j, "timestamp"), "timestamp");
  k.image_ref = as_string(require(j, "image_ref"), "image_ref");
  k.visible_primitive_ids = as_ids(require(j, "visible_primitive_ids"), "visible_primitive_ids");
  if (auto it = j.find("annotation"); it != j.end() && !it->is_null()) {
    k.annotation = as_string(*it, "annotation");
  }
  return k;
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json to_json(const CaptionRecord& c, bool with_embedding) {
  json j = {{"id", c.id},
            {"t_start", c.t_start},
            {"t_end", c.t_end},
            {"pose", {c.pose.position.x, c.pose.position.y, c.pose.position.z, c.pose.yaw}},
            {"text", c.text},
            {"primitive_ids", c.primitive_ids}};
  if (with_embedding) j["embedding"] = c.embedding;
  return j;
}

json to_json(const Primitive& p, bool with_feature) {
  json j = {{"id", p.id},
            {"centroid", to_json(p.centroid)},
            {"bbox", json::array({to_json(p.bbox.min), to_json(p.bbox.max)})},
            {"caption", p.caption},
            {"detections", p.detections}};
  if (with_feature) j["feature"] = p.feature;
  return j;
}

json to_json(const KeyframeRecord& k) {
  json j = {{"timestamp", k.timestamp},
            {"image_ref", k.image_ref},
            {"visible_primitive_ids", k.visible_primitive_ids}};
  j["annotation"] = k.annotation ? json(*k.annotation) : json(nullptr);
  return j;
}

json round_floats(const json& j, int significant_digits) {
  switch (j.type()) {
    case json::value_t::number_float: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.*g", significant_digits, j.get<double>());
      double v = std::strtod(buf, nullptr);
      if (v == 0.0) v = 0.0;  // drop negative zero
      return json(v);
    }
    case json::value_t::array: {
      json out = json::array();
      for (const auto& x : j) out.push_back(round_floats(x, significant_digits));
      return out;
    }
    case json::value_t::object: {
      json out = json::object();
      for (const auto& [k, v] : j.items()) out[k] = round_floats(v, significant_digits);
      return out;
    }
    default:
      return j;
  }
}

}  // namespace star::detail
