#include "star/memory_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "record_json.hpp"
#include "star/error.hpp"

namespace star {
namespace {

std::string fmt_time(double t) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, t);
  return std::string(buf, r.ptr);
}

void check_vector(const std::vector<double>& v, std::size_t dim, const std::string& what) {
  if (v.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, what + " has dimension " + std::to_string(v.size()) +
                                                  ", expected " + std::to_string(dim));
  }
  if (!is_unit_norm(v)) throw Error(ErrorCode::InvalidRecord, what + " is not unit-norm");
}

void validate_caption(const CaptionRecord& c, std::size_t dim) {
  const std::string what = "caption " + std::to_string(c.id);
  if (!(c.t_start < c.t_end)) throw Error(ErrorCode::InvalidRecord, what + ": t_start >= t_end");
  check_vector(c.embedding, dim, what + " embedding");
}

void validate_primitive(const Primitive& p, std::size_t dim) {
  const std::string what = "primitive " + std::to_string(p.id);
  if (!p.bbox.valid()) throw Error(ErrorCode::InvalidRecord, what + ": bbox min > max");
  if (!p.bbox.contains(p.centroid)) {
    throw Error(ErrorCode::InvalidRecord, what + ": centroid outside bbox");
  }
  for (std::size_t i = 1; i < p.detections.size(); ++i) {
    if (!(p.detections[i - 1] < p.detections[i])) {
      throw Error(ErrorCode::InvalidRecord, what + ": detections not strictly increasing");
    }
  }
  check_vector(p.feature, dim, what + " feature");
}

}  // namespace

MemorySnapshot MemorySnapshot::seal(MemoryParts parts) {
  MemorySnapshot s;
  s.embedding_ = parts.embedding;
  s.captions_ = std::move(parts.captions);
  s.primitives_ = std::move(parts.primitives);
  s.keyframes_ = std::move(parts.keyframes);

  std::sort(s.captions_.begin(), s.captions_.end(), [](const auto& a, const auto& b) {
    return a.t_start != b.t_start ? a.t_start < b.t_start : a.id < b.id;
  });
  std::sort(s.primitives_.begin(), s.primitives_.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::stable_sort(s.keyframes_.begin(), s.keyframes_.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  const std::size_t dim = s.embedding_.dimension;
  double max_t = 0.0;
  for (std::size_t i = 0; i < s.primitives_.size(); ++i) {
    const auto& p = s.primitives_[i];
    validate_primitive(p, dim);
    if (!s.primitive_index_.emplace(p.id, i).second) {
      throw Error(ErrorCode::DuplicateId, "primitive " + std::to_string(p.id));
    }
    if (!p.detections.empty()) max_t = std::max(max_t, p.detections.back());
  }
  for (std::size_t i = 0; i < s.captions_.size(); ++i) {
    const auto& c = s.captions_[i];
    validate_caption(c, dim);
    if (!s.caption_index_.emplace(c.id, i).second) {
      throw Error(ErrorCode::DuplicateId, "caption " + std::to_string(c.id));
    }
    for (RecordId pid : c.primitive_ids) {
      if (!s.primitive_index_.contains(pid)) {
        throw DanglingReference("caption " + std::to_string(c.id), pid);
      }
    }
    max_t = std::max(max_t, c.t_end);
    s.max_clip_length_ = std::max(s.max_clip_length_, c.t_end - c.t_start);
  }
  for (std::size_t i = 0; i < s.keyframes_.size(); ++i) {
    const auto& k = s.keyframes_[i];
    if (i > 0 && s.keyframes_[i - 1].timestamp == k.timestamp) {
      throw Error(ErrorCode::DuplicateId, "keyframe timestamp " + fmt_time(k.timestamp));
    }
    for (RecordId pid : k.visible_primitive_ids) {
      if (!s.primitive_index_.contains(pid)) {
        throw DanglingReference("keyframe " + fmt_time(k.timestamp), pid);
      }
    }
    max_t = std::max(max_t, k.timestamp);
  }
  s.horizon_ = parts.horizon.value_or(max_t);
  if (s.horizon_ < max_t) {
    throw Error(ErrorCode::InvalidRecord,
                "horizon " + fmt_time(s.horizon_) + " precedes last record at " + fmt_time(max_t));
  }
  return s;
}

const CaptionRecord* MemorySnapshot::find_caption(RecordId id) const {
  auto it = caption_index_.find(id);
  return it == caption_index_.end() ? nullptr : &captions_[it->second];
}

const Primitive* MemorySnapshot::find_primitive(RecordId id) const {
  auto it = primitive_index_.find(id);
  return it == primitive_index_.end() ? nullptr : &primitives_[it->second];
}

const CaptionRecord& MemorySnapshot::caption(RecordId id) const {
  if (const auto* c = find_caption(id)) return *c;
  throw Error(ErrorCode::InconsistentComponents, "unknown caption " + std::to_string(id));
}

const Primitive& MemorySnapshot::primitive(RecordId id) const {
  if (const auto* p = find_primitive(id)) return *p;
  throw Error(ErrorCode::InconsistentComponents, "unknown primitive " + std::to_string(id));
}

MemorySnapshot ingest(std::istream& captions_in, std::istream& primitives_in,
                      std::istream& keyframes_in, const IngestOptions& options) {
  MemoryParts parts;
  std::size_t with_vec = 0;
  std::size_t without_vec = 0;

  detail::for_each_record(captions_in, "captions.jsonl", [&](const detail::json& j, std::size_t) {
    auto c = detail::caption_from_json(j, options.strict);
    if (!(c.t_start < c.t_end)) throw std::invalid_argument("t_start must be < t_end");
    if (c.embedding.empty()) {
      ++without_vec;
    } else {
      if (!is_unit_norm(c.embedding)) throw std::invalid_argument("embedding is not unit-norm");
      ++with_vec;
    }
    parts.captions.push_back(std::move(c));
  });
  detail::for_each_record(primitives_in, "primitives.jsonl", [&](const detail::json& j, std::size_t) {
    auto p = detail::primitive_from_json(j, options.strict);
    if (!p.bbox.valid()) throw std::invalid_argument("bbox min exceeds max");
    if (!p.bbox.contains(p.centroid)) throw std::invalid_argument("centroid outside bbox");
    if (!std::is_sorted(p.detections.begin(), p.detections.end()) ||
        std::adjacent_find(p.detections.begin(), p.detections.end()) != p.detections.end()) {
      throw std::invalid_argument("detections must be strictly increasing");
    }
    if (p.feature.empty()) {
      ++without_vec;
    } else {
      if (!is_unit_norm(p.feature)) throw std::invalid_argument("feature is not unit-norm");
      ++with_vec;
    }
    parts.primitives.push_back(std::move(p));
  });
  detail::for_each_record(keyframes_in, "keyframes.jsonl", [&](const detail::json& j, std::size_t) {
    parts.keyframes.push_back(detail::keyframe_from_json(j, options.strict));
  });

  if (with_vec > 0 && without_vec > 0) {
    throw Error(ErrorCode::SchemeMismatch,
                "some records carry vectors and some do not; mixed embedding schemes");
  }
  if (with_vec > 0) {
    std::size_t dim = parts.captions.empty() ? parts.primitives.front().feature.size()
                                             : parts.captions.front().embedding.size();
    parts.embedding = EmbeddingSpec{dim, options.supplied_scheme};
  } else {
    if (options.embedder == nullptr && without_vec > 0) {
      throw Error(ErrorCode::SchemeMismatch, "records carry no vectors and no embedder was given");
    }
    if (options.embedder != nullptr) {
      parts.embedding = options.embedder->spec();
      for (auto& c : parts.captions) c.embedding = options.embedder->embed(c.text);
      for (auto& p : parts.primitives) p.feature = options.embedder->embed(p.caption);
    }
  }
  parts.horizon = options.horizon;
  return MemorySnapshot::seal(std::move(parts));
}

MemorySnapshot ingest_files(const std::filesystem::path& captions,
                            const std::filesystem::path& primitives,
                            const std::filesystem::path& keyframes, const IngestOptions& options) {
  auto open = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + p.string());
    return in;
  };
  auto c = open(captions);
  auto p = open(primitives);
  auto k = open(keyframes);
  return ingest(c, p, k, options);
}

std::vector<const CaptionRecord*> query_by_time(const MemorySnapshot& snapshot, double t_lo,
                                                double t_hi) {
  if (t_lo > t_hi) throw Error(ErrorCode::InvalidRange, "t_lo > t_hi");
  const auto captions = snapshot.captions();
  // No clip longer than max_clip_length can start before this and still reach t_lo.
  const double earliest = t_lo - snapshot.max_clip_length();
  auto it = std::lower_bound(captions.begin(), captions.end(), earliest,
                             [](const CaptionRecord& c, double t) { return c.t_start < t; });
  std::vector<const CaptionRecord*> out;
  for (; it != captions.end() && it->t_start <= t_hi; ++it) {
    if (it->t_end >= t_lo) out.push_back(&*it);
  }
  return out;
}

std::vector<const CaptionRecord*> query_by_position(const MemorySnapshot& snapshot,
                                                    const Vec3& center, double radius) {
  std::vector<const CaptionRecord*> out;
  for (const auto& c : snapshot.captions()) {
    if (distance(c.pose.position, center) <= radius) out.push_back(&c);
  }
  return out;
}

KeyframeLookup keyframes_at(const MemorySnapshot& snapshot, std::span<const double> timestamps,
                            double tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidRange, "keyframe tolerance must be >= 0");
  const auto kfs = snapshot.keyframes();
  KeyframeLookup out;
  std::unordered_set<const KeyframeRecord*> seen;
  for (double t : timestamps) {
    auto it = std::lower_bound(kfs.begin(), kfs.end(), t,
                               [](const KeyframeRecord& k, double x) { return k.timestamp < x; });
    const KeyframeRecord* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    if (it != kfs.begin()) {
      best = &*std::prev(it);
      best_d = t - best->timestamp;
    }
    if (it != kfs.end() && it->timestamp - t < best_d) {
      best = &*it;
      best_d = it->timestamp - t;
    }
    if (best == nullptr || best_d > tol) {
      out.missing.push_back(t);
      continue;
    }
    if (seen.insert(best).second) out.keyframes.push_back(best);
  }
  return out;
}

}  // namespace star
