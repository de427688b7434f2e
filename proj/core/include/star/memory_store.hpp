#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "star/embedding.hpp"
#include "star/geometry.hpp"

namespace star {

using RecordId = std::int64_t;

// One M-second clip description. Times are seconds since memory start; the
// pose is taken at the clip midpoint.
struct CaptionRecord {
  RecordId id = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  Pose pose;
  std::string text;
  std::vector<double> embedding;
  std::vector<RecordId> primitive_ids;

  double midpoint() const { return 0.5 * (t_start + t_end); }
};

// Persistent 3D object fragment (bbox summary only; no point cloud).
struct Primitive {
  RecordId id = 0;
  Vec3 centroid;
  Aabb bbox;
  std::string caption;
  std::vector<double> feature;
  std::vector<double> detections;  // strictly increasing, seconds
};

struct KeyframeRecord {
  double timestamp = 0.0;
  std::string image_ref;
  std::vector<RecordId> visible_primitive_ids;
  std::optional<std::string> annotation;
};

// Unvalidated record collections; MemorySnapshot::seal turns them into an
// immutable snapshot.
struct MemoryParts {
  std::vector<CaptionRecord> captions;
  std::vector<Primitive> primitives;
  std::vector<KeyframeRecord> keyframes;
  EmbeddingSpec embedding;
  std::optional<double> horizon;
};

// Sealed OmniMem: captions ordered by (t_start, id), primitives ordered by id,
// keyframes ordered by timestamp. Immutable after construction and safe to
// share between readers.
class MemorySnapshot {
 public:
  // Sorts, then checks every record invariant and cross reference. Throws
  // InvalidRecord, DuplicateId, DanglingReference or DimensionMismatch.
  static MemorySnapshot seal(MemoryParts parts);

  std::span<const CaptionRecord> captions() const { return captions_; }
  std::span<const Primitive> primitives() const { return primitives_; }
  std::span<const KeyframeRecord> keyframes() const { return keyframes_; }

  const CaptionRecord* find_caption(RecordId id) const;
  const Primitive* find_primitive(RecordId id) const;
  const CaptionRecord& caption(RecordId id) const;
  const Primitive& primitive(RecordId id) const;

  double horizon() const { return horizon_; }
  const EmbeddingSpec& embedding_spec() const { return embedding_; }
  double max_clip_length() const { return max_clip_length_; }

 private:
  MemorySnapshot() = default;

  std::vector<CaptionRecord> captions_;
  std::vector<Primitive> primitives_;
  std::vector<KeyframeRecord> keyframes_;
  std::unordered_map<RecordId, std::size_t> caption_index_;
  std::unordered_map<RecordId, std::size_t> primitive_index_;
  EmbeddingSpec embedding_;
  double horizon_ = 0.0;
  double max_clip_length_ = 0.0;
};

struct IngestOptions {
  // Lenient mode ignores unknown fields instead of rejecting the line.
  bool strict = true;
  // Fills in missing embeddings/features. Without one, every record must
  // carry its vector.
  const Embedder* embedder = nullptr;
  // Scheme recorded for vectors supplied in the files themselves.
  std::string supplied_scheme = std::string(kExternalScheme);
  std::optional<double> horizon;
};

MemorySnapshot ingest(std::istream& captions, std::istream& primitives, std::istream& keyframes,
                      const IngestOptions& options = {});

MemorySnapshot ingest_files(const std::filesystem::path& captions,
                            const std::filesystem::path& primitives,
                            const std::filesystem::path& keyframes,
                            const IngestOptions& options = {});

// Captions whose [t_start, t_end] intersects [t_lo, t_hi], time ordered.
// Throws InvalidRange if t_lo > t_hi.
std::vector<const CaptionRecord*> query_by_time(const MemorySnapshot& snapshot, double t_lo,
                                                double t_hi);

// Captions whose pose position lies within `radius` (Euclidean, 3D) of center.
std::vector<const CaptionRecord*> query_by_position(const MemorySnapshot& snapshot,
                                                    const Vec3& center, double radius);

struct KeyframeLookup {
  std::vector<const KeyframeRecord*> keyframes;
  // Requested timestamps with no keyframe within tolerance (NoKeyframeInTolerance).
  std::vector<double> missing;
};

// Nearest keyframe within tol for each request; duplicates dropped, request
// order kept. Equidistant neighbours resolve to the earlier keyframe.
KeyframeLookup keyframes_at(const MemorySnapshot& snapshot, std::span<const double> timestamps,
                            double tol);

}  // namespace star
