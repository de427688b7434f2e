#include "star/vector_index.hpp"

#include <algorithm>

#include "star/embedding.hpp"
#include "star/error.hpp"

namespace star {

bool hit_order(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.record_id < b.record_id;
}

VectorIndex::VectorIndex(std::size_t dimension, std::vector<Entry> entries)
    : dimension_(dimension) {
  ids_.reserve(entries.size());
  data_.reserve(entries.size() * dimension_);
  for (auto& e : entries) {
    if (e.vector.size() != dimension_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "entry " + std::to_string(e.id) + " has dimension " +
                      std::to_string(e.vector.size()));
    }
    ids_.push_back(e.id);
    data_.insert(data_.end(), e.vector.begin(), e.vector.end());
    intervals_.push_back(e.interval);
    positions_.push_back(e.position);
  }
}

VectorIndex VectorIndex::over_captions(const MemorySnapshot& snapshot) {
  std::vector<Entry> entries;
  entries.reserve(snapshot.captions().size());
  for (const auto& c : snapshot.captions()) {
    entries.push_back({c.id, c.embedding, TimeWindow{c.t_start, c.t_end}, c.pose.position});
  }
  return VectorIndex(snapshot.embedding_spec().dimension, std::move(entries));
}

VectorIndex VectorIndex::over_primitives(const MemorySnapshot& snapshot) {
  std::vector<Entry> entries;
  entries.reserve(snapshot.primitives().size());
  for (const auto& p : snapshot.primitives()) {
    std::optional<TimeWindow> seen;
    if (!p.detections.empty()) seen = TimeWindow{p.detections.front(), p.detections.back()};
    entries.push_back({p.id, p.feature, seen, p.centroid});
  }
  return VectorIndex(snapshot.embedding_spec().dimension, std::move(entries));
}

std::span<const double> VectorIndex::row(std::size_t i) const {
  return std::span<const double>(data_).subspan(i * dimension_, dimension_);
}

bool VectorIndex::passes(std::size_t i, const SearchFilter& filter) const {
  if (filter.time) {
    const auto& iv = intervals_[i];
    if (!iv || iv->hi < filter.time->lo || iv->lo > filter.time->hi) return false;
  }
  if (filter.position) {
    const auto& pos = positions_[i];
    if (!pos || distance(*pos, filter.position->center) > filter.position->radius) return false;
  }
  return true;
}

void VectorIndex::check_query(std::span<const double> query) const {
  if (query.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch,
                "query of dimension " + std::to_string(query.size()) + ", index has " +
                    std::to_string(dimension_));
  }
}

std::vector<SearchHit> VectorIndex::search_above_threshold(std::span<const double> query,
                                                           double tau,
                                                           const SearchFilter& filter) const {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidRange, "tau must lie in [0, 1]");
  check_query(query);
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!passes(i, filter)) continue;
    const double s = similarity(query, row(i));
    if (s >= tau) hits.push_back({ids_[i], s});
  }
  std::sort(hits.begin(), hits.end(), hit_order);
  return hits;
}

std::vector<SearchHit> VectorIndex::search_topk(std::span<const double> query, std::size_t k,
                                                const SearchFilter& filter) const {
  if (k == 0) throw Error(ErrorCode::InvalidRange, "k must be >= 1");
  check_query(query);
  std::vector<SearchHit> hits;
  hits.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (passes(i, filter)) hits.push_back({ids_[i], similarity(query, row(i))});
  }
  const std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(),
                    hit_order);
  hits.resize(n);
  return hits;
}

}  // namespace star
