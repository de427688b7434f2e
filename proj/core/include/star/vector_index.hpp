#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "star/geometry.hpp"
#include "star/memory_store.hpp"

namespace star {

struct SearchHit {
  RecordId record_id = 0;
  double score = 0.0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Score descending, then record id ascending.
bool hit_order(const SearchHit& a, const SearchHit& b);

struct TimeWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct Disc {
  Vec3 center;
  double radius = 0.0;
};

// Optional restrictions; an entry without the corresponding metadata never
// passes a filter that is set.
struct SearchFilter {
  std::optional<TimeWindow> time;
  std::optional<Disc> position;
};

// Exact flat index: every search scans all rows. Immutable once built.
class VectorIndex {
 public:
  struct Entry {
    RecordId id = 0;
    std::vector<double> vector;
    std::optional<TimeWindow> interval;
    std::optional<Vec3> position;
  };

  VectorIndex(std::size_t dimension, std::vector<Entry> entries);

  static VectorIndex over_captions(const MemorySnapshot& snapshot);
  static VectorIndex over_primitives(const MemorySnapshot& snapshot);

  // All entries with score >= tau that pass the filter, in hit_order.
  std::vector<SearchHit> search_above_threshold(std::span<const double> query, double tau,
                                                const SearchFilter& filter = {}) const;

  // The k best entries passing the filter, in hit_order.
  std::vector<SearchHit> search_topk(std::span<const double> query, std::size_t k,
                                     const SearchFilter& filter = {}) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dimension() const { return dimension_; }
  RecordId id_at(std::size_t row) const { return ids_[row]; }
  std::span<const double> row(std::size_t i) const;

 private:
  bool passes(std::size_t row, const SearchFilter& filter) const;
  void check_query(std::span<const double> query) const;

  std::size_t dimension_;
  std::vector<RecordId> ids_;
  std::vector<double> data_;  // row-major, size() x dimension_
  std::vector<std::optional<TimeWindow>> intervals_;
  std::vector<std::optional<Vec3>> positions_;
};

}  // namespace star
