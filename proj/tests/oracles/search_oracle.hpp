#pragma once

// Linear-scan reference for VectorIndex: dot product, clamp at 0, snap values
// within 1e-12 of 1 to 1, sort by (score desc, id asc).

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

struct Hit {
  std::int64_t id;
  double score;
  bool operator==(const Hit&) const = default;
};

inline double score(const std::vector<double>& q, const std::vector<double>& v) {
  double dot = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) dot += q[i] * v[i];
  if (dot > 1.0 - 1e-12) return 1.0;
  return dot < 0.0 ? 0.0 : dot;
}

inline std::vector<Hit> scan(const std::vector<std::pair<std::int64_t, std::vector<double>>>& rows,
                             const std::vector<double>& q) {
  std::vector<Hit> out;
  for (const auto& [id, v] : rows) out.push_back({id, score(q, v)});
  std::sort(out.begin(), out.end(), [](const Hit& a, const Hit& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return out;
}

inline std::vector<Hit> above(const std::vector<std::pair<std::int64_t, std::vector<double>>>& rows,
                              const std::vector<double>& q, double tau) {
  auto all = scan(rows, q);
  all.erase(std::remove_if(all.begin(), all.end(), [&](const Hit& h) { return h.score < tau; }),
            all.end());
  return all;
}

inline std::vector<Hit> topk(const std::vector<std::pair<std::int64_t, std::vector<double>>>& rows,
                             const std::vector<double>& q, std::size_t k) {
  auto all = scan(rows, q);
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace oracle
