#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "star/embedding.hpp"
#include "star/ib_clustering.hpp"
#include "star/memory_store.hpp"
#include "star/task_relevance.hpp"

namespace fixtures {

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t d) {
  std::vector<double> v(d);
  double n = 0.0;
  do {
    n = 0.0;
    for (auto& x : v) {
      x = uniform(rng, -1.0, 1.0);
      n += x * x;
    }
  } while (n < 1e-6);
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

// Cue set with m dummy cues; only its size, alpha and top-k matter to
// relevance_distribution.
inline star::TaskCueSet dummy_cues(std::size_t m, double alpha = 0.1, std::size_t topk = 2) {
  star::TaskCueSet cs;
  cs.alpha = alpha;
  cs.topk = topk;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> e(m, 0.0);
    e[j] = 1.0;
    cs.cues.push_back({"cue" + std::to_string(j), e});
  }
  return cs;
}

struct IbInstance {
  std::vector<star::RecordId> ids;
  std::vector<star::RelevanceDistribution> rows;
  std::vector<star::Edge> edges;
  star::AdjacencyGraph graph;
};

// Random relevance rows (some drawn from a small palette so that exact ties
// and zero-cost merges occur) on a random geometric graph with a few extra
// long-range edges.
inline IbInstance random_ib_instance(std::uint64_t seed, std::size_t max_n, std::size_t max_m) {
  std::mt19937_64 rng(seed);
  IbInstance inst;
  const std::size_t n = pick(rng, 2, max_n);
  const std::size_t m = pick(rng, 1, max_m);
  const auto cues = dummy_cues(m, 0.1, pick(rng, 1, m));
  std::vector<std::vector<double>> palette;
  for (int p = 0; p < 3; ++p) {
    std::vector<double> theta{0.1};
    for (std::size_t j = 0; j < m; ++j) theta.push_back(uniform(rng));
    palette.push_back(theta);
  }
  std::vector<std::pair<double, double>> pos;
  star::RecordId next = static_cast<star::RecordId>(pick(rng, 1, 5));
  for (std::size_t i = 0; i < n; ++i) {
    inst.ids.push_back(next);
    next += static_cast<star::RecordId>(pick(rng, 1, 3));
    std::vector<double> theta;
    if (uniform(rng) < 0.3) {
      theta = palette[pick(rng, 0, palette.size() - 1)];
    } else {
      theta.push_back(0.1);
      for (std::size_t j = 0; j < m; ++j) theta.push_back(uniform(rng) < 0.15 ? 0.05 : uniform(rng));
    }
    inst.rows.push_back(star::relevance_distribution(theta, cues));
    pos.emplace_back(uniform(rng, 0, 10), uniform(rng, 0, 10));
  }
  const double r = uniform(rng, 2.0, 5.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pos[i].first - pos[j].first, dy = pos[i].second - pos[j].second;
      if (std::hypot(dx, dy) <= r || uniform(rng) < 0.03) inst.edges.emplace_back(inst.ids[i], inst.ids[j]);
    }
  }
  inst.graph = star::AdjacencyGraph::from_edges(inst.ids, inst.edges);
  return inst;
}

// Small hand-built warehouse snapshot: a labelled box among plain boxes, a
// police call pole, a yellow pole and a forklift.
inline star::MemoryParts tiny_parts() {
  using star::Aabb;
  using star::Vec3;
  star::MemoryParts parts;
  auto prim = [&](star::RecordId id, Vec3 c, std::string caption, std::vector<double> det) {
    star::Primitive p;
    p.id = id;
    p.centroid = c;
    p.bbox = Aabb{{c.x - 0.5, c.y - 0.5, c.z - 0.5}, {c.x + 0.5, c.y + 0.5, c.z + 0.5}};
    p.caption = std::move(caption);
    p.detections = std::move(det);
    parts.primitives.push_back(std::move(p));
  };
  prim(1, {10, 4, 1}, "white box labeled digital twin", {3, 4, 5});
  prim(2, {11, 4, 1}, "white box", {3, 4, 5});
  prim(3, {30, 4, 1}, "white box", {9, 10});
  prim(4, {20, 20, 1}, "yellow police call pole", {12, 13, 300});
  prim(5, {40, 40, 1}, "yellow pole", {15, 16});
  prim(6, {50, 10, 1}, "yellow forklift", {18, 19});
  auto cap = [&](star::RecordId id, double t0, std::string text, std::vector<star::RecordId> prims,
                 Vec3 pos) {
    star::CaptionRecord c;
    c.id = id;
    c.t_start = t0;
    c.t_end = t0 + 3.0;
    c.pose = star::Pose{pos, 0.0};
    c.text = std::move(text);
    c.primitive_ids = std::move(prims);
    parts.captions.push_back(std::move(c));
  };
  cap(1, 3, "white box and white box labeled digital twin on the floor", {1, 2}, {10, 2, 0});
  cap(2, 9, "white box near the east wall", {3}, {30, 2, 0});
  cap(3, 12, "yellow police call pole with help sign", {4}, {20, 18, 0});
  cap(4, 15, "yellow pole at the far corner", {5}, {40, 38, 0});
  cap(5, 18, "yellow forklift parked", {6}, {50, 8, 0});
  cap(6, 297, "yellow police call pole again", {4}, {20, 18, 0});
  for (int t = 0; t <= 300; ++t) {
    star::KeyframeRecord k;
    k.timestamp = t;
    k.image_ref = "kf/" + std::to_string(t) + ".jpg";
    if (t == 4) {
      k.visible_primitive_ids = {1, 2};
      k.annotation = "white box with digital twin label";
    }
    if (t == 13) {
      k.visible_primitive_ids = {4};
      k.annotation = "yellow police call pole with help sign";
    }
    parts.keyframes.push_back(std::move(k));
  }
  parts.horizon = 300.0;
  return parts;
}

inline star::MemorySnapshot embed_and_seal(star::MemoryParts parts, const star::Embedder& e) {
  parts.embedding = e.spec();
  for (auto& c : parts.captions) c.embedding = e.embed(c.text);
  for (auto& p : parts.primitives) p.feature = e.embed(p.caption);
  return star::MemorySnapshot::seal(std::move(parts));
}

}  // namespace fixtures
