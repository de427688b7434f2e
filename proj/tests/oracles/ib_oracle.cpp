#include "ib_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace oracle {

double plugin_mi(const std::vector<double>& priors, const std::vector<Row>& rows) {
  if (rows.empty()) return 0.0;
  const std::size_t ny = rows.front().size();
  std::vector<double> py(ny, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t y = 0; y < ny; ++y) py[y] += priors[i] * rows[i][y];
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double p = rows[i][y];
      if (p > 0.0 && priors[i] > 0.0) mi += priors[i] * p * std::log2(p / py[y]);
    }
  }
  return std::max(0.0, mi);
}

namespace {

struct Group {
  std::vector<Id> members;
  Row row;
};

double information(const std::vector<Group>& groups, std::size_t n) {
  std::vector<double> priors;
  std::vector<Row> rows;
  for (const auto& g : groups) {
    priors.push_back(static_cast<double>(g.members.size()) / static_cast<double>(n));
    rows.push_back(g.row);
  }
  return plugin_mi(priors, rows);
}

Group fuse(const Group& a, const Group& b) {
  Group g;
  g.members = a.members;
  g.members.insert(g.members.end(), b.members.begin(), b.members.end());
  std::sort(g.members.begin(), g.members.end());
  const double na = static_cast<double>(a.members.size());
  const double nb = static_cast<double>(b.members.size());
  g.row.resize(a.row.size());
  for (std::size_t y = 0; y < a.row.size(); ++y) {
    g.row[y] = (na * a.row[y] + nb * b.row[y]) / (na + nb);
  }
  return g;
}

}  // namespace

Result agglomerate(const std::vector<Id>& ids, const std::vector<Row>& rows,
                   const std::vector<std::pair<Id, Id>>& edges, double delta_bar) {
  const std::size_t n = ids.size();
  std::vector<Group> groups;
  for (std::size_t i = 0; i < n; ++i) groups.push_back({{ids[i]}, rows[i]});
  std::set<std::pair<Id, Id>> edge_set;
  for (auto [a, b] : edges) {
    if (a != b) edge_set.insert({std::min(a, b), std::max(a, b)});
  }
  auto adjacent = [&](const Group& a, const Group& b) {
    for (Id u : a.members) {
      for (Id v : b.members) {
        if (edge_set.count({std::min(u, v), std::max(u, v)})) return true;
      }
    }
    return false;
  };

  Result r;
  r.initial_information = information(groups, n);
  while (groups.size() > 1) {
    const double before = information(groups, n);
    struct Candidate {
      std::size_t i, j;
      Id k1, k2;
      double loss;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      for (std::size_t j = i + 1; j < groups.size(); ++j) {
        if (!adjacent(groups[i], groups[j])) continue;
        std::vector<Group> trial;
        for (std::size_t t = 0; t < groups.size(); ++t) {
          if (t != i && t != j) trial.push_back(groups[t]);
        }
        trial.push_back(fuse(groups[i], groups[j]));
        double loss = before - information(trial, n);
        if (loss < 1e-14) loss = 0.0;
        const Id a = groups[i].members.front();
        const Id b = groups[j].members.front();
        cands.push_back({i, j, std::min(a, b), std::max(a, b), loss});
      }
    }
    if (cands.empty()) break;
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) lowest = std::min(lowest, c.loss);
    const Candidate* pick = nullptr;
    for (const auto& c : cands) {
      if (c.loss > lowest + 1e-12) continue;
      if (pick == nullptr || std::pair(c.k1, c.k2) < std::pair(pick->k1, pick->k2)) pick = &c;
    }
    const double delta = r.initial_information > 1e-12 ? pick->loss / r.initial_information : 0.0;
    if (delta > delta_bar) {
      r.stopped_by_delta = true;
      break;
    }
    r.merges.push_back({pick->k1, pick->k2, pick->loss});
    Group fused = fuse(groups[pick->i], groups[pick->j]);
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(pick->j));
    groups[pick->i] = std::move(fused);
  }
  for (const auto& g : groups) r.clusters.push_back(g.members);
  std::sort(r.clusters.begin(), r.clusters.end());
  return r;
}

}  // namespace oracle
