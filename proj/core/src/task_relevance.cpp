#include "star/task_relevance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "star/error.hpp"

namespace star {

TaskCueSet TaskCueSet::from_texts(std::span<const std::string> texts, const Embedder& embedder,
                                  double alpha, std::size_t topk) {
  TaskCueSet set;
  set.alpha = alpha;
  set.topk = topk;
  for (const auto& t : texts) set.cues.push_back({t, embedder.embed(t)});
  set.validate();
  return set;
}

void TaskCueSet::validate() const {
  if (cues.empty()) throw Error(ErrorCode::InvalidConfig, "cue set is empty");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0, 1)");
  if (topk == 0) throw Error(ErrorCode::InvalidConfig, "top-k must be >= 1");
  for (const auto& c : cues) {
    if (!is_unit_norm(c.embedding)) {
      throw Error(ErrorCode::InvalidConfig, "cue '" + c.text + "' embedding is not unit-norm");
    }
  }
}

std::vector<double> cue_scores(std::span<const double> feature, const TaskCueSet& cues) {
  std::vector<double> theta;
  theta.reserve(cues.size() + 1);
  theta.push_back(cues.alpha);
  for (const auto& c : cues.cues) theta.push_back(similarity(feature, c.embedding));
  return theta;
}

RelevanceDistribution relevance_distribution(std::span<const double> theta,
                                             const TaskCueSet& cues) {
  const std::size_t m = cues.size();
  if (theta.size() != m + 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "theta has " + std::to_string(theta.size()) + " entries for " +
                    std::to_string(m) + " cues");
  }
  RelevanceDistribution p(m + 1, 0.0);
  const double best = *std::max_element(theta.begin() + 1, theta.end());
  if (best < cues.alpha) {
    p[0] = 1.0;
    return p;
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return theta[a] > theta[b]; });
  const std::size_t kept = std::min(cues.topk, m);
  double mass = 0.0;
  for (std::size_t i = 0; i < kept; ++i) {
    p[order[i]] = theta[order[i]];
    mass += theta[order[i]];
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::DegenerateScores, "kept cue scores sum to zero");
  }
  for (double& x : p) x /= mass;
  return p;
}

RelevanceDistribution relevance_of(std::span<const double> feature, const TaskCueSet& cues) {
  return relevance_distribution(cue_scores(feature, cues), cues);
}

JointModel JointModel::uniform(std::vector<RelevanceDistribution> rows) {
  const double w = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
  std::vector<double> priors(rows.size(), w);
  return weighted(std::move(priors), std::move(rows));
}

JointModel JointModel::weighted(std::vector<double> priors, std::vector<RelevanceDistribution> rows) {
  if (priors.size() != rows.size()) {
    throw Error(ErrorCode::DimensionMismatch, "priors and conditionals differ in length");
  }
  JointModel j;
  j.priors = std::move(priors);
  j.conditionals = std::move(rows);
  const std::size_t ny = j.conditionals.empty() ? 0 : j.conditionals.front().size();
  j.marginal.assign(ny, 0.0);
  for (std::size_t x = 0; x < j.conditionals.size(); ++x) {
    if (j.conditionals[x].size() != ny) {
      throw Error(ErrorCode::DimensionMismatch, "conditional rows differ in length");
    }
    for (std::size_t y = 0; y < ny; ++y) j.marginal[y] += j.priors[x] * j.conditionals[x][y];
  }
  return j;
}

double mutual_information(const JointModel& joint) {
  double total = 0.0;
  for (std::size_t x = 0; x < joint.conditionals.size(); ++x) {
    const auto& row = joint.conditionals[x];
    double inner = 0.0;
    for (std::size_t y = 0; y < row.size(); ++y) {
      if (row[y] <= 0.0 || joint.marginal[y] <= 0.0) continue;
      inner += row[y] * std::log2(row[y] / joint.marginal[y]);
    }
    total += joint.priors[x] * inner;
  }
  return std::max(0.0, total);
}

double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

double weighted_js_divergence(std::span<const double> p, std::span<const double> q, double w_p,
                              double w_q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "distributions differ in length");
  }
  std::vector<double> mix(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) mix[i] = w_p * p[i] + w_q * q[i];
  return std::max(0.0, entropy_bits(mix) - w_p * entropy_bits(p) - w_q * entropy_bits(q));
}

}  // namespace star
