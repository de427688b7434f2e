#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "star/embedding.hpp"

namespace star {

// Task relevance variable Y has support {null, cue_1, ..., cue_m}; index 0 is
// the null task.
struct TaskCue {
  std::string text;
  std::vector<double> embedding;
};

struct TaskCueSet {
  std::vector<TaskCue> cues;
  double alpha = 0.1;     // null-task floor, in (0, 1)
  std::size_t topk = 2;   // cues kept by the top-k operator

  static TaskCueSet from_texts(std::span<const std::string> texts, const Embedder& embedder,
                               double alpha = 0.1, std::size_t topk = 2);

  std::size_t size() const { return cues.size(); }
  void validate() const;
};

// p(y | x); non-negative, sums to 1.
using RelevanceDistribution = std::vector<double>;

// theta_0 = alpha, theta_j = similarity(feature, cue_j).
std::vector<double> cue_scores(std::span<const double> feature, const TaskCueSet& cues);

// Null task when every cue score is strictly below alpha; otherwise the null
// entry is zeroed, the k largest cue scores are kept (lower index wins ties)
// and the kept vector is normalized.
RelevanceDistribution relevance_distribution(std::span<const double> theta,
                                             const TaskCueSet& cues);

// Convenience: relevance_distribution(cue_scores(feature)).
RelevanceDistribution relevance_of(std::span<const double> feature, const TaskCueSet& cues);

// p(x) uniform over N sources, rows p(y|x), marginal p(y) = priors^T rows.
struct JointModel {
  std::vector<double> priors;
  std::vector<RelevanceDistribution> conditionals;
  std::vector<double> marginal;

  static JointModel uniform(std::vector<RelevanceDistribution> rows);
  static JointModel weighted(std::vector<double> priors, std::vector<RelevanceDistribution> rows);
};

// Plug-in I(X; Y) in bits with 0 log 0 = 0. Never negative.
double mutual_information(const JointModel& joint);

// Shannon entropy in bits.
double entropy_bits(std::span<const double> p);

// JS divergence with mixture weights (w_p, w_q), w_p + w_q = 1, in bits.
double weighted_js_divergence(std::span<const double> p, std::span<const double> q, double w_p,
                              double w_q);

}  // namespace star
