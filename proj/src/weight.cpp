#include "rws/weight.hpp"

#include <algorithm>
#include <cmath>

#include "rws/error.hpp"

namespace rws {

std::vector<double> sampling_weights(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("sampling weights need at least one score");
  // Shifting by the max leaves the ratio unchanged and makes equal scores
  // come out as exactly 1.
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - top);
    sum += w[i];
  }
  const double mean = sum / static_cast<double>(scores.size());
  for (double& v : w) v /= mean;
  return w;
}

WeightedBatch attach_weights(const WeightedBatch& batch, const GoalConditionedQ& q,
                             const ReachabilityClassifier& c) {
  WeightedBatch out = batch;
  if (batch.entries.empty()) return out;
  std::vector<double> scores;
  scores.reserve(batch.size());
  for (const Experience& e : batch.entries) scores.push_back(score(c, q(e.s, e.g, e.a)));
  out.weights = sampling_weights(scores);
  return out;
}

WeightedBatch attach_weights_per_entry(const WeightedBatch& batch, const GoalConditionedQ& q,
                                       const ReachabilityClassifier& c,
                                       const OfflineDataset& dataset, std::size_t m, Rng& rng) {
  if (m == 0) throw ValidationError("per-entry denominator needs at least one goal draw");
  WeightedBatch out = batch;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Experience& e = batch.entries[i];
    const std::vector<Goal> goals = sample_goals_uniform(dataset, m, rng);
    double denom = 0.0;
    for (Goal g : goals) denom += std::exp(score(c, q(e.s, g, e.a)));
    denom /= static_cast<double>(m);
    out.weights[i] = std::exp(score(c, q(e.s, e.g, e.a))) / denom;
  }
  return out;
}

WeightedBatch resample_by_weight(const WeightedBatch& batch, Rng& rng) {
  WeightedBatch out;
  if (batch.entries.empty()) return out;
  std::vector<double> cumulative(batch.size());
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    total += batch.weights[i];
    cumulative[i] = total;
  }
  out.entries.reserve(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double u = rng.uniform01() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = std::min(static_cast<std::size_t>(it - cumulative.begin()), batch.size() - 1);
    out.entries.push_back(batch.entries[idx]);
  }
  out.weights.assign(out.entries.size(), 1.0);
  return out;
}

}  // namespace rws
