#pragma once

// Reachability sampling weights: w_i = exp(c_i) / mean_k exp(c_k).

#include <cstddef>
#include <span>
#include <vector>

#include "rws/dataset.hpp"
#include "rws/reach.hpp"
#include "rws/relabel.hpp"
#include "rws/rng.hpp"
#include "rws/value.hpp"

namespace rws {

// One Monte Carlo denominator shared by the whole batch, so the weights
// average to 1. Throws ValidationError on an empty list.
std::vector<double> sampling_weights(std::span<const double> scores);

// Weights from score(c, Q(s, g, a)) of every entry.
WeightedBatch attach_weights(const WeightedBatch& batch, const GoalConditionedQ& q,
                             const ReachabilityClassifier& c);

// Per-entry denominators estimated from m goals drawn from the dataset's
// goal pool: w_i = exp(c_i) / ((1/m) sum_k exp(score(Q(s_i, g_k, a_i)))).
WeightedBatch attach_weights_per_entry(const WeightedBatch& batch, const GoalConditionedQ& q,
                                       const ReachabilityClassifier& c,
                                       const OfflineDataset& dataset, std::size_t m, Rng& rng);

// Draws batch.size() entries with replacement, proportionally to the
// weights; the result carries unit weights.
WeightedBatch resample_by_weight(const WeightedBatch& batch, Rng& rng);

}  // namespace rws
