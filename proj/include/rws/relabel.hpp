#pragma once

// Positive (hindsight) and unlabeled (uniform-goal) batches, and the
// reward-annotated batch used for the value and policy updates.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rws/dataset.hpp"
#include "rws/env.hpp"
#include "rws/rng.hpp"

namespace rws {

enum class Label { Positive, Unlabeled };

struct StateGoalAction {
  State s;
  Goal g;
  Action a = Action::Up;
  friend bool operator==(const StateGoalAction&, const StateGoalAction&) = default;
};

struct LabeledBatch {
  std::vector<StateGoalAction> entries;
  Label label = Label::Unlabeled;
};

struct Experience {
  State s;
  Action a = Action::Up;
  Goal g;
  double r = -1.0;
  State next;
  bool done = false;
  friend bool operator==(const Experience&, const Experience&) = default;
};

// entries[i] is weighted by weights[i]; all weights are positive.
struct WeightedBatch {
  std::vector<Experience> entries;
  std::vector<double> weights;

  std::size_t size() const noexcept { return entries.size(); }
};

// phi(s_h) for h drawn uniformly from {step + 1, ..., L} of the transition's
// trajectory; nullopt when the reference does not name a valid transition.
std::optional<Goal> hindsight_goal(const OfflineDataset& dataset, const Transition& t, Rng& rng);

struct HindsightBatch {
  LabeledBatch batch;
  std::size_t skipped = 0;  // transitions without any future state
};

HindsightBatch her_positive_batch(const OfflineDataset& dataset,
                                  std::span<const Transition> transitions, Rng& rng);

// Pairs transitions[i] with goals[i]. Throws ValidationError on a size mismatch.
LabeledBatch unlabeled_batch(std::span<const Transition> transitions, std::span<const Goal> goals);

// Entry i takes its goal from `positive` with probability `ratio`, otherwise
// from `unlabeled`. Both batches must be aligned with the same transitions.
LabeledBatch mix_goals(const LabeledBatch& positive, const LabeledBatch& unlabeled, double ratio,
                       Rng& rng);

// r = reward(s', g), done = is_terminal(s', g); all weights 1.
WeightedBatch annotate_rewards(const LabeledBatch& batch, std::span<const Transition> transitions,
                               double delta);

}  // namespace rws
