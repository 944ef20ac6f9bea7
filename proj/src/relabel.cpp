#include "rws/relabel.hpp"

#include "rws/error.hpp"

namespace rws {

std::optional<Goal> hindsight_goal(const OfflineDataset& dataset, const Transition& t, Rng& rng) {
  const auto& trajectories = dataset.trajectories();
  if (t.trajectory >= trajectories.size()) return std::nullopt;
  const Trajectory& traj = trajectories[t.trajectory];
  const std::size_t len = traj.length();
  if (len == 0 || t.step >= len) return std::nullopt;
  // h uniform on {step + 1, ..., len}.
  const std::size_t h = t.step + 1 + rng.uniform_index(len - t.step);
  return phi(traj.states[h]);
}

HindsightBatch her_positive_batch(const OfflineDataset& dataset,
                                  std::span<const Transition> transitions, Rng& rng) {
  HindsightBatch out;
  out.batch.label = Label::Positive;
  out.batch.entries.reserve(transitions.size());
  for (const Transition& t : transitions) {
    if (auto g = hindsight_goal(dataset, t, rng)) {
      out.batch.entries.push_back({t.s, *g, t.a});
    } else {
      ++out.skipped;
    }
  }
  return out;
}

LabeledBatch unlabeled_batch(std::span<const Transition> transitions, std::span<const Goal> goals) {
  if (transitions.size() != goals.size()) {
    throw ValidationError("unlabeled batch: " + std::to_string(transitions.size()) +
                          " transitions but " + std::to_string(goals.size()) + " goals");
  }
  LabeledBatch out;
  out.label = Label::Unlabeled;
  out.entries.reserve(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) {
    out.entries.push_back({transitions[i].s, goals[i], transitions[i].a});
  }
  return out;
}

LabeledBatch mix_goals(const LabeledBatch& positive, const LabeledBatch& unlabeled, double ratio,
                       Rng& rng) {
  if (positive.entries.size() != unlabeled.entries.size()) {
    throw ValidationError("mix_goals: batches are not aligned");
  }
  LabeledBatch out = unlabeled;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    if (rng.uniform01() < ratio) out.entries[i].g = positive.entries[i].g;
  }
  return out;
}

WeightedBatch annotate_rewards(const LabeledBatch& batch, std::span<const Transition> transitions,
                               double delta) {
  if (batch.entries.size() != transitions.size()) {
    throw ValidationError("annotate_rewards: batch and transitions are not aligned");
  }
  WeightedBatch out;
  out.entries.reserve(transitions.size());
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const StateGoalAction& e = batch.entries[i];
    const State next = transitions[i].next;
    out.entries.push_back({e.s, e.a, e.g, reward(next, e.g, delta), next,
                           is_terminal(next, e.g, delta)});
  }
  out.weights.assign(out.entries.size(), 1.0);
  return out;
}

}  // namespace rws
