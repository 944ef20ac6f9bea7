#pragma once

// Tabular goal-conditioned Q-function and softmax policy.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rws/env.hpp"
#include "rws/relabel.hpp"

namespace rws {

using ActionValues = std::array<double, kNumActions>;

// Q(s, g, a) over every cell pair of a width x height grid, kept inside
// [-1/(1-gamma), 0]. Entries start at the lower bound.
class GoalConditionedQ {
 public:
  GoalConditionedQ(int width, int height, double gamma);
  GoalConditionedQ(const Maze& maze, double gamma)
      : GoalConditionedQ(maze.width(), maze.height(), gamma) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double gamma() const noexcept { return gamma_; }
  // -1 / (1 - gamma): the return of never reaching the goal.
  double floor() const noexcept { return floor_; }

  // Throws MalformedStateError when s or g lies outside the grid.
  double operator()(State s, Goal g, Action a) const;
  ActionValues values(State s, Goal g) const;
  double max_value(State s, Goal g) const;

  void set(State s, Goal g, Action a, double v);

  std::span<const double> table() const noexcept { return table_; }
  // Replaces every entry; values are clamped into range. Size must match.
  void assign(std::span<const double> values);

  friend bool operator==(const GoalConditionedQ&, const GoalConditionedQ&) = default;

 private:
  std::size_t offset(State s, Goal g) const;

  int width_;
  int height_;
  double gamma_;
  double floor_;
  std::vector<double> table_;
};

inline double q_eval(const GoalConditionedQ& q, State s, Goal g, Action a) { return q(s, g, a); }

// Categorical policy pi(a | s, g) = softmax(logits(s, g, .)); logits start at 0.
class PolicyTable {
 public:
  PolicyTable(int width, int height);
  explicit PolicyTable(const Maze& maze) : PolicyTable(maze.width(), maze.height()) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  ActionValues logits(State s, Goal g) const;
  void set_logits(State s, Goal g, const ActionValues& logits);
  ActionValues probabilities(State s, Goal g) const;

  std::span<const double> table() const noexcept { return table_; }
  void assign(std::span<const double> values);

  friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

 private:
  std::size_t offset(State s, Goal g) const;

  int width_;
  int height_;
  std::vector<double> table_;
};

ActionValues softmax(const ActionValues& logits) noexcept;

// Greedy action; ties go to the earliest action in enumeration order.
Action policy_action(const PolicyTable& policy, State s, Goal g);

// Per entry, in batch order:
//   y = r + gamma * (1 - done) * max_a' Q(s', g, a')
//   Q(s, g, a) += lr * w * (y - Q(s, g, a)), then clamped into range.
// Returns the mean absolute TD error before each update.
double td_update(GoalConditionedQ& q, const WeightedBatch& batch, double lr);

// Per-sample policy objective and its gradient with respect to the logits:
//   w * ( -sum_a pi_a q_a + alpha * -log pi_{a_data} )
struct PolicyLoss {
  double value = 0.0;
  ActionValues grad{};
};
PolicyLoss policy_sample_loss(const ActionValues& logits, const ActionValues& q, Action data_action,
                              double alpha, double weight) noexcept;

// One gradient step on policy_sample_loss per entry, Q held fixed. Returns
// the mean per-sample loss.
double policy_update(PolicyTable& policy, const GoalConditionedQ& q, const WeightedBatch& batch,
                     double alpha, double lr);

}  // namespace rws
