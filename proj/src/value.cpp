#include "rws/value.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rws/error.hpp"

namespace rws {

namespace {

std::size_t table_offset(int width, int height, State s, Goal g) {
  auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < width && y < height; };
  if (!inside(s.x, s.y) || !inside(g.x, g.y)) {
    throw MalformedStateError("table index out of range: s=(" + std::to_string(s.x) + "," +
                              std::to_string(s.y) + ") g=(" + std::to_string(g.x) + "," +
                              std::to_string(g.y) + ")");
  }
  const auto cells = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const auto si = static_cast<std::size_t>(s.y * width + s.x);
  const auto gi = static_cast<std::size_t>(g.y * width + g.x);
  return (si * cells + gi) * kNumActions;
}

}  // namespace

GoalConditionedQ::GoalConditionedQ(int width, int height, double gamma)
    : width_(width), height_(height), gamma_(gamma) {
  if (width <= 0 || height <= 0) throw ValidationError("Q table dimensions must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
  floor_ = -1.0 / (1.0 - gamma);
  const auto cells = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  table_.assign(cells * cells * kNumActions, floor_);
}

std::size_t GoalConditionedQ::offset(State s, Goal g) const {
  return table_offset(width_, height_, s, g);
}

double GoalConditionedQ::operator()(State s, Goal g, Action a) const {
  return table_[offset(s, g) + static_cast<std::size_t>(action_index(a))];
}

ActionValues GoalConditionedQ::values(State s, Goal g) const {
  const std::size_t o = offset(s, g);
  ActionValues v;
  std::copy_n(table_.begin() + static_cast<std::ptrdiff_t>(o), kNumActions, v.begin());
  return v;
}

double GoalConditionedQ::max_value(State s, Goal g) const {
  const ActionValues v = values(s, g);
  return *std::max_element(v.begin(), v.end());
}

void GoalConditionedQ::set(State s, Goal g, Action a, double v) {
  table_[offset(s, g) + static_cast<std::size_t>(action_index(a))] = std::clamp(v, floor_, 0.0);
}

void GoalConditionedQ::assign(std::span<const double> values) {
  if (values.size() != table_.size()) throw ValidationError("Q table size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) table_[i] = std::clamp(values[i], floor_, 0.0);
}

PolicyTable::PolicyTable(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ValidationError("policy table dimensions must be positive");
  const auto cells = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  table_.assign(cells * cells * kNumActions, 0.0);
}

std::size_t PolicyTable::offset(State s, Goal g) const {
  return table_offset(width_, height_, s, g);
}

ActionValues PolicyTable::logits(State s, Goal g) const {
  const std::size_t o = offset(s, g);
  ActionValues v;
  std::copy_n(table_.begin() + static_cast<std::ptrdiff_t>(o), kNumActions, v.begin());
  return v;
}

void PolicyTable::set_logits(State s, Goal g, const ActionValues& logits) {
  std::copy(logits.begin(), logits.end(), table_.begin() + static_cast<std::ptrdiff_t>(offset(s, g)));
}

ActionValues PolicyTable::probabilities(State s, Goal g) const { return softmax(logits(s, g)); }

void PolicyTable::assign(std::span<const double> values) {
  if (values.size() != table_.size()) throw ValidationError("policy table size mismatch");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("policy logits must be finite");
  }
  std::copy(values.begin(), values.end(), table_.begin());
}

ActionValues softmax(const ActionValues& logits) noexcept {
  const double m = *std::max_element(logits.begin(), logits.end());
  ActionValues p;
  double sum = 0.0;
  for (int i = 0; i < kNumActions; ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

Action policy_action(const PolicyTable& policy, State s, Goal g) {
  const ActionValues z = policy.logits(s, g);
  int best = 0;
  for (int i = 1; i < kNumActions; ++i)
    if (z[i] > z[best]) best = i;
  return static_cast<Action>(best);
}

double td_update(GoalConditionedQ& q, const WeightedBatch& batch, double lr) {
  if (batch.weights.size() != batch.entries.size()) {
    throw ValidationError("td_update: weights are not aligned with entries");
  }
  if (batch.entries.empty()) return 0.0;
  double abs_err = 0.0;
  for (std::size_t i = 0; i < batch.entries.size(); ++i) {
    const Experience& e = batch.entries[i];
    const double bootstrap = e.done ? 0.0 : q.gamma() * q.max_value(e.next, e.g);
    const double target = e.r + bootstrap;
    const double current = q(e.s, e.g, e.a);
    const double err = target - current;
    abs_err += std::abs(err);
    q.set(e.s, e.g, e.a, current + lr * batch.weights[i] * err);
  }
  return abs_err / static_cast<double>(batch.entries.size());
}

PolicyLoss policy_sample_loss(const ActionValues& logits, const ActionValues& q, Action data_action,
                              double alpha, double weight) noexcept {
  const ActionValues p = softmax(logits);
  const int d = action_index(data_action);
  double expected_q = 0.0;
  for (int i = 0; i < kNumActions; ++i) expected_q += p[i] * q[i];
  PolicyLoss out;
  out.value = weight * (-expected_q - alpha * std::log(p[d]));
  for (int j = 0; j < kNumActions; ++j) {
    // d/dz_j of -E_pi[q] is -p_j (q_j - E_pi[q]); of -log p_d it is p_j - [j == d].
    const double q_term = -p[j] * (q[j] - expected_q);
    const double bc_term = p[j] - (j == d ? 1.0 : 0.0);
    out.grad[j] = weight * (q_term + alpha * bc_term);
  }
  return out;
}

double policy_update(PolicyTable& policy, const GoalConditionedQ& q, const WeightedBatch& batch,
                     double alpha, double lr) {
  if (batch.weights.size() != batch.entries.size()) {
    throw ValidationError("policy_update: weights are not aligned with entries");
  }
  if (batch.entries.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < batch.entries.size(); ++i) {
    const Experience& e = batch.entries[i];
    ActionValues z = policy.logits(e.s, e.g);
    const PolicyLoss loss = policy_sample_loss(z, q.values(e.s, e.g), e.a, alpha, batch.weights[i]);
    for (int j = 0; j < kNumActions; ++j) z[j] -= lr * loss.grad[j];
    policy.set_logits(e.s, e.g, z);
    total += loss.value;
  }
  return total / static_cast<double>(batch.entries.size());
}

}  // namespace rws
