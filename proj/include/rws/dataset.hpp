#pragma once

// Offline goal-conditioned trajectory corpora: generation, storage, sampling.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rws/env.hpp"
#include "rws/rng.hpp"

namespace rws {

enum class Source : std::uint8_t { Expert, Random };

std::string_view source_name(Source s) noexcept;

struct Trajectory {
  std::vector<State> states;  // length() + 1 entries
  std::vector<Action> actions;
  Goal goal;
  Source source = Source::Random;

  std::size_t length() const noexcept { return actions.size(); }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Position of one (s_t, a_t) pair inside the dataset.
struct TransitionRef {
  std::size_t trajectory = 0;
  std::size_t step = 0;
  friend bool operator==(const TransitionRef&, const TransitionRef&) = default;
};

struct Transition {
  State s;
  Action a = Action::Up;
  State next;
  std::size_t trajectory = 0;
  std::size_t step = 0;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// Immutable after construction.
class OfflineDataset {
 public:
  // Validates every trajectory against the maze dynamics; throws
  // ValidationError on the first inconsistency.
  OfflineDataset(Maze maze, std::vector<Trajectory> trajectories);

  const Maze& maze() const noexcept { return maze_; }
  const std::vector<Trajectory>& trajectories() const noexcept { return trajectories_; }
  const std::vector<TransitionRef>& flat_index() const noexcept { return flat_index_; }
  const std::vector<Goal>& goal_pool() const noexcept { return goal_pool_; }

  std::size_t transition_count() const noexcept { return flat_index_.size(); }
  Transition transition(TransitionRef ref) const;
  Transition transition(std::size_t flat) const { return transition(flat_index_.at(flat)); }

  std::size_t count(Source source) const;
  // Number of distinct free cells visited by any trajectory.
  std::size_t state_coverage() const;

  friend bool operator==(const OfflineDataset& a, const OfflineDataset& b) {
    return a.maze_ == b.maze_ && a.trajectories_ == b.trajectories_;
  }

 private:
  Maze maze_;
  std::vector<Trajectory> trajectories_;
  std::vector<TransitionRef> flat_index_;
  std::vector<Goal> goal_pool_;
};

// Shortest path from start to goal. Among equal-length continuations the
// action earliest in enumeration order wins. Throws GenerationError when the
// goal cannot be reached.
Trajectory generate_expert(const Maze& maze, State start, Goal goal);

// Uniform random actions; goal is phi of a uniformly chosen visited state.
Trajectory generate_random(const Maze& maze, State start, std::size_t length, Rng& rng);

// Straight axis-aligned moves through each waypoint in turn. The goal is phi
// of the last waypoint. Throws GenerationError if a segment is blocked or
// diagonal.
Trajectory trajectory_through(const Maze& maze, const std::vector<State>& waypoints,
                              Source source = Source::Expert);

inline constexpr std::size_t kDefaultRandomLength = 30;

// round(expert_ratio * n_traj) expert trajectories between a uniformly drawn
// start cell and a uniformly drawn goal reachable from it; the rest are random
// walks of `random_length` steps from uniformly drawn start cells.
OfflineDataset build_mixture(const Maze& maze, double expert_ratio, std::size_t n_traj, Rng& rng,
                             std::size_t random_length = kDefaultRandomLength);

// One single-step trajectory for every (free cell, action) pair.
OfflineDataset build_full_coverage(const Maze& maze);

// Three trajectories in the layout of a goal-stitching example:
//   crossing  top-right corner -> left along the top -> down the middle
//             column -> left along the bottom to the bottom-left corner
//   lateral   middle of the left edge -> right edge, crossing the first
//             trajectory at the maze centre
//   isolated  short run along the second row from the right edge, touching
//             neither of the others
// Requires an open region covering those paths and width, height >= 7.
OfflineDataset build_stitching(const Maze& maze);

std::string dataset_to_text(const OfflineDataset& dataset);
// Throws ParseError (with line number) or ValidationError.
OfflineDataset dataset_from_text(std::string_view text, const Maze& maze);

void save_dataset(const OfflineDataset& dataset, const std::string& path);
OfflineDataset load_dataset(const std::string& path, const Maze& maze);

// n uniform draws with replacement from the flat transition index.
std::vector<Transition> sample_transitions(const OfflineDataset& dataset, std::size_t n, Rng& rng);

// n uniform draws with replacement from the goal pool.
std::vector<Goal> sample_goals_uniform(const OfflineDataset& dataset, std::size_t n, Rng& rng);

}  // namespace rws
