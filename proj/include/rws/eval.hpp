#pragma once

// Rollouts, success metrics, the dataset reachability oracle, weight
// heatmaps and multi-seed sampler comparisons.

#include <cstddef>
#include <string>
#include <vector>

#include "rws/dataset.hpp"
#include "rws/env.hpp"
#include "rws/reach.hpp"
#include "rws/rng.hpp"
#include "rws/trainer.hpp"
#include "rws/value.hpp"

namespace rws {

struct RolloutResult {
  bool success = false;
  std::size_t steps = 0;
};

// Greedy policy execution; steps is the first hitting time, or max_steps.
RolloutResult rollout(const PolicyTable& policy, const Maze& maze, State start, Goal goal,
                      double delta, std::size_t max_steps);

struct EvalPair {
  State start;
  Goal goal;
  friend bool operator==(const EvalPair&, const EvalPair&) = default;
};

double success_rate(const PolicyTable& policy, const Maze& maze, const std::vector<EvalPair>& pairs,
                    double delta, std::size_t max_steps);

// Goals reachable from `start` along the directed graph whose edges are the
// dataset's (s -> s') transitions, sorted. Always contains phi(start).
std::vector<Goal> reachability_oracle(const OfflineDataset& dataset, State start);

enum class PairMode {
  InTrajectory,  // first state of a trajectory and that trajectory's goal
  Stitching,     // start and goal cells drawn from two different trajectories
  HeldOut,       // maze start cell and any free cell reachable in the maze
};

std::string_view pair_mode_name(PairMode m) noexcept;
PairMode parse_pair_mode(std::string_view name);

// n pairs drawn with `rng`. Stitching goals never lie on the start's own
// trajectory. Throws ValidationError when the dataset cannot supply the mode.
std::vector<EvalPair> make_eval_pairs(const OfflineDataset& dataset, PairMode mode, std::size_t n,
                                      Rng& rng);

// Keeps pairs whose goal is in reachability_oracle(dataset, start).
std::vector<EvalPair> feasible_pairs(const OfflineDataset& dataset,
                                     const std::vector<EvalPair>& pairs);

enum class HeatmapAction { Greedy, Mean };

// Row-major grid (y = 0 first) of sampling weights for goals around one
// state; walls hold NaN.
struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values[static_cast<std::size_t>(y * width + x)]; }
};

// Scores every free goal cell g with score(c, Q(state, g, a)), where a is the
// greedy policy action (or, for Mean, the score averaged over actions), then
// normalizes the scores across cells with sampling_weights.
Heatmap weight_heatmap(State state, const GoalConditionedQ& q, const PolicyTable& policy,
                       const ReachabilityClassifier& c, const Maze& maze,
                       HeatmapAction mode = HeatmapAction::Greedy);

// One row per maze row, space separated, "NaN" on walls.
std::string heatmap_text(const Heatmap& h);
// Binary graymap (P5); darker is a higher weight, walls are white. Rows are
// written top row (largest y) first.
std::string heatmap_pgm(const Heatmap& h);

struct SeedResult {
  std::string label;
  std::uint64_t seed = 0;
  double success_rate = 0.0;
};

struct AggregateResult {
  std::string label;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_seeds = 0;
};

struct CompareReport {
  std::vector<SeedResult> per_seed;
  std::vector<AggregateResult> aggregate;  // one row per config
};

// Trains every config with seeds config.seed + i, i < n_seeds, and evaluates
// success on `pairs`. Runs use up to `threads` workers (0 or 1: serial);
// the report does not depend on the thread count.
CompareReport compare(const OfflineDataset& dataset, const std::vector<TrainerConfig>& configs,
                      std::size_t n_seeds, const std::vector<EvalPair>& pairs,
                      std::size_t threads = 0);

std::string per_seed_csv(const CompareReport& report);
std::string aggregate_csv(const CompareReport& report);

}  // namespace rws
