#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "rws/error.hpp"
#include "rws/eval.hpp"

namespace rws {
namespace {

// Greedy policy that follows shortest maze paths.
PolicyTable bfs_policy(const Maze& maze) {
  const auto dist = oracle::all_pairs_distances(maze);
  PolicyTable pi(maze);
  for (State s : maze.free_cells())
    for (State g : maze.free_cells()) {
      ActionValues z{};
      int best = -1;
      for (Action a : kAllActions) {
        const int d = dist[maze.cell_index(step(maze, s, a))][maze.cell_index(g)];
        if (d >= 0 && (best < 0 || d < dist[maze.cell_index(step(maze, s, kAllActions[best]))][maze.cell_index(g)]))
          best = action_index(a);
      }
      if (best >= 0) z[best] = 1.0;
      pi.set_logits(s, phi(g), z);
    }
  return pi;
}

TEST(Rollout, StartAtGoal) {
  const Maze maze = open_maze(4, 1);
  const RolloutResult r = rollout(PolicyTable(maze), maze, {2, 0}, {2, 0}, kDefaultDelta, 10);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.steps, 0u);
}

TEST(Rollout, ShortestPathPolicyOnACorridor) {
  const Maze maze = open_maze(4, 1);
  const RolloutResult r = rollout(bfs_policy(maze), maze, {0, 0}, {3, 0}, kDefaultDelta, 10);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.steps, 3u);
}

TEST(Rollout, WalledOffGoalFailsAtTheHorizon) {
  const Maze maze = parse_maze("5 2\nS.#..\n..#..\n");
  const RolloutResult r = rollout(bfs_policy(maze), maze, {0, 0}, {4, 0}, kDefaultDelta, 17);
  EXPECT_FALSE(r.success);
  EXPECT_EQ(r.steps, 17u);
  EXPECT_THROW(rollout(bfs_policy(maze), maze, {0, 0}, {4, 0}, kDefaultDelta, 0), ValidationError);
  EXPECT_EQ(success_rate(bfs_policy(maze), maze, {{{0, 0}, {3, 1}}, {{1, 1}, {4, 0}}},
                         kDefaultDelta, 20),
            0.0);
}

TEST(SuccessRate, TrivialAndOracleCases) {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/rooms15.maze");
  const PolicyTable oracle_pi = bfs_policy(maze);
  std::vector<EvalPair> same, reachable;
  Rng rng(2);
  const auto cells = maze.free_cells();
  for (int i = 0; i < 50; ++i) {
    const State s = cells[rng.uniform_index(cells.size())];
    const State g = cells[rng.uniform_index(cells.size())];
    same.push_back({s, phi(s)});
    reachable.push_back({s, phi(g)});
  }
  EXPECT_EQ(success_rate(PolicyTable(maze), maze, same, kDefaultDelta, 1), 1.0);
  EXPECT_EQ(success_rate(oracle_pi, maze, reachable, kDefaultDelta, 200), 1.0);
  EXPECT_THROW(success_rate(oracle_pi, maze, {}, kDefaultDelta, 10), ValidationError);
}

TEST(Oracle, SingleTrajectoryClosure) {
  const Maze maze = open_maze(5, 5);
  const OfflineDataset d(maze, {generate_expert(maze, {0, 0}, {3, 0})});
  EXPECT_EQ(reachability_oracle(d, {1, 0}), (std::vector<Goal>{{1, 0}, {2, 0}, {3, 0}}));
  EXPECT_EQ(reachability_oracle(d, {3, 0}), (std::vector<Goal>{{3, 0}}));
  EXPECT_EQ(reachability_oracle(d, {4, 4}), (std::vector<Goal>{{4, 4}}));
  const OfflineDataset empty(maze, {});
  EXPECT_EQ(reachability_oracle(empty, {2, 3}), (std::vector<Goal>{{2, 3}}));
}

TEST(Oracle, MatchesTransitiveClosureOnSmallMazes) {
  Rng rng(19);
  for (const char* file : {"/mazes/open5.maze", "/mazes/open8.maze"}) {
    const Maze maze = load_maze(std::string(RWS_DATA_DIR) + file);
    for (int round = 0; round < 5; ++round) {
      const OfflineDataset d = build_mixture(maze, 0.3, 1 + rng.uniform_index(8), rng, 6);
      const auto closure = oracle::transitive_closure(d);
      for (State s : maze.free_cells()) {
        std::vector<Goal> expected;
        for (State g : maze.free_cells())
          if (closure[maze.cell_index(s)][maze.cell_index(g)]) expected.push_back(phi(g));
        std::sort(expected.begin(), expected.end());
        EXPECT_EQ(reachability_oracle(d, s), expected);
      }
    }
  }
}

TEST(Oracle, StitchingThroughTheSharedState) {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/stitch15.maze");
  const OfflineDataset d = build_stitching(maze);
  const Trajectory& lateral = d.trajectories()[1];
  const Trajectory& crossing = d.trajectories()[0];
  // Start of the lateral run: its own goal and, through the centre, the
  // crossing trajectory's goal.
  const std::vector<Goal> reach = reachability_oracle(d, lateral.states.front());
  EXPECT_TRUE(std::binary_search(reach.begin(), reach.end(), lateral.goal));
  EXPECT_TRUE(std::binary_search(reach.begin(), reach.end(), crossing.goal));
  // The isolated run is out of reach.
  for (State s : d.trajectories()[2].states)
    EXPECT_FALSE(std::binary_search(reach.begin(), reach.end(), phi(s)));
}

TEST(Pairs, ModesFollowTheirContracts) {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/stitch15.maze");
  const OfflineDataset d = build_stitching(maze);
  Rng rng(4);
  for (const EvalPair& p : make_eval_pairs(d, PairMode::InTrajectory, 30, rng)) {
    bool found = false;
    for (const Trajectory& t : d.trajectories())
      found |= t.states.front() == p.start && t.goal == p.goal;
    EXPECT_TRUE(found);
  }
  // Some trajectory holds the start but not the goal, and another holds the goal.
  const auto on = [](const Trajectory& t, State s) {
    return std::find(t.states.begin(), t.states.end(), s) != t.states.end();
  };
  for (const EvalPair& p : make_eval_pairs(d, PairMode::Stitching, 200, rng)) {
    const State goal{p.goal.x, p.goal.y};
    bool ok = false;
    for (const Trajectory& t : d.trajectories()) {
      if (!on(t, p.start) || on(t, goal)) continue;
      for (const Trajectory& u : d.trajectories()) ok |= &u != &t && on(u, goal);
    }
    EXPECT_TRUE(ok);
  }
  const auto held = make_eval_pairs(d, PairMode::HeldOut, 20, rng);
  ASSERT_EQ(held.size(), 20u);
  for (const EvalPair& p : held) EXPECT_EQ(p.start, (State{14, 14}));
  const auto stitched = make_eval_pairs(d, PairMode::Stitching, 300, rng);
  const auto feasible = feasible_pairs(d, stitched);
  EXPECT_FALSE(feasible.empty());
  EXPECT_LT(feasible.size(), stitched.size());
  for (const EvalPair& p : feasible) {
    const auto reach = reachability_oracle(d, p.start);
    EXPECT_TRUE(std::binary_search(reach.begin(), reach.end(), p.goal));
  }
  for (PairMode m : {PairMode::InTrajectory, PairMode::Stitching, PairMode::HeldOut})
    EXPECT_EQ(parse_pair_mode(pair_mode_name(m)), m);
  EXPECT_THROW(parse_pair_mode("random"), ValidationError);
  const OfflineDataset one(maze, {d.trajectories()[0]});
  EXPECT_THROW(make_eval_pairs(one, PairMode::Stitching, 1, rng), ValidationError);
}

TEST(Heatmap, FlatClassifierGivesOnes) {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/rooms15.maze");
  const GoalConditionedQ q(maze, 0.95);
  const PolicyTable pi(maze);
  const Heatmap h = weight_heatmap({1, 1}, q, pi, ReachabilityClassifier{}, maze);
  EXPECT_EQ(h.width, maze.width());
  EXPECT_EQ(h.height, maze.height());
  ASSERT_EQ(h.values.size(), static_cast<std::size_t>(maze.cell_count()));
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x) {
      if (maze.is_wall(x, y))
        EXPECT_TRUE(std::isnan(h.at(x, y)));
      else
        EXPECT_EQ(h.at(x, y), 1.0);
    }
  EXPECT_THROW(weight_heatmap({7, 0}, q, pi, ReachabilityClassifier{}, maze), MalformedStateError);
}

TEST(Heatmap, NormalizedOverFreeCellsAndRendered) {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/rooms15.maze");
  Rng rng(8);
  GoalConditionedQ q(maze, 0.95);
  for (State s : maze.free_cells())
    for (Action a : kAllActions) q.set({1, 1}, phi(s), a, rng.uniform_real(q.floor(), 0.0));
  ReachabilityClassifier c;
  c.slope = 0.7;
  c.intercept = 2.0;
  for (HeatmapAction mode : {HeatmapAction::Greedy, HeatmapAction::Mean}) {
    const Heatmap h = weight_heatmap({1, 1}, q, PolicyTable(maze), c, maze, mode);
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : h.values)
      if (!std::isnan(v)) {
        sum += v;
        ++n;
      }
    EXPECT_EQ(n, maze.free_cells().size());
    EXPECT_NEAR(sum / static_cast<double>(n), 1.0, 1e-9);
    const std::string text = heatmap_text(h);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), maze.height());
    EXPECT_NE(text.find("NaN"), std::string::npos);
    const std::string pgm = heatmap_pgm(h);
    const std::string header = "P5\n15 15\n255\n";
    EXPECT_EQ(pgm.substr(0, header.size()), header);
    EXPECT_EQ(pgm.size(), header.size() + 225);
  }
}

TEST(Compare, ReportShape) {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/stitch15.maze");
  const OfflineDataset d = build_stitching(maze);
  Rng rng(1);
  const auto pairs = make_eval_pairs(d, PairMode::Stitching, 10, rng);
  TrainerConfig a;
  a.iterations = 5;
  a.batch_size = 16;
  TrainerConfig b = a;
  b.sampler = Sampler::Uniform;
  const CompareReport serial = compare(d, {a, b}, 3, pairs, 1);
  ASSERT_EQ(serial.per_seed.size(), 6u);
  ASSERT_EQ(serial.aggregate.size(), 2u);
  EXPECT_EQ(serial.aggregate[0].label, "rws");
  EXPECT_EQ(serial.aggregate[1].label, "uniform");
  EXPECT_EQ(serial.per_seed[2].seed, 2u);
  const CompareReport threaded = compare(d, {a, b}, 3, pairs, 3);
  EXPECT_EQ(per_seed_csv(serial), per_seed_csv(threaded));
  EXPECT_EQ(aggregate_csv(serial), aggregate_csv(threaded));
  const std::string agg = aggregate_csv(serial);
  EXPECT_EQ(agg.substr(0, agg.find('\n')), "sampler,mean,stderr,n_seeds");
  EXPECT_EQ(std::count(agg.begin(), agg.end(), '\n'), 3);
  EXPECT_THROW(compare(d, {a}, 3, pairs), ValidationError);
  EXPECT_THROW(compare(d, {a, b}, 0, pairs), ValidationError);
}

}  // namespace
}  // namespace rws
