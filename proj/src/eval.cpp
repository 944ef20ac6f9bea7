#include "rws/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <thread>

#include "rws/error.hpp"
#include "rws/weight.hpp"

namespace rws {

RolloutResult rollout(const PolicyTable& policy, const Maze& maze, State start, Goal goal,
                      double delta, std::size_t max_steps) {
  require_valid(maze, start);
  require_valid(maze, goal);
  if (max_steps == 0) throw ValidationError("rollout needs max_steps >= 1");
  State s = start;
  for (std::size_t t = 0; t <= max_steps; ++t) {
    if (is_terminal(s, goal, delta)) return {true, t};
    if (t == max_steps) break;
    s = step(maze, s, policy_action(policy, s, goal));
  }
  return {false, max_steps};
}

double success_rate(const PolicyTable& policy, const Maze& maze, const std::vector<EvalPair>& pairs,
                    double delta, std::size_t max_steps) {
  if (pairs.empty()) throw ValidationError("success rate needs at least one evaluation pair");
  std::size_t wins = 0;
  for (const EvalPair& p : pairs) wins += rollout(policy, maze, p.start, p.goal, delta, max_steps).success;
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

std::vector<Goal> reachability_oracle(const OfflineDataset& dataset, State start) {
  const Maze& maze = dataset.maze();
  require_valid(maze, start);
  const auto cells = static_cast<std::size_t>(maze.cell_count());
  std::vector<std::vector<int>> edges(cells);
  for (const Trajectory& t : dataset.trajectories()) {
    for (std::size_t i = 0; i < t.length(); ++i) {
      edges[static_cast<std::size_t>(maze.cell_index(t.states[i]))].push_back(
          maze.cell_index(t.states[i + 1]));
    }
  }
  std::vector<bool> seen(cells, false);
  std::deque<int> frontier{maze.cell_index(start)};
  seen[static_cast<std::size_t>(frontier.front())] = true;
  while (!frontier.empty()) {
    const int c = frontier.front();
    frontier.pop_front();
    for (int n : edges[static_cast<std::size_t>(c)]) {
      if (!seen[static_cast<std::size_t>(n)]) {
        seen[static_cast<std::size_t>(n)] = true;
        frontier.push_back(n);
      }
    }
  }
  std::vector<Goal> out;
  for (std::size_t c = 0; c < cells; ++c)
    if (seen[c]) out.push_back(phi(maze.state_at(static_cast<int>(c))));
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view pair_mode_name(PairMode m) noexcept {
  switch (m) {
    case PairMode::InTrajectory: return "in_trajectory";
    case PairMode::Stitching: return "stitching";
    case PairMode::HeldOut: return "held_out";
  }
  return "?";
}

PairMode parse_pair_mode(std::string_view name) {
  if (name == "in_trajectory") return PairMode::InTrajectory;
  if (name == "stitching") return PairMode::Stitching;
  if (name == "held_out") return PairMode::HeldOut;
  throw ValidationError("unknown pair mode '" + std::string(name) + "'");
}

std::vector<EvalPair> make_eval_pairs(const OfflineDataset& dataset, PairMode mode, std::size_t n,
                                      Rng& rng) {
  const Maze& maze = dataset.maze();
  const auto& trajs = dataset.trajectories();
  std::vector<EvalPair> pairs;
  pairs.reserve(n);
  switch (mode) {
    case PairMode::InTrajectory: {
      std::vector<std::size_t> usable;
      for (std::size_t i = 0; i < trajs.size(); ++i)
        if (trajs[i].length() > 0) usable.push_back(i);
      if (usable.empty()) throw ValidationError("in_trajectory pairs need a nonempty trajectory");
      for (std::size_t k = 0; k < n; ++k) {
        const Trajectory& t = trajs[usable[rng.uniform_index(usable.size())]];
        pairs.push_back({t.states.front(), t.goal});
      }
      break;
    }
    case PairMode::Stitching: {
      if (trajs.size() < 2) throw ValidationError("stitching pairs need at least two trajectories");
      // Goals on the start's own trajectory would not need stitching.
      std::vector<std::vector<bool>> on_traj(trajs.size(),
                                             std::vector<bool>(static_cast<std::size_t>(maze.cell_count()), false));
      for (std::size_t i = 0; i < trajs.size(); ++i)
        for (State s : trajs[i].states) on_traj[i][static_cast<std::size_t>(maze.cell_index(s))] = true;
      std::size_t attempts = 0;
      while (pairs.size() < n) {
        if (++attempts > 1000 * (n + 1)) throw ValidationError("could not draw stitching pairs");
        const std::size_t i = rng.uniform_index(trajs.size());
        std::size_t j = rng.uniform_index(trajs.size() - 1);
        if (j >= i) ++j;
        const State start = trajs[i].states[rng.uniform_index(trajs[i].states.size())];
        const State goal = trajs[j].states[rng.uniform_index(trajs[j].states.size())];
        if (on_traj[i][static_cast<std::size_t>(maze.cell_index(goal))]) continue;
        pairs.push_back({start, phi(goal)});
      }
      break;
    }
    case PairMode::HeldOut: {
      const auto& starts = maze.start_cells();
      std::size_t attempts = 0;
      while (pairs.size() < n) {
        if (++attempts > 1000 * (n + 1)) throw ValidationError("could not draw held-out pairs");
        const State start = starts[rng.uniform_index(starts.size())];
        const std::vector<int> dist = distances_to(maze, start);
        std::vector<State> goals;
        for (State c : maze.free_cells())
          if (dist[static_cast<std::size_t>(maze.cell_index(c))] > 0) goals.push_back(c);
        if (goals.empty()) continue;
        pairs.push_back({start, phi(goals[rng.uniform_index(goals.size())])});
      }
      break;
    }
  }
  return pairs;
}

std::vector<EvalPair> feasible_pairs(const OfflineDataset& dataset,
                                     const std::vector<EvalPair>& pairs) {
  std::map<State, std::vector<Goal>> cache;
  std::vector<EvalPair> out;
  for (const EvalPair& p : pairs) {
    auto it = cache.find(p.start);
    if (it == cache.end()) it = cache.emplace(p.start, reachability_oracle(dataset, p.start)).first;
    if (std::binary_search(it->second.begin(), it->second.end(), p.goal)) out.push_back(p);
  }
  return out;
}

Heatmap weight_heatmap(State state, const GoalConditionedQ& q, const PolicyTable& policy,
                       const ReachabilityClassifier& c, const Maze& maze, HeatmapAction mode) {
  require_valid(maze, state);
  Heatmap h{maze.width(), maze.height(),
            std::vector<double>(static_cast<std::size_t>(maze.cell_count()),
                                std::numeric_limits<double>::quiet_NaN())};
  const std::vector<State> cells = maze.free_cells();
  std::vector<double> scores;
  scores.reserve(cells.size());
  for (State cell : cells) {
    const Goal g = phi(cell);
    if (mode == HeatmapAction::Greedy) {
      scores.push_back(score(c, q(state, g, policy_action(policy, state, g))));
    } else {
      double sum = 0.0;
      for (Action a : kAllActions) sum += score(c, q(state, g, a));
      scores.push_back(sum / kNumActions);
    }
  }
  const std::vector<double> w = sampling_weights(scores);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    h.values[static_cast<std::size_t>(maze.cell_index(cells[i]))] = w[i];
  }
  return h;
}

std::string heatmap_text(const Heatmap& h) {
  std::string out;
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      if (x > 0) out += ' ';
      const double v = h.at(x, y);
      out += std::isnan(v) ? "NaN" : format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string heatmap_pgm(const Heatmap& h) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : h.values) {
    if (std::isnan(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::string out = "P5\n" + std::to_string(h.width) + " " + std::to_string(h.height) + "\n255\n";
  for (int y = h.height - 1; y >= 0; --y) {
    for (int x = 0; x < h.width; ++x) {
      const double v = h.at(x, y);
      int gray = 255;
      if (!std::isnan(v)) {
        const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        gray = static_cast<int>(std::lround(230.0 * (1.0 - t)));
      }
      out += static_cast<char>(static_cast<unsigned char>(gray));
    }
  }
  return out;
}

CompareReport compare(const OfflineDataset& dataset, const std::vector<TrainerConfig>& configs,
                      std::size_t n_seeds, const std::vector<EvalPair>& pairs, std::size_t threads) {
  if (configs.size() < 2) throw ValidationError("compare needs at least two configs");
  if (n_seeds == 0) throw ValidationError("compare needs at least one seed");
  if (pairs.empty()) throw ValidationError("compare needs at least one evaluation pair");
  for (const TrainerConfig& c : configs) validate(c);

  const std::size_t jobs = configs.size() * n_seeds;
  std::vector<SeedResult> results(jobs);
  auto run = [&](std::size_t job) {
    TrainerConfig config = configs[job / n_seeds];
    config.seed += job % n_seeds;
    const RunState state = train(dataset, config);
    results[job] = {config.label(), config.seed,
                    success_rate(state.policy, dataset.maze(), pairs, config.delta, config.max_steps)};
  };

  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) run(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < std::min(threads, jobs); ++w) {
      workers.emplace_back([&] {
        for (std::size_t j = next++; j < jobs; j = next++) {
          try {
            run(j);
          } catch (...) {
            errors[j] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  CompareReport report;
  report.per_seed = results;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    AggregateResult agg;
    agg.label = configs[c].label();
    agg.n_seeds = n_seeds;
    for (std::size_t s = 0; s < n_seeds; ++s) agg.mean += results[c * n_seeds + s].success_rate;
    agg.mean /= static_cast<double>(n_seeds);
    if (n_seeds > 1) {
      double ss = 0.0;
      for (std::size_t s = 0; s < n_seeds; ++s) {
        const double d = results[c * n_seeds + s].success_rate - agg.mean;
        ss += d * d;
      }
      const double sd = std::sqrt(ss / static_cast<double>(n_seeds - 1));
      agg.std_error = sd / std::sqrt(static_cast<double>(n_seeds));
    }
    report.aggregate.push_back(agg);
  }
  return report;
}

std::string per_seed_csv(const CompareReport& report) {
  std::string out = "sampler,seed,success_rate\n";
  for (const SeedResult& r : report.per_seed) {
    out += r.label + "," + std::to_string(r.seed) + "," + format_double(r.success_rate) + "\n";
  }
  return out;
}

std::string aggregate_csv(const CompareReport& report) {
  std::string out = "sampler,mean,stderr,n_seeds\n";
  for (const AggregateResult& r : report.aggregate) {
    out += r.label + "," + format_double(r.mean) + "," + format_double(r.std_error) + "," +
           std::to_string(r.n_seeds) + "\n";
  }
  return out;
}

}  // namespace rws
