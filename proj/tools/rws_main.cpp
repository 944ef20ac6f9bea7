// Command-line entry point: gen-data, train, eval, heatmap, compare.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rws/rws.hpp"

namespace fs = std::filesystem;

namespace {

// Files are written under a temporary name and renamed on commit; anything
// not committed is removed when the command fails.
class Outputs {
 public:
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final_path] : pending_) fs::remove(tmp, ec);
    for (const auto& p : done_) fs::remove(p, ec);
  }

  void write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw rws::Error("cannot write " + path);
      out << content;
      if (!out) throw rws::Error("failed writing " + path);
    }
    pending_.emplace_back(tmp, path);
  }

  void commit() {
    for (const auto& [tmp, final_path] : pending_) {
      fs::rename(tmp, final_path);
      done_.push_back(final_path);
    }
    pending_.clear();
    committed_ = true;
  }

 private:
  std::vector<std::pair<std::string, std::string>> pending_;
  std::vector<std::string> done_;
  bool committed_ = false;
};

std::size_t thread_budget() {
  const char* env = std::getenv("RWS_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  return static_cast<std::size_t>(std::strtoull(env, nullptr, 10));
}

struct ConfigOverrides {
  std::map<std::string, std::string> values;

  void add_to(CLI::App* app) {
    for (const std::string& key : rws::config_keys()) {
      app->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& v) { values[key] = v; },
          "Override config key " + key);
    }
  }

  void apply(rws::TrainerConfig& config) const {
    for (const auto& [k, v] : values) rws::set_config_value(config, k, v);
    rws::validate(config);
  }
};

std::string pair_csv(const std::vector<rws::EvalPair>& pairs,
                     const std::vector<rws::RolloutResult>& results) {
  std::string out = "start_x,start_y,goal_x,goal_y,success,steps\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out += std::to_string(pairs[i].start.x) + "," + std::to_string(pairs[i].start.y) + "," +
           std::to_string(pairs[i].goal.x) + "," + std::to_string(pairs[i].goal.y) + "," +
           (results[i].success ? "1" : "0") + "," + std::to_string(results[i].steps) + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachability-weighted offline goal-conditioned RL on gridworld mazes"};
  app.require_subcommand(1);

  // gen-data
  std::string gd_maze, gd_out, gd_kind = "mixture";
  double gd_ratio = 0.5;
  std::size_t gd_n = 100, gd_len = rws::kDefaultRandomLength;
  std::uint64_t gd_seed = 0;
  auto* gen = app.add_subcommand("gen-data", "Generate an offline dataset");
  gen->add_option("--maze", gd_maze, "Maze file")->required();
  gen->add_option("--out", gd_out, "Dataset file to write")->required();
  gen->add_option("--kind", gd_kind, "mixture | stitching | coverage")
      ->check(CLI::IsMember({"mixture", "stitching", "coverage"}));
  gen->add_option("--expert_ratio", gd_ratio, "Fraction of expert trajectories");
  gen->add_option("--n_traj", gd_n, "Number of trajectories");
  gen->add_option("--random_length", gd_len, "Steps per random trajectory");
  gen->add_option("--seed", gd_seed, "Generator seed");

  // train
  std::string tr_config, tr_dataset, tr_maze, tr_out;
  ConfigOverrides tr_over;
  auto* tr = app.add_subcommand("train", "Train on a dataset");
  tr->add_option("--config", tr_config, "key=value config file");
  tr->add_option("--dataset", tr_dataset, "Dataset file")->required();
  tr->add_option("--maze", tr_maze, "Maze file")->required();
  tr->add_option("--out", tr_out, "Output directory")->required();
  tr_over.add_to(tr);

  // eval
  std::string ev_ckpt, ev_dataset, ev_maze, ev_out, ev_pairs = "stitching";
  std::size_t ev_episodes = 100, ev_max_steps = 100;
  std::uint64_t ev_seed = 0;
  double ev_delta = rws::kDefaultDelta;
  bool ev_feasible = false;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--checkpoint", ev_ckpt, "Checkpoint file")->required();
  ev->add_option("--dataset", ev_dataset, "Dataset file")->required();
  ev->add_option("--maze", ev_maze, "Maze file")->required();
  ev->add_option("--out", ev_out, "Per-pair CSV to write")->required();
  ev->add_option("--pairs", ev_pairs, "stitching | in_trajectory | held_out");
  ev->add_option("--episodes", ev_episodes, "Number of evaluation pairs");
  ev->add_option("--seed", ev_seed, "Pair sampling seed");
  ev->add_option("--max_steps", ev_max_steps, "Rollout horizon");
  ev->add_option("--delta", ev_delta, "Goal threshold");
  ev->add_flag("--feasible_only", ev_feasible, "Keep pairs the dataset oracle can reach");

  // heatmap
  std::string hm_ckpt, hm_dataset, hm_maze, hm_out, hm_action = "greedy";
  int hm_x = 0, hm_y = 0;
  auto* hm = app.add_subcommand("heatmap", "Export a sampling-weight heatmap");
  hm->add_option("--checkpoint", hm_ckpt, "Checkpoint file")->required();
  hm->add_option("--dataset", hm_dataset, "Dataset file")->required();
  hm->add_option("--maze", hm_maze, "Maze file")->required();
  hm->add_option("--state_x", hm_x, "State x")->required();
  hm->add_option("--state_y", hm_y, "State y")->required();
  hm->add_option("--out", hm_out, "Output prefix; writes <out>.txt and <out>.pgm")->required();
  hm->add_option("--action", hm_action, "greedy | mean")->check(CLI::IsMember({"greedy", "mean"}));

  // compare
  std::vector<std::string> cp_configs;
  std::string cp_dataset, cp_maze, cp_out, cp_pairs = "stitching";
  std::size_t cp_seeds = 10, cp_episodes = 100;
  std::uint64_t cp_pair_seed = 12345;
  bool cp_feasible = false;
  ConfigOverrides cp_over;
  auto* cp = app.add_subcommand("compare", "Compare samplers across seeds");
  cp->add_option("--config", cp_configs, "Config files (two or more)")->required();
  cp->add_option("--dataset", cp_dataset, "Dataset file")->required();
  cp->add_option("--maze", cp_maze, "Maze file")->required();
  cp->add_option("--out", cp_out, "Aggregate CSV; per-seed rows go to <stem>_seeds.csv")->required();
  cp->add_option("--n_seeds", cp_seeds, "Seeds per config");
  cp->add_option("--pairs", cp_pairs, "stitching | in_trajectory | held_out");
  cp->add_option("--episodes", cp_episodes, "Number of evaluation pairs");
  cp->add_option("--pair_seed", cp_pair_seed, "Evaluation pair seed");
  cp->add_flag("--feasible_only", cp_feasible, "Keep pairs the dataset oracle can reach");
  cp_over.add_to(cp);

  CLI11_PARSE(app, argc, argv);

  try {
    Outputs outputs;
    if (*gen) {
      const rws::Maze maze = rws::load_maze(gd_maze);
      rws::Rng rng(gd_seed);
      const rws::OfflineDataset dataset =
          gd_kind == "stitching"  ? rws::build_stitching(maze)
          : gd_kind == "coverage" ? rws::build_full_coverage(maze)
                                  : rws::build_mixture(maze, gd_ratio, gd_n, rng, gd_len);
      outputs.write(gd_out, rws::dataset_to_text(dataset));
      outputs.commit();
      std::cout << "trajectories " << dataset.trajectories().size() << " expert "
                << dataset.count(rws::Source::Expert) << " random "
                << dataset.count(rws::Source::Random) << " transitions "
                << dataset.transition_count() << " coverage " << dataset.state_coverage() << "/"
                << maze.free_cells().size() << "\n";
    } else if (*tr) {
      const rws::Maze maze = rws::load_maze(tr_maze);
      const rws::OfflineDataset dataset = rws::load_dataset(tr_dataset, maze);
      rws::TrainerConfig config = tr_config.empty() ? rws::TrainerConfig{} : rws::load_config(tr_config);
      tr_over.apply(config);
      const rws::RunState state = rws::train(dataset, config);
      fs::create_directories(tr_out);
      const fs::path dir(tr_out);
      outputs.write((dir / "checkpoint.rwsq").string(), rws::checkpoint_to_text(state, maze));
      outputs.write((dir / "metrics.csv").string(), rws::metrics_csv(state.metrics));
      outputs.write((dir / "config.txt").string(), rws::config_to_text(config));
      outputs.commit();
      std::cout << "iterations " << state.iteration << " classifier slope "
                << rws::format_double(state.classifier.slope) << " intercept "
                << rws::format_double(state.classifier.intercept) << "\n";
      if (!state.metrics.empty()) {
        std::cout << "final success_rate " << rws::format_double(state.metrics.back().success_rate) << "\n";
      }
    } else if (*ev) {
      const rws::Maze maze = rws::load_maze(ev_maze);
      const rws::OfflineDataset dataset = rws::load_dataset(ev_dataset, maze);
      const rws::RunState state = rws::load_checkpoint(ev_ckpt, maze);
      rws::Rng rng(ev_seed);
      std::vector<rws::EvalPair> pairs =
          rws::make_eval_pairs(dataset, rws::parse_pair_mode(ev_pairs), ev_episodes, rng);
      if (ev_feasible) pairs = rws::feasible_pairs(dataset, pairs);
      if (pairs.empty()) throw rws::ValidationError("no evaluation pairs left");
      std::vector<rws::RolloutResult> results;
      std::size_t wins = 0;
      for (const auto& p : pairs) {
        results.push_back(rws::rollout(state.policy, maze, p.start, p.goal, ev_delta, ev_max_steps));
        wins += results.back().success;
      }
      outputs.write(ev_out, pair_csv(pairs, results));
      outputs.commit();
      std::cout << "pairs " << pairs.size() << " success_rate "
                << rws::format_double(static_cast<double>(wins) / static_cast<double>(pairs.size()))
                << "\n";
    } else if (*hm) {
      const rws::Maze maze = rws::load_maze(hm_maze);
      const rws::OfflineDataset dataset = rws::load_dataset(hm_dataset, maze);
      const rws::RunState state = rws::load_checkpoint(hm_ckpt, maze);
      const rws::State s{hm_x, hm_y};
      rws::require_valid(maze, s);
      const rws::Heatmap h = rws::weight_heatmap(
          s, state.q, state.policy, state.classifier, maze,
          hm_action == "mean" ? rws::HeatmapAction::Mean : rws::HeatmapAction::Greedy);
      outputs.write(hm_out + ".txt", rws::heatmap_text(h));
      outputs.write(hm_out + ".pgm", rws::heatmap_pgm(h));
      outputs.commit();
      const auto reach = rws::reachability_oracle(dataset, s);
      double in_sum = 0.0, out_sum = 0.0;
      std::size_t in_n = 0, out_n = 0;
      for (rws::State c : maze.free_cells()) {
        const bool r = std::binary_search(reach.begin(), reach.end(), rws::phi(c));
        (r ? in_sum : out_sum) += h.at(c.x, c.y);
        (r ? in_n : out_n) += 1;
      }
      std::cout << "reachable_cells " << in_n << " mean_weight "
                << rws::format_double(in_n ? in_sum / static_cast<double>(in_n) : 0.0)
                << " unreachable_cells " << out_n << " mean_weight "
                << rws::format_double(out_n ? out_sum / static_cast<double>(out_n) : 0.0) << "\n";
    } else if (*cp) {
      if (cp_configs.size() < 2) throw rws::ValidationError("compare needs at least two --config files");
      const rws::Maze maze = rws::load_maze(cp_maze);
      const rws::OfflineDataset dataset = rws::load_dataset(cp_dataset, maze);
      std::vector<rws::TrainerConfig> configs;
      for (const auto& path : cp_configs) {
        configs.push_back(rws::load_config(path));
        cp_over.apply(configs.back());
      }
      rws::Rng rng(cp_pair_seed);
      std::vector<rws::EvalPair> pairs =
          rws::make_eval_pairs(dataset, rws::parse_pair_mode(cp_pairs), cp_episodes, rng);
      if (cp_feasible) pairs = rws::feasible_pairs(dataset, pairs);
      if (pairs.empty()) throw rws::ValidationError("no evaluation pairs left");
      const rws::CompareReport report = rws::compare(dataset, configs, cp_seeds, pairs, thread_budget());
      fs::path agg(cp_out);
      fs::path seeds = agg.parent_path() / (agg.stem().string() + "_seeds.csv");
      outputs.write(agg.string(), rws::aggregate_csv(report));
      outputs.write(seeds.string(), rws::per_seed_csv(report));
      outputs.commit();
      std::cout << rws::aggregate_csv(report);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
