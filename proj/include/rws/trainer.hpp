#pragma once

// The alternating training loop: classifier step on positive/unlabeled
// batches with Q frozen, then a weighted value and policy step.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rws/dataset.hpp"
#include "rws/reach.hpp"
#include "rws/rng.hpp"
#include "rws/value.hpp"

namespace rws {

enum class Sampler { Rws, Uniform, HerRatio };
enum class WeightMode { Multiplier, Resample };

std::string_view sampler_name(Sampler s) noexcept;
Sampler parse_sampler(std::string_view name);
std::string_view weight_mode_name(WeightMode m) noexcept;
WeightMode parse_weight_mode(std::string_view name);

struct TrainerConfig {
  double gamma = 0.95;
  double delta = kDefaultDelta;
  double eta_p = kDefaultEtaP;
  std::size_t batch_size = 256;
  double lr_q = 0.5;
  double lr_pi = 0.1;
  double lr_c = 0.005;
  double alpha = 1.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  PuVariant pu_variant = PuVariant::StandardNnpu;
  WeightMode weight_mode = WeightMode::Multiplier;
  bool weight_critic = true;
  Sampler sampler = Sampler::Rws;
  // Fraction of hindsight goals in the batch for the her_ratio sampler.
  double her_ratio = 0.5;
  // Classifier updates start after this many iterations.
  std::size_t classifier_warmup_iters = 0;
  // Classifier updates per iteration.
  std::size_t classifier_steps = 1;
  // 0: one denominator shared across the batch; m > 0: per-entry estimate
  // from m extra goal draws.
  std::size_t per_sample_denominator_m = 0;
  // Success-rate evaluation period in iterations; 0 evaluates only after
  // the last iteration.
  std::size_t eval_every = 0;
  std::size_t eval_episodes = 20;
  std::size_t max_steps = 100;
  // Report label; empty means the sampler name.
  std::string name;

  std::string label() const { return name.empty() ? std::string(sampler_name(sampler)) : name; }
  friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

// Throws ValidationError when a field is out of range.
void validate(const TrainerConfig& config);

std::vector<std::string> config_keys();
// Throws ValidationError naming the key when it is unknown or the value
// does not parse.
void set_config_value(TrainerConfig& config, std::string_view key, std::string_view value);
// key=value lines; '#' starts a comment. Throws ParseError with a line number.
TrainerConfig parse_config(std::string_view text);
TrainerConfig load_config(const std::string& path);
std::string config_to_text(const TrainerConfig& config);

struct MetricsRow {
  std::size_t iter = 0;
  double pu_loss = 0.0;
  double mean_w = 1.0;
  double max_w = 1.0;
  double td_err = 0.0;
  double success_rate = 0.0;  // NaN on iterations without evaluation
};

struct RunState {
  GoalConditionedQ q;
  PolicyTable policy;
  ReachabilityClassifier classifier;
  std::size_t iteration = 0;
  std::vector<MetricsRow> metrics;

};

RunState initial_state(const Maze& maze, const TrainerConfig& config);

// One iteration. Strong guarantee: if anything throws, `state` is unchanged.
MetricsRow train_step(RunState& state, const OfflineDataset& dataset, const TrainerConfig& config,
                      Rng& rng);

// Called after every iteration with the row just appended.
using IterationCallback = std::function<void(const RunState&, const MetricsRow&)>;

RunState train(const OfflineDataset& dataset, const TrainerConfig& config,
               const IterationCallback& on_iteration = {});

std::string metrics_csv(const std::vector<MetricsRow>& rows);

// Text checkpoint with magic header RWSQ1. Loading checks the maze hash.
std::string checkpoint_to_text(const RunState& state, const Maze& maze);
RunState checkpoint_from_text(std::string_view text, const Maze& maze);
void save_checkpoint(const RunState& state, const Maze& maze, const std::string& path);
RunState load_checkpoint(const std::string& path, const Maze& maze);

// Shortest round-trippable decimal form used for all numeric output.
std::string format_double(double v);

}  // namespace rws
