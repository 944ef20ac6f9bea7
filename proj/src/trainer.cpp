#include "rws/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rws/error.hpp"
#include "rws/eval.hpp"
#include "rws/relabel.hpp"
#include "rws/weight.hpp"

namespace rws {

std::string_view sampler_name(Sampler s) noexcept {
  switch (s) {
    case Sampler::Rws: return "rws";
    case Sampler::Uniform: return "uniform";
    case Sampler::HerRatio: return "her_ratio";
  }
  return "?";
}

Sampler parse_sampler(std::string_view name) {
  if (name == "rws") return Sampler::Rws;
  if (name == "uniform") return Sampler::Uniform;
  if (name == "her_ratio") return Sampler::HerRatio;
  throw ValidationError("unknown sampler '" + std::string(name) + "'");
}

std::string_view weight_mode_name(WeightMode m) noexcept {
  return m == WeightMode::Multiplier ? "multiplier" : "resample";
}

WeightMode parse_weight_mode(std::string_view name) {
  if (name == "multiplier") return WeightMode::Multiplier;
  if (name == "resample") return WeightMode::Resample;
  throw ValidationError("unknown weight mode '" + std::string(name) + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void validate(const TrainerConfig& c) {
  auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) fail("gamma must lie in [0, 1)");
  if (!(c.delta >= 0.0)) fail("delta must be nonnegative");
  if (!(c.eta_p > 0.0 && c.eta_p < 1.0)) fail("eta_p must lie in (0, 1)");
  if (c.batch_size == 0) fail("batch_size must be positive");
  if (!(c.lr_q > 0.0)) fail("lr_q must be positive");
  if (!(c.lr_pi > 0.0)) fail("lr_pi must be positive");
  if (!(c.lr_c > 0.0)) fail("lr_c must be positive");
  if (!(c.alpha > 0.0)) fail("alpha must be positive");
  if (!(c.her_ratio >= 0.0 && c.her_ratio <= 1.0)) fail("her_ratio must lie in [0, 1]");
  if (c.max_steps == 0) fail("max_steps must be positive");
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw ValidationError("config key '" + std::string(key) + "': invalid value '" +
                          std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config key '" + std::string(key) + "': expected true or false");
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> config_keys() {
  return {"gamma",     "delta",        "eta_p",        "batch_size",
          "lr_q",      "lr_pi",        "lr_c",         "alpha",
          "iterations", "seed",        "pu_variant",   "weight_mode",
          "weight_critic", "sampler",  "her_ratio",    "classifier_warmup_iters",
          "classifier_steps", "per_sample_denominator_m", "eval_every", "eval_episodes",
          "max_steps", "name"};
}

void set_config_value(TrainerConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  try {
    if (key == "gamma") c.gamma = parse_number<double>(key, value);
    else if (key == "delta") c.delta = parse_number<double>(key, value);
    else if (key == "eta_p") c.eta_p = parse_number<double>(key, value);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "lr_q") c.lr_q = parse_number<double>(key, value);
    else if (key == "lr_pi") c.lr_pi = parse_number<double>(key, value);
    else if (key == "lr_c") c.lr_c = parse_number<double>(key, value);
    else if (key == "alpha") c.alpha = parse_number<double>(key, value);
    else if (key == "iterations") c.iterations = parse_number<std::size_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "pu_variant") c.pu_variant = parse_pu_variant(value);
    else if (key == "weight_mode") c.weight_mode = parse_weight_mode(value);
    else if (key == "weight_critic") c.weight_critic = parse_bool(key, value);
    else if (key == "sampler") c.sampler = parse_sampler(value);
    else if (key == "her_ratio") c.her_ratio = parse_number<double>(key, value);
    else if (key == "classifier_warmup_iters") c.classifier_warmup_iters = parse_number<std::size_t>(key, value);
    else if (key == "classifier_steps") c.classifier_steps = parse_number<std::size_t>(key, value);
    else if (key == "per_sample_denominator_m") c.per_sample_denominator_m = parse_number<std::size_t>(key, value);
    else if (key == "eval_every") c.eval_every = parse_number<std::size_t>(key, value);
    else if (key == "eval_episodes") c.eval_episodes = parse_number<std::size_t>(key, value);
    else if (key == "max_steps") c.max_steps = parse_number<std::size_t>(key, value);
    else if (key == "name") c.name = std::string(value);
    else throw ValidationError("unknown config key '" + std::string(key) + "'");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    if (msg.find(std::string(key)) != std::string::npos) throw;
    throw ValidationError("config key '" + std::string(key) + "': " + msg);
  }
}

TrainerConfig parse_config(std::string_view text) {
  TrainerConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line_no);
    try {
      set_config_value(c, trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  validate(c);
  return c;
}

TrainerConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const TrainerConfig& c) {
  std::string out;
  auto put = [&](std::string_view k, const std::string& v) {
    out += std::string(k) + "=" + v + "\n";
  };
  put("gamma", format_double(c.gamma));
  put("delta", format_double(c.delta));
  put("eta_p", format_double(c.eta_p));
  put("batch_size", std::to_string(c.batch_size));
  put("lr_q", format_double(c.lr_q));
  put("lr_pi", format_double(c.lr_pi));
  put("lr_c", format_double(c.lr_c));
  put("alpha", format_double(c.alpha));
  put("iterations", std::to_string(c.iterations));
  put("seed", std::to_string(c.seed));
  put("pu_variant", std::string(pu_variant_name(c.pu_variant)));
  put("weight_mode", std::string(weight_mode_name(c.weight_mode)));
  put("weight_critic", c.weight_critic ? "true" : "false");
  put("sampler", std::string(sampler_name(c.sampler)));
  put("her_ratio", format_double(c.her_ratio));
  put("classifier_warmup_iters", std::to_string(c.classifier_warmup_iters));
  put("classifier_steps", std::to_string(c.classifier_steps));
  put("per_sample_denominator_m", std::to_string(c.per_sample_denominator_m));
  put("eval_every", std::to_string(c.eval_every));
  put("eval_episodes", std::to_string(c.eval_episodes));
  put("max_steps", std::to_string(c.max_steps));
  if (!c.name.empty()) put("name", c.name);
  return out;
}

RunState initial_state(const Maze& maze, const TrainerConfig& config) {
  validate(config);
  ReachabilityClassifier c;
  c.eta_p = config.eta_p;
  c.variant = config.pu_variant;
  return RunState{GoalConditionedQ(maze, config.gamma), PolicyTable(maze), c, 0, {}};
}

namespace {

std::vector<double> q_values(const GoalConditionedQ& q, const LabeledBatch& batch) {
  std::vector<double> out;
  out.reserve(batch.entries.size());
  for (const StateGoalAction& e : batch.entries) out.push_back(q(e.s, e.g, e.a));
  return out;
}

std::vector<EvalPair> training_eval_pairs(const OfflineDataset& dataset, std::size_t n) {
  std::vector<EvalPair> pairs;
  for (const Trajectory& t : dataset.trajectories()) {
    if (pairs.size() >= n) break;
    if (t.length() > 0) pairs.push_back({t.states.front(), t.goal});
  }
  return pairs;
}

}  // namespace

MetricsRow train_step(RunState& state, const OfflineDataset& dataset, const TrainerConfig& config,
                      Rng& rng) {
  // Everything that can throw happens before the first mutation of `state`;
  // the rng is restored on failure as well.
  const Rng rng_before = rng;
  try {
    const std::size_t n = config.batch_size;
    const std::vector<Transition> batch = sample_transitions(dataset, n, rng);
    const HindsightBatch positive = her_positive_batch(dataset, batch, rng);
    const std::vector<Goal> goals = sample_goals_uniform(dataset, n, rng);
    const LabeledBatch unlabeled = unlabeled_batch(batch, goals);

    MetricsRow row;
    row.iter = state.iteration + 1;
    row.success_rate = std::numeric_limits<double>::quiet_NaN();

    // Classifier update with Q frozen.
    ReachabilityClassifier classifier = state.classifier;
    const std::vector<double> q_pos = q_values(state.q, positive.batch);
    const std::vector<double> q_unl = q_values(state.q, unlabeled);
    if (!q_pos.empty()) {
      const PuGradient g = pu_gradient(classifier, q_pos, q_unl);
      row.pu_loss = g.loss;
      if (state.iteration >= config.classifier_warmup_iters && config.classifier_steps > 0) {
        classifier.slope -= config.lr_c * g.d_slope;
        classifier.intercept -= config.lr_c * g.d_intercept;
        for (std::size_t k = 1; k < config.classifier_steps; ++k) {
          classifier = classifier_update(classifier, q_pos, q_unl, config.lr_c);
        }
      }
    }
    validate(classifier);

    LabeledBatch goal_batch = unlabeled;
    if (config.sampler == Sampler::HerRatio && positive.skipped == 0) {
      goal_batch = mix_goals(positive.batch, unlabeled, config.her_ratio, rng);
    }
    WeightedBatch policy_batch = annotate_rewards(goal_batch, batch, config.delta);
    if (config.sampler == Sampler::Rws) {
      policy_batch = config.per_sample_denominator_m > 0
                         ? attach_weights_per_entry(policy_batch, state.q, classifier, dataset,
                                                    config.per_sample_denominator_m, rng)
                         : attach_weights(policy_batch, state.q, classifier);
    }
    row.mean_w = 0.0;
    row.max_w = 0.0;
    for (double w : policy_batch.weights) {
      row.mean_w += w;
      row.max_w = std::max(row.max_w, w);
    }
    row.mean_w /= static_cast<double>(policy_batch.size());
    if (config.weight_mode == WeightMode::Resample) policy_batch = resample_by_weight(policy_batch, rng);

    WeightedBatch critic_batch;
    const WeightedBatch* critic = &policy_batch;
    if (!config.weight_critic) {
      critic_batch = policy_batch;
      std::fill(critic_batch.weights.begin(), critic_batch.weights.end(), 1.0);
      critic = &critic_batch;
    }

    // Commit: arithmetic only from here on.
    state.classifier = classifier;
    row.td_err = td_update(state.q, *critic, config.lr_q);
    policy_update(state.policy, state.q, policy_batch, config.alpha, config.lr_pi);
    state.iteration += 1;
    state.metrics.push_back(row);
    return row;
  } catch (...) {
    rng = rng_before;
    throw;
  }
}

RunState train(const OfflineDataset& dataset, const TrainerConfig& config,
               const IterationCallback& on_iteration) {
  RunState state = initial_state(dataset.maze(), config);
  if (config.iterations == 0) return state;
  if (dataset.transition_count() == 0) throw ValidationError("cannot train on an empty dataset");
  Rng rng(config.seed);
  const std::vector<EvalPair> pairs = training_eval_pairs(dataset, config.eval_episodes);
  for (std::size_t i = 0; i < config.iterations; ++i) {
    train_step(state, dataset, config, rng);
    const bool last = i + 1 == config.iterations;
    const bool periodic = config.eval_every > 0 && state.iteration % config.eval_every == 0;
    if (!pairs.empty() && (last || periodic)) {
      state.metrics.back().success_rate =
          success_rate(state.policy, dataset.maze(), pairs, config.delta, config.max_steps);
    }
    if (on_iteration) on_iteration(state, state.metrics.back());
  }
  return state;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "iter,pu_loss,mean_w,max_w,td_err,success_rate\n";
  for (const MetricsRow& r : rows) {
    out += std::to_string(r.iter) + "," + format_double(r.pu_loss) + "," +
           format_double(r.mean_w) + "," + format_double(r.max_w) + "," +
           format_double(r.td_err) + "," + format_double(r.success_rate) + "\n";
  }
  return out;
}

std::string checkpoint_to_text(const RunState& state, const Maze& maze) {
  std::string out = "RWSQ1\n";
  out += "maze " + maze.hash() + " " + std::to_string(maze.width()) + " " +
         std::to_string(maze.height()) + "\n";
  out += "gamma " + format_double(state.q.gamma()) + "\n";
  out += "iteration " + std::to_string(state.iteration) + "\n";
  out += "classifier " + format_double(state.classifier.slope) + " " +
         format_double(state.classifier.intercept) + " " + format_double(state.classifier.eta_p) +
         " " + std::string(pu_variant_name(state.classifier.variant)) + "\n";
  out += "q " + std::to_string(state.q.table().size()) + "\n";
  for (double v : state.q.table()) out += format_double(v) + "\n";
  out += "policy " + std::to_string(state.policy.table().size()) + "\n";
  for (double v : state.policy.table()) out += format_double(v) + "\n";
  return out;
}

RunState checkpoint_from_text(std::string_view text, const Maze& maze) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](std::string_view what) {
    if (!std::getline(in, line)) throw ParseError("checkpoint truncated before " + std::string(what), line_no + 1);
    ++line_no;
    return std::istringstream(line);
  };
  auto parse_d = [&](const std::string& tok) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      throw ParseError("invalid number '" + tok + "'", line_no);
    }
    return v;
  };

  next("magic");
  if (line != "RWSQ1") throw ParseError("missing RWSQ1 header", line_no);
  {
    auto ls = next("maze");
    std::string tag, hash;
    int w = 0, h = 0;
    if (!(ls >> tag >> hash >> w >> h) || tag != "maze") throw ParseError("expected maze line", line_no);
    if (hash != maze.hash() || w != maze.width() || h != maze.height()) {
      throw ValidationError("checkpoint was written for a different maze (hash " + hash + ")");
    }
  }
  double gamma = 0.0;
  {
    auto ls = next("gamma");
    std::string tag, v;
    if (!(ls >> tag >> v) || tag != "gamma") throw ParseError("expected gamma line", line_no);
    gamma = parse_d(v);
  }
  std::size_t iteration = 0;
  {
    auto ls = next("iteration");
    std::string tag;
    if (!(ls >> tag >> iteration) || tag != "iteration") throw ParseError("expected iteration line", line_no);
  }
  ReachabilityClassifier c;
  {
    auto ls = next("classifier");
    std::string tag, slope, intercept, eta, variant;
    if (!(ls >> tag >> slope >> intercept >> eta >> variant) || tag != "classifier") {
      throw ParseError("expected classifier line", line_no);
    }
    c.slope = parse_d(slope);
    c.intercept = parse_d(intercept);
    c.eta_p = parse_d(eta);
    try {
      c.variant = parse_pu_variant(variant);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    validate(c);
  }
  RunState state{GoalConditionedQ(maze, gamma), PolicyTable(maze), c, iteration, {}};
  auto read_table = [&](std::string_view tag, std::size_t expected) {
    auto ls = next(tag);
    std::string t;
    std::size_t count = 0;
    if (!(ls >> t >> count) || t != tag) throw ParseError("expected " + std::string(tag) + " section", line_no);
    if (count != expected) throw ValidationError("checkpoint " + std::string(tag) + " table has wrong size");
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      next(tag);
      values[i] = parse_d(line);
    }
    return values;
  };
  state.q.assign(read_table("q", state.q.table().size()));
  state.policy.assign(read_table("policy", state.policy.table().size()));
  return state;
}

void save_checkpoint(const RunState& state, const Maze& maze, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  out << checkpoint_to_text(state, maze);
  if (!out) throw Error("failed writing checkpoint " + path);
}

RunState load_checkpoint(const std::string& path, const Maze& maze) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_text(buf.str(), maze);
}

}  // namespace rws
