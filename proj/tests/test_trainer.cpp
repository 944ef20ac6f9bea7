#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "rws/error.hpp"
#include "rws/relabel.hpp"
#include "rws/trainer.hpp"

namespace rws {
namespace {

void expect_same_parameters(const RunState& a, const RunState& b) {
  EXPECT_EQ(a.iteration, b.iteration);
  EXPECT_EQ(a.classifier, b.classifier);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.policy, b.policy);
}

OfflineDataset rooms_dataset() {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/rooms15.maze");
  Rng rng(7);
  return build_mixture(maze, 0.5, 30, rng);
}

TrainerConfig quick(std::size_t iterations) {
  TrainerConfig c;
  c.iterations = iterations;
  c.batch_size = 64;
  c.seed = 5;
  return c;
}

TEST(Trainer, ZeroIterationsReturnsInitialState) {
  const OfflineDataset d = rooms_dataset();
  const RunState s = train(d, quick(0));
  const RunState init = initial_state(d.maze(), quick(0));
  expect_same_parameters(s, init);
  EXPECT_TRUE(s.metrics.empty());
  EXPECT_EQ(s.classifier.slope, 0.0);
  for (double v : s.q.table()) EXPECT_EQ(v, s.q.floor());
}

TEST(Trainer, OneMetricsRowPerIteration) {
  const OfflineDataset d = rooms_dataset();
  TrainerConfig c = quick(25);
  c.eval_every = 10;
  std::size_t calls = 0;
  const RunState s = train(d, c, [&](const RunState&, const MetricsRow&) { ++calls; });
  ASSERT_EQ(s.metrics.size(), 25u);
  EXPECT_EQ(calls, 25u);
  for (std::size_t i = 0; i < 25; ++i) {
    const MetricsRow& r = s.metrics[i];
    EXPECT_EQ(r.iter, i + 1);
    EXPECT_NEAR(r.mean_w, 1.0, 1e-9);
    EXPECT_GE(r.max_w, 1.0 - 1e-12);
    EXPECT_GE(r.pu_loss, 0.0);
    const bool evaluated = r.iter % 10 == 0 || r.iter == 25;
    EXPECT_EQ(std::isnan(r.success_rate), !evaluated) << r.iter;
  }
  const std::string csv = metrics_csv(s.metrics);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 26);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "iter,pu_loss,mean_w,max_w,td_err,success_rate");
}

TEST(Trainer, EqualSeedsGiveEqualRuns) {
  const OfflineDataset d = rooms_dataset();
  const RunState a = train(d, quick(40));
  const RunState b = train(d, quick(40));
  expect_same_parameters(a, b);
  EXPECT_EQ(metrics_csv(a.metrics), metrics_csv(b.metrics));
  TrainerConfig other = quick(40);
  other.seed = 6;
  EXPECT_NE(train(d, other).q, a.q);
}

TEST(Trainer, UniformEqualsRwsWithUnitWeights) {
  const OfflineDataset d = rooms_dataset();
  TrainerConfig rws_cfg = quick(30);
  rws_cfg.classifier_warmup_iters = 1000;  // classifier stays flat
  TrainerConfig uni_cfg = rws_cfg;
  uni_cfg.sampler = Sampler::Uniform;
  const RunState a = train(d, rws_cfg);
  const RunState b = train(d, uni_cfg);
  expect_same_parameters(a, b);
  for (const MetricsRow& r : a.metrics) EXPECT_EQ(r.max_w, 1.0);
}

TEST(Trainer, UniformSamplerIgnoresTheClassifier) {
  const OfflineDataset d = rooms_dataset();
  TrainerConfig c = quick(1);
  c.sampler = Sampler::Uniform;
  RunState warm = initial_state(d.maze(), c);
  warm.classifier.slope = 2.0;
  RunState flat = initial_state(d.maze(), c);
  Rng r1(3), r2(3);
  train_step(warm, d, c, r1);
  train_step(flat, d, c, r2);
  EXPECT_EQ(warm.q, flat.q);
  EXPECT_EQ(warm.policy, flat.policy);
}

TEST(Trainer, ClassifierStepSeesFrozenQ) {
  const OfflineDataset d = rooms_dataset();
  TrainerConfig c = quick(1);
  RunState s = train(d, quick(20));
  const RunState before = s;
  Rng rng(77);
  Rng replay = rng;
  train_step(s, d, c, rng);

  const auto batch = sample_transitions(d, c.batch_size, replay);
  const HindsightBatch pos = her_positive_batch(d, batch, replay);
  const auto goals = sample_goals_uniform(d, c.batch_size, replay);
  const LabeledBatch unl = unlabeled_batch(batch, goals);
  std::vector<double> qp, qu;
  for (const auto& e : pos.batch.entries) qp.push_back(before.q(e.s, e.g, e.a));
  for (const auto& e : unl.entries) qu.push_back(before.q(e.s, e.g, e.a));
  const ReachabilityClassifier expected = classifier_update(before.classifier, qp, qu, c.lr_c);
  EXPECT_EQ(s.classifier, expected);
  EXPECT_EQ(s.metrics.back().pu_loss, pu_gradient(before.classifier, qp, qu).loss);
  EXPECT_NE(s.q, before.q);
}

TEST(Trainer, FailedStepLeavesStateUntouched) {
  const OfflineDataset d = rooms_dataset();
  const TrainerConfig c = quick(1);
  RunState s = train(d, quick(5));
  // Rejected only after the batches are drawn and the classifier step is taken.
  s.classifier.eta_p = 2.0;
  const RunState before = s;
  Rng rng(9);
  const std::uint64_t expected_draw = Rng(rng).next_u64();
  EXPECT_THROW(train_step(s, d, c, rng), ValidationError);
  expect_same_parameters(s, before);
  EXPECT_EQ(s.metrics.size(), before.metrics.size());
  EXPECT_EQ(rng.next_u64(), expected_draw);

  const OfflineDataset empty(d.maze(), {});
  EXPECT_THROW(train_step(s, empty, c, rng), ValidationError);
  expect_same_parameters(s, before);

  RunState small = initial_state(open_maze(5, 5), c);
  const RunState small_before = small;
  EXPECT_THROW(train_step(small, d, c, rng), MalformedStateError);
  expect_same_parameters(small, small_before);
}

TEST(Trainer, CorridorValuesMatchTheOracle) {
  const Maze maze = load_maze(RWS_DATA_DIR "/mazes/corridor3.maze");
  const OfflineDataset d = build_full_coverage(maze);
  TrainerConfig c;
  c.gamma = 0.9;
  c.iterations = 300;
  c.batch_size = 64;
  const RunState s = train(d, c);
  const auto vi = oracle::value_iteration(maze, c.gamma, c.delta);
  for (State st : maze.free_cells())
    for (State g : maze.free_cells())
      for (Action a : kAllActions)
        EXPECT_NEAR(s.q(st, phi(g), a), vi[maze.cell_index(st)][maze.cell_index(g)][action_index(a)],
                    1e-3);
  EXPECT_NEAR(s.q({0, 0}, {2, 0}, Action::Left), -1.9, 1e-3);
}

TEST(Trainer, WeightModesAndSamplersRun) {
  const OfflineDataset d = rooms_dataset();
  for (Sampler sm : {Sampler::Rws, Sampler::Uniform, Sampler::HerRatio}) {
    TrainerConfig c = quick(10);
    c.sampler = sm;
    c.weight_mode = WeightMode::Resample;
    c.weight_critic = false;
    c.per_sample_denominator_m = 4;
    c.classifier_steps = 2;
    c.pu_variant = PuVariant::Literal;
    const RunState s = train(d, c);
    EXPECT_EQ(s.iteration, 10u);
    for (double v : s.q.table()) EXPECT_TRUE(v <= 0.0 && v >= s.q.floor());
  }
}

TEST(Config, ParseAndRoundTrip) {
  const TrainerConfig c = parse_config(
      "# comment\n"
      "gamma = 0.9\n"
      "sampler=uniform  # trailing\n"
      "\n"
      "iterations=12\n"
      "pu_variant=paper_literal\n"
      "weight_critic=false\n"
      "name=plain\n");
  EXPECT_EQ(c.gamma, 0.9);
  EXPECT_EQ(c.sampler, Sampler::Uniform);
  EXPECT_EQ(c.iterations, 12u);
  EXPECT_EQ(c.pu_variant, PuVariant::Literal);
  EXPECT_FALSE(c.weight_critic);
  EXPECT_EQ(c.label(), "plain");
  EXPECT_EQ(parse_config(config_to_text(c)), c);
  EXPECT_EQ(parse_config(""), TrainerConfig{});
  EXPECT_EQ(TrainerConfig{}.label(), "rws");
  for (const std::string& key : config_keys()) {
    if (key == "name") continue;  // omitted while empty
    EXPECT_NE(config_to_text(TrainerConfig{}).find(key + "="), std::string::npos) << key;
  }
}

TEST(Config, ErrorsNameTheLineAndKey) {
  try {
    parse_config("gamma=0.9\nbatch_size=32\nlearning_rate=0.1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
  try {
    parse_config("gamma\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  EXPECT_THROW(parse_config("gamma=abc\n"), ParseError);
  EXPECT_THROW(parse_config("sampler=greedy\n"), ParseError);
  EXPECT_THROW(parse_config("gamma=1.0\n"), ValidationError);
  EXPECT_THROW(parse_config("eta_p=0\n"), ValidationError);
  TrainerConfig c;
  EXPECT_THROW(set_config_value(c, "nope", "1"), ValidationError);
  EXPECT_THROW(load_config("/nonexistent/rws.cfg"), Error);
}

TEST(Checkpoint, RoundTrip) {
  const OfflineDataset d = rooms_dataset();
  TrainerConfig c = quick(15);
  c.pu_variant = PuVariant::Literal;
  const RunState s = train(d, c);
  const RunState back = checkpoint_from_text(checkpoint_to_text(s, d.maze()), d.maze());
  expect_same_parameters(s, back);
  const auto path = std::filesystem::temp_directory_path() / "rws_checkpoint_test.rwsq";
  save_checkpoint(s, d.maze(), path.string());
  expect_same_parameters(s, load_checkpoint(path.string(), d.maze()));
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsOtherMazesAndDamage) {
  const OfflineDataset d = rooms_dataset();
  const RunState s = train(d, quick(3));
  const std::string text = checkpoint_to_text(s, d.maze());
  EXPECT_THROW(checkpoint_from_text(text, open_maze(15, 15)), ValidationError);
  EXPECT_THROW(checkpoint_from_text(text.substr(0, text.size() / 2), d.maze()), ParseError);
  EXPECT_THROW(checkpoint_from_text("RWSQ0\n", d.maze()), ParseError);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-1.9), "-1.9");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

}  // namespace
}  // namespace rws
