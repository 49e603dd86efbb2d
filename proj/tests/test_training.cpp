#include "sugar/error.hpp"
#include "sugar/evaluation.hpp"
#include "sugar/training.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace sugar;

namespace {

ExperimentConfig small_config(Variant v, int n_windows) {
  ExperimentConfig c;
  c.variant = v;
  c.n_windows = n_windows;
  c.log_every = 10;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(StepInputs, UsesPreviousRowAndCurrentTarget) {
  TaskConfig task;
  const Episode ep = generate_episode(task, 1);
  const StepInputs in = step_inputs(ep, 5);
  EXPECT_EQ(in.symbol, ep.symbols.row(4).transpose());
  EXPECT_EQ(in.ci, ep.ci.row(4).transpose());
  EXPECT_EQ(in.eb, ep.eb.row(4).transpose());
  EXPECT_EQ(in.target, ep.symbols.row(5).transpose());
  EXPECT_THROW(step_inputs(ep, 0), InvalidArgument);
  EXPECT_THROW(step_inputs(ep, ep.length), InvalidArgument);
}

TEST(Training, ZeroWindowsReturnsInitialCheckpoint) {
  const ExperimentConfig c = small_config(Variant::B, 0);
  const TrainResult r = train(c);
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_FALSE(r.diverged);
  EXPECT_EQ(r.checkpoint.step_count, 0);
  EXPECT_EQ(serialize_checkpoint(r.checkpoint), serialize_checkpoint(initial_checkpoint(c)));
}

TEST(Training, SameSeedIsBitIdentical) {
  const ExperimentConfig c = small_config(Variant::C, 30);
  const TrainResult a = train(c);
  const TrainResult b = train(c);
  EXPECT_EQ(serialize_checkpoint(a.checkpoint), serialize_checkpoint(b.checkpoint));
  EXPECT_EQ(metrics_csv(a.metrics), metrics_csv(b.metrics));
  ExperimentConfig other = c;
  other.seed = 4;
  EXPECT_NE(serialize_checkpoint(train(other).checkpoint), serialize_checkpoint(a.checkpoint));
}

TEST(Training, LogsEveryPeriod) {
  const TrainResult r = train(small_config(Variant::B, 35));
  ASSERT_EQ(r.metrics.size(), 3u);
  EXPECT_EQ(r.metrics[0].window_idx, 10);
  EXPECT_EQ(r.metrics[2].window_idx, 30);
  for (const MetricsRow& m : r.metrics) {
    EXPECT_GT(m.mean_loss, 0.0);
    EXPECT_GE(m.gate_open_rate, 0.0);
    EXPECT_LE(m.gate_open_rate, 1.0);
  }
  EXPECT_EQ(r.checkpoint.step_count, 35);
  EXPECT_EQ(r.checkpoint.adam.step, 35);
}

TEST(Training, ZeroLearningRateLeavesParametersAndReproducesInference) {
  ExperimentConfig c = small_config(Variant::B, 25);
  c.learning_rate = 0.0;
  std::vector<std::pair<int, Vec>> seen;
  const TrainResult r = train(c, [&](const Episode&, int t, const StepTrace& tr) {
    if (seen.size() < 40) seen.emplace_back(t, tr.y_act);
  });
  const Checkpoint init = initial_checkpoint(c);
  const auto a = r.checkpoint.params.blocks();
  const auto b = init.params.blocks();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i].value, *b[i].value) << a[i].name;

  // Replaying the first training episode step by step gives the same outputs.
  Rng rng(derive_seed(c.seed, kTrainEpisodeStream));
  const Episode ep = generate_episode(c.train_task(), rng);
  SugarModel m = model_from_checkpoint(init);
  ASSERT_EQ(seen.size(), 40u);
  for (const auto& [t, y] : seen) {
    const StepTrace tr = m.step(step_inputs(ep, t));
    EXPECT_EQ(tr.y_act, y) << t;
  }
}

TEST(Training, OracleGateOpensOnlyAtSwitches) {
  ExperimentConfig c = small_config(Variant::A, 20);
  c.train_gate = TrainGate::Oracle;
  int opened = 0, wrong = 0;
  train(c, [&](const Episode& ep, int t, const StepTrace& tr) {
    const bool sw = ep.switch_flag[static_cast<std::size_t>(t)] == 1;
    opened += tr.gate_open ? 1 : 0;
    wrong += tr.gate_open != sw ? 1 : 0;
  });
  EXPECT_GT(opened, 0);
  EXPECT_EQ(wrong, 0);
}

TEST(Training, AbsurdLearningRateIsReportedAsDivergence) {
  ExperimentConfig c = small_config(Variant::B, 50);
  c.learning_rate = 1e308;
  const TrainResult r = train(c);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.diagnostic.empty());
  EXPECT_LT(r.checkpoint.step_count, 50);
}

TEST(Training, MetricsCsvHasHeaderAndRows) {
  const TrainResult r = train(small_config(Variant::B, 20));
  const std::string csv = metrics_csv(r.metrics);
  EXPECT_EQ(csv.rfind("window_idx,mean_loss,gate_open_rate,anticipation_hit_rate\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

// A few seconds: the default schedule should leave the learned gate ahead of
// the never-updating context.
TEST(Training, BoundaryModelBeatsClosedBaseline) {
  ExperimentConfig c;
  c.variant = Variant::B;
  c.seed = 1;
  const TrainResult r = train(c);
  ASSERT_FALSE(r.diverged) << r.diagnostic;
  SugarModel m = model_from_checkpoint(r.checkpoint);
  const auto eps = test_episodes(c.test_task(), c.seed, c.test_episodes);
  const RunEvaluation ev = evaluate_run(m, eps);
  EXPECT_LT(ev.model.mean_error, ev.closed.mean_error);
  EXPECT_GT(ev.gates.hit_rate, 0.5);
}

TEST(Training, ReactiveGateSpikesMoreThanCounterfactualGate) {
  ExperimentConfig a;
  a.variant = Variant::A;
  a.seed = 1;
  ExperimentConfig c = a;
  c.variant = Variant::C;
  const auto eps = test_episodes(a.test_task(), a.seed, a.test_episodes);
  SugarModel ma = model_from_checkpoint(train(a).checkpoint);
  SugarModel mc = model_from_checkpoint(train(c).checkpoint);
  const BoundaryProfile pa = boundary_profile(run_episodes(ma, eps, GateMode::Model));
  const BoundaryProfile pc = boundary_profile(run_episodes(mc, eps, GateMode::Model));
  EXPECT_GT(pa.spike_ratio, pc.spike_ratio);
}
