#include "sugar/lstm.hpp"
#include "sugar/model.hpp"
#include "sugar/task.hpp"
#include "sugar/training.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace sugar;

namespace {

SugarModel make_model(Variant v) {
  ModelConfig cfg;
  cfg.variant = v;
  std::mt19937_64 rng(1);
  return SugarModel::create(cfg, rng);
}

Episode ramp_episode() {
  TaskConfig task;
  task.eb.kind = EbKind::Ramp;
  return generate_episode(task, 1);
}

}  // namespace

static void BM_LstmStep(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const LstmParams p = LstmParams::initialize(7, 16, rng);
  const Vec x = Vec::Constant(7, 0.5);
  Vec h = Vec::Zero(16), c = Vec::Zero(16);
  for (auto _ : state) {
    const LstmOutput s = lstm_forward(p, x, h, c);
    benchmark::DoNotOptimize(s.h.data());
  }
}
BENCHMARK(BM_LstmStep);

static void BM_GenerateEpisode(benchmark::State& state) {
  TaskConfig task;
  task.eb.kind = EbKind::Ramp;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const Episode ep = generate_episode(task, ++seed);
    benchmark::DoNotOptimize(ep.symbols.data());
  }
}
BENCHMARK(BM_GenerateEpisode);

static void BM_ModelStep(benchmark::State& state) {
  SugarModel m = make_model(static_cast<Variant>(state.range(0)));
  const Episode ep = ramp_episode();
  int t = 1;
  for (auto _ : state) {
    const StepTrace tr = m.step(step_inputs(ep, t));
    benchmark::DoNotOptimize(tr.y_act.data());
    if (++t == ep.length) t = 1;
  }
}
BENCHMARK(BM_ModelStep)->Arg(0)->Arg(1)->Arg(2);

// Forward plus backward over one 50-step window.
static void BM_Window(benchmark::State& state) {
  SugarModel m = make_model(static_cast<Variant>(state.range(0)));
  m.set_recording(true);
  const Episode ep = ramp_episode();
  int start = 1;
  for (auto _ : state) {
    m.clear_tape();
    for (int t = start; t < start + 50; ++t) m.step(step_inputs(ep, t));
    const BackwardResult r = m.backward();
    benchmark::DoNotOptimize(r.loss);
    start += 50;
    if (start + 50 >= ep.length) {
      start = 1;
      m.reset_state();
    }
  }
}
BENCHMARK(BM_Window)->Arg(0)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
