#include "sugar/training.hpp"

#include "sugar/csv.hpp"
#include "sugar/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace sugar {

StepInputs step_inputs(const Episode& ep, int t) {
  if (t < 1 || t >= ep.length) throw InvalidArgument("step_inputs: t out of range");
  return StepInputs{ep.symbols.row(t - 1).transpose(), ep.ci.row(t - 1).transpose(),
                    ep.eb.row(t - 1).transpose(), ep.symbols.row(t).transpose()};
}

Checkpoint initial_checkpoint(const ExperimentConfig& config) {
  config.validate();
  Rng param_rng(derive_seed(config.seed, kParamStream));
  Checkpoint ckpt;
  ckpt.model = config.model_config();
  ckpt.params = SugarParams::initialize(config.dims, param_rng);
  ckpt.adam = AdamState::zeros_like(std::as_const(ckpt.params).blocks(), config.adam());
  ckpt.surprise.config = config.surprise;
  ckpt.config_hash = config.hash();
  ckpt.seed = config.seed;
  return ckpt;
}

namespace {

struct PeriodStats {
  double loss = 0.0;
  long long steps = 0;
  long long open = 0;
  long long switches = 0;
  long long hits = 0;

  MetricsRow row(int window_idx) const {
    MetricsRow r;
    r.window_idx = window_idx;
    r.mean_loss = steps ? loss / static_cast<double>(steps) : 0.0;
    r.gate_open_rate = steps ? static_cast<double>(open) / static_cast<double>(steps) : 0.0;
    r.anticipation_hit_rate = switches ? static_cast<double>(hits) / static_cast<double>(switches)
                                       : std::numeric_limits<double>::quiet_NaN();
    return r;
  }
};

}  // namespace

TrainResult train(const ExperimentConfig& config, const StepObserver& observer) {
  TrainResult result;
  result.checkpoint = initial_checkpoint(config);
  Checkpoint& ckpt = result.checkpoint;

  SugarModel model(ckpt.model, ckpt.params);
  model.set_recording(true);
  Rng episode_rng(derive_seed(config.seed, kTrainEpisodeStream));
  const TaskConfig task = config.train_task();

  PeriodStats period;
  int windows = 0;
  auto finish = [&] {
    ckpt.params = model.params();
    ckpt.surprise = model.state().surprise;
    ckpt.step_count = windows;
  };
  auto fail = [&](std::string diagnostic) {
    finish();
    result.diverged = true;
    result.diagnostic = std::move(diagnostic);
    return result;
  };

  while (windows < config.n_windows) {
    const Episode ep = generate_episode(task, episode_rng);
    model.reset_state();
    std::vector<char> open(static_cast<std::size_t>(ep.length), 0);

    for (int start = 1; start < ep.length && windows < config.n_windows; start += config.window) {
      const int end = std::min(ep.length, start + config.window);
      model.clear_tape();
      try {
        for (int t = start; t < end; ++t) {
          GateControl gate;
          if (config.train_gate == TrainGate::Oracle) {
            gate = GateControl::forced_surprise(ep.switch_flag[static_cast<std::size_t>(t)] ? 1.0 : 0.0);
          }
          const StepTrace tr = model.step(step_inputs(ep, t), gate);
          open[static_cast<std::size_t>(t)] = tr.gate_open ? 1 : 0;
          if (observer) observer(ep, t, tr);
          period.open += tr.gate_open ? 1 : 0;
          if (ep.switch_flag[static_cast<std::size_t>(t)] && t >= 2) {
            ++period.switches;
            period.hits += (open[static_cast<std::size_t>(t)] || open[static_cast<std::size_t>(t - 1)]) ? 1 : 0;
          }
        }
      } catch (const NumericalError& e) {
        return fail(std::string(e.what()) + " in window " + std::to_string(windows));
      }

      const BackwardResult grads = model.backward();
      if (!std::isfinite(grads.loss)) {
        std::ostringstream ss;
        ss << "non-finite loss in window " << windows << " (episode step " << start << ")";
        return fail(ss.str());
      }
      period.loss += grads.loss;
      period.steps += end - start;

      const double progress =
          config.n_windows > 1 ? static_cast<double>(windows) / (config.n_windows - 1) : 0.0;
      ckpt.adam.config.learning_rate =
          config.learning_rate * (1.0 - (1.0 - config.final_lr_fraction) * progress);
      try {
        adam_step(ckpt.adam, model.params().blocks(), grads.grads.blocks());
      } catch (const NumericalError& e) {
        return fail(std::string(e.what()) + " in window " + std::to_string(windows));
      }
      ++windows;
      if (windows % config.log_every == 0) {
        result.metrics.push_back(period.row(windows));
        period = PeriodStats{};
      }
    }
  }
  finish();
  return result;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  CsvWriter csv({"window_idx", "mean_loss", "gate_open_rate", "anticipation_hit_rate"});
  for (const auto& r : rows) {
    csv.cell(r.window_idx).cell(r.mean_loss).cell(r.gate_open_rate).cell(r.anticipation_hit_rate);
    csv.end_row();
  }
  return csv.str();
}

}  // namespace sugar
