#pragma once

#include "sugar/checkpoint.hpp"
#include "sugar/config.hpp"
#include "sugar/model.hpp"
#include "sugar/task.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sugar {

/// Inputs for predicting symbol `t` (1 <= t < T) of an episode: row t-1 of
/// the symbol, CI and EB streams, target row t.
StepInputs step_inputs(const Episode& ep, int t);

struct MetricsRow {
  int window_idx = 0;  // windows completed when the row was logged
  double mean_loss = 0.0;  // mean per-step squared loss over the logging period
  double gate_open_rate = 0.0;
  double anticipation_hit_rate = 0.0;  // NaN when no switch fell in the period
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<MetricsRow> metrics;
  bool diverged = false;
  std::string diagnostic;
};

/// Called for every training step with the episode, target index and trace.
using StepObserver = std::function<void(const Episode&, int, const StepTrace&)>;

/// Windowed truncated BPTT with ADAM. Hidden state is carried across windows
/// within an episode and reset between episodes.
TrainResult train(const ExperimentConfig& config, const StepObserver& observer = {});

/// Initialized model and optimizer for `config` without any update applied.
Checkpoint initial_checkpoint(const ExperimentConfig& config);

std::string metrics_csv(const std::vector<MetricsRow>& rows);

}  // namespace sugar
