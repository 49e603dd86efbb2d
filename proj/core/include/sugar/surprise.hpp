#pragma once

#include "sugar/tensor.hpp"

namespace sugar {

struct SurpriseConfig {
  double rate = 0.1;         // low-pass filter rate for running mean and variance
  double offset = 4.0;       // squash: sigmoid(gain * z - offset)
  double gain = 8.0;
  double sigma_floor = 1e-3;
};

/// Online z-scored prediction-error surprise. The score of an error is taken
/// against the statistics *before* that error is folded in.
struct SurpriseEstimator {
  SurpriseConfig config;
  double mean = 0.0;
  double variance = 0.0;

  double sigma() const;
  /// Squashed surprise of `error` under the current statistics (no update).
  double score(double error) const;
  /// Scores `error`, then low-pass updates mean and variance with it.
  double update(double error);
  void reset() { mean = 0.0; variance = 0.0; }
};

/// Mean-absolute-error surprise for one prediction; updates the estimator.
double surprise_update(SurpriseEstimator& estimator, const Vec& y_act, const Vec& y_hat);

}  // namespace sugar
