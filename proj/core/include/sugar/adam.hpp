#pragma once

#include "sugar/params.hpp"

#include <cstdint>
#include <vector>

namespace sugar {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Mat> m;  // first moments, one per parameter block
  std::vector<Mat> v;  // second moments
  std::int64_t step = 0;

  /// Zero moments shaped like `params`.
  static AdamState zeros_like(const ConstBlockList& params, const AdamConfig& config = {});
};

/// One bias-corrected ADAM update of every block in `params`. Throws
/// NumericalError naming the offending block if a gradient is not finite.
void adam_step(AdamState& state, const BlockList& params, const ConstBlockList& grads);

}  // namespace sugar
