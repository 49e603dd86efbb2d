#pragma once

#include "sugar/grad_check.hpp"
#include "sugar/model.hpp"

#include <cstdint>

namespace sugar {

struct ModelCheckOptions {
  Variant variant = Variant::B;
  std::uint64_t seed = 1;
  int steps = 20;
  GradCheckOptions grad;
};

struct ModelCheckResult {
  GradCheckReport report;  // reconstruction-loss gradient against finite differences
  int open_gates = 0;
  int cfr_terms = 0;        // gate deltas that received a counterfactual term
  int cfr_mismatches = 0;   // deltas differing from a direct recomputation
  bool cfr_isolated = true; // CFR changed nothing outside the boundary blocks
  bool passed() const { return report.passed && cfr_mismatches == 0 && cfr_isolated; }
};

/// Random parameters and a random input stream of `steps` predictions. The
/// boundary readout is rescaled so that some gates open. For variant C the
/// counterfactual term is checked by recomputing y_cf from the cached state.
ModelCheckResult check_model_gradients(const ModelCheckOptions& options);

}  // namespace sugar
