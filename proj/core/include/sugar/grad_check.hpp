#pragma once

#include "sugar/params.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sugar {

struct GradCheckOptions {
  /// Central difference stencil: 2 points, or 4 points (fourth order).
  int points = 4;
  double step = 1e-3;
  double tolerance = 1e-4;
  /// Denominator floor: entries whose gradient magnitude is below it are
  /// compared on an absolute scale of `abs_floor * tolerance`.
  double abs_floor = 1e-6;
};

struct BlockCheck {
  std::string name;
  double max_rel_error = 0.0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  Eigen::Index worst_index = -1;
};

struct GradCheckReport {
  std::vector<BlockCheck> blocks;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Relative error used throughout: |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor);

/// Central finite differences of `loss` over every entry of `params`,
/// compared against `analytic`. `loss` must read the current values of
/// `params`; entries are restored after each probe.
GradCheckReport grad_check(const std::function<double()>& loss, const BlockList& params,
                           const ConstBlockList& analytic, const GradCheckOptions& options = {});

}  // namespace sugar
