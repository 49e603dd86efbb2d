#include "sugar/grad_check.hpp"

#include "sugar/error.hpp"

#include <algorithm>
#include <cmath>

namespace sugar {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<double()>& loss, const BlockList& params,
                           const ConstBlockList& analytic, const GradCheckOptions& options) {
  if (params.size() != analytic.size()) throw ShapeError("grad_check: block count mismatch");
  if (options.points != 2 && options.points != 4) {
    throw InvalidArgument("grad_check: stencil must have 2 or 4 points");
  }
  const double h = options.step;
  auto probe = [&](double& entry, double at) {
    entry = at;
    return loss();
  };
  GradCheckReport report;
  report.tolerance = options.tolerance;

  for (std::size_t b = 0; b < params.size(); ++b) {
    Mat& p = *params[b].value;
    const Mat& g = *analytic[b].value;
    require_shape(g, p.rows(), p.cols(), "grad_check " + params[b].name);

    BlockCheck check;
    check.name = params[b].name;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      double& entry = p.data()[i];
      const double saved = entry;
      double numeric = 0.0;
      if (options.points == 2) {
        numeric = (probe(entry, saved + h) - probe(entry, saved - h)) / (2.0 * h);
      } else {
        const double up1 = probe(entry, saved + h);
        const double dn1 = probe(entry, saved - h);
        const double up2 = probe(entry, saved + 2.0 * h);
        const double dn2 = probe(entry, saved - 2.0 * h);
        numeric = (8.0 * (up1 - dn1) - (up2 - dn2)) / (12.0 * h);
      }
      entry = saved;

      const double a = g.data()[i];
      const double err = relative_error(a, numeric, options.abs_floor);
      if (!std::isfinite(err)) throw NumericalError("grad_check: non-finite loss in " + check.name);
      if (err > check.max_rel_error || check.worst_index < 0) {
        check.max_rel_error = err;
        check.analytic_at_worst = a;
        check.numeric_at_worst = numeric;
        check.worst_index = i;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, check.max_rel_error);
    report.blocks.push_back(std::move(check));
  }
  report.passed = report.max_rel_error <= options.tolerance;
  return report;
}

}  // namespace sugar
