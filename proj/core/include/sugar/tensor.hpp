#pragma once

#include <Eigen/Dense>

#include <cmath>

#include <string_view>

namespace sugar {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Throws NumericalError if any entry of `m` is NaN or Inf.
void require_finite(const Eigen::Ref<const Mat>& m, std::string_view what);

/// Throws ShapeError unless `m` is rows x cols.
void require_shape(const Eigen::Ref<const Mat>& m, Eigen::Index rows, Eigen::Index cols,
                   std::string_view what);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec sigmoid(const Vec& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

inline Vec one_hot(Eigen::Index size, Eigen::Index index) {
  Vec v = Vec::Zero(size);
  v(index) = 1.0;
  return v;
}

/// Mean absolute difference, the per-step error used for surprise, CFR and traces.
inline double mean_abs_error(const Vec& a, const Vec& b) {
  return (a - b).cwiseAbs().mean();
}

}  // namespace sugar
