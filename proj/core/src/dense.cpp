#include "sugar/dense.hpp"

#include "sugar/error.hpp"

#include <cmath>

namespace sugar {

Mat uniform_init(int rows, int cols, int fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  // Fill in row-major order so the draw sequence matches the serialized layout.
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

DenseParams DenseParams::zeros(int in, int out, bool with_bias) {
  if (in < 1 || out < 1) throw InvalidArgument("dense sizes must be positive");
  return {Mat::Zero(out, in), with_bias ? Mat::Zero(out, 1) : Mat(0, 1)};
}

DenseParams DenseParams::initialize(int in, int out, std::mt19937_64& rng, bool with_bias) {
  DenseParams p;
  p.weights = uniform_init(out, in, in, rng);
  p.bias = with_bias ? uniform_init(out, 1, in, rng) : Mat(0, 1);
  return p;
}

void DenseParams::append_blocks(const std::string& prefix, BlockList& out) {
  out.push_back({prefix + ".W", &weights});
  if (has_bias()) out.push_back({prefix + ".b", &bias});
}

Vec dense_forward(const DenseParams& params, const Vec& x) {
  if (x.size() != params.weights.cols()) {
    throw ShapeError("dense_forward: input size " + std::to_string(x.size()) + " != " +
                     std::to_string(params.weights.cols()));
  }
  Vec y = params.weights * x;
  if (params.has_bias()) y += params.bias.col(0);
  return y;
}

Vec dense_backward(const DenseParams& params, const Vec& x, const Vec& dy, DenseParams& grads) {
  if (x.size() != params.weights.cols() || dy.size() != params.weights.rows()) {
    throw ShapeError("dense_backward: shape mismatch");
  }
  grads.weights.noalias() += dy * x.transpose();
  if (params.has_bias()) grads.bias.col(0) += dy;
  return params.weights.transpose() * dy;
}

}  // namespace sugar
