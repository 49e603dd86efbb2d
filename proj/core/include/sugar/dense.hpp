#pragma once

#include "sugar/params.hpp"
#include "sugar/tensor.hpp"

#include <random>

namespace sugar {

/// y = W x + b. A bias with zero rows means no bias term.
struct DenseParams {
  Mat weights;
  Mat bias;

  static DenseParams zeros(int in, int out, bool with_bias = true);
  static DenseParams initialize(int in, int out, std::mt19937_64& rng, bool with_bias = true);

  bool has_bias() const { return bias.rows() > 0; }
  void append_blocks(const std::string& prefix, BlockList& out);
};

Vec dense_forward(const DenseParams& params, const Vec& x);

/// Accumulates dW (and db) into `grads`, returns dL/dx.
Vec dense_backward(const DenseParams& params, const Vec& x, const Vec& dy, DenseParams& grads);

/// Uniform in +-1/sqrt(fan_in).
Mat uniform_init(int rows, int cols, int fan_in, std::mt19937_64& rng);

}  // namespace sugar
