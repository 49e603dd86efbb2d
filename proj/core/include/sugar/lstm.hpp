#pragma once

#include "sugar/params.hpp"
#include "sugar/tensor.hpp"

#include <random>

namespace sugar {

/// Classic LSTM cell without peepholes. Gate rows of `weights` and `bias`
/// are stacked in the order input, forget, output, candidate; columns are
/// [x ; h_prev].
struct LstmParams {
  Mat weights;  // 4H x (D + H)
  Mat bias;     // 4H x 1

  static LstmParams zeros(int input_size, int hidden_size);
  /// Uniform in +-1/sqrt(D + H), forget-gate bias 1.0.
  static LstmParams initialize(int input_size, int hidden_size, std::mt19937_64& rng);

  int input_size() const { return static_cast<int>(weights.cols() - hidden_size()); }
  int hidden_size() const { return static_cast<int>(weights.rows() / 4); }

  void append_blocks(const std::string& prefix, BlockList& out);
};

struct LstmCache {
  Vec x, h_prev, c_prev;
  Vec i, f, o, g;  // post-activation gates
  Vec c, tanh_c;
};

struct LstmOutput {
  Vec h;
  Vec c;
  LstmCache cache;
};

struct LstmInputGrads {
  Vec dx;
  Vec dh_prev;
  Vec dc_prev;
};

LstmOutput lstm_forward(const LstmParams& params, const Vec& x, const Vec& h_prev,
                        const Vec& c_prev);

/// Backpropagates dL/dh_t and dL/dc_t through one cell step; parameter
/// gradients are accumulated into `grads`.
LstmInputGrads lstm_backward(const LstmParams& params, const LstmCache& cache, const Vec& dh,
                             const Vec& dc, LstmParams& grads);

}  // namespace sugar
