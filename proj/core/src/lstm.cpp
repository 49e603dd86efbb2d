#include "sugar/lstm.hpp"

#include "sugar/dense.hpp"
#include "sugar/error.hpp"

namespace sugar {

LstmParams LstmParams::zeros(int input_size, int hidden_size) {
  if (input_size < 1 || hidden_size < 1) throw InvalidArgument("LSTM sizes must be positive");
  return {Mat::Zero(4 * hidden_size, input_size + hidden_size), Mat::Zero(4 * hidden_size, 1)};
}

LstmParams LstmParams::initialize(int input_size, int hidden_size, std::mt19937_64& rng) {
  LstmParams p = zeros(input_size, hidden_size);
  const int fan_in = input_size + hidden_size;
  p.weights = uniform_init(4 * hidden_size, fan_in, fan_in, rng);
  p.bias = uniform_init(4 * hidden_size, 1, fan_in, rng);
  p.bias.block(hidden_size, 0, hidden_size, 1).setOnes();
  return p;
}

void LstmParams::append_blocks(const std::string& prefix, BlockList& out) {
  out.push_back({prefix + ".W", &weights});
  out.push_back({prefix + ".b", &bias});
}

LstmOutput lstm_forward(const LstmParams& params, const Vec& x, const Vec& h_prev,
                        const Vec& c_prev) {
  const int H = params.hidden_size();
  const int D = params.input_size();
  if (x.size() != D) throw ShapeError("lstm_forward: input size " + std::to_string(x.size()) +
                                      " != " + std::to_string(D));
  if (h_prev.size() != H || c_prev.size() != H) {
    throw ShapeError("lstm_forward: state size does not match hidden size " + std::to_string(H));
  }

  const Vec pre = params.weights.leftCols(D) * x + params.weights.rightCols(H) * h_prev +
                  params.bias.col(0);

  LstmOutput out;
  LstmCache& k = out.cache;
  k.x = x;
  k.h_prev = h_prev;
  k.c_prev = c_prev;
  k.i = sigmoid(Vec(pre.segment(0, H)));
  k.f = sigmoid(Vec(pre.segment(H, H)));
  k.o = sigmoid(Vec(pre.segment(2 * H, H)));
  k.g = pre.segment(3 * H, H).array().tanh();
  k.c = k.f.cwiseProduct(c_prev) + k.i.cwiseProduct(k.g);
  k.tanh_c = k.c.array().tanh();
  out.c = k.c;
  out.h = k.o.cwiseProduct(k.tanh_c);
  return out;
}

LstmInputGrads lstm_backward(const LstmParams& params, const LstmCache& cache, const Vec& dh,
                             const Vec& dc, LstmParams& grads) {
  const int H = params.hidden_size();
  const int D = params.input_size();
  if (cache.x.size() != D || cache.h_prev.size() != H || cache.c.size() != H) {
    throw ShapeError("lstm_backward: cache does not belong to a cell of this shape");
  }
  if (dh.size() != H || dc.size() != H) throw ShapeError("lstm_backward: bad upstream gradient");
  if (grads.weights.rows() != params.weights.rows() ||
      grads.weights.cols() != params.weights.cols()) {
    throw ShapeError("lstm_backward: gradient accumulator shape mismatch");
  }

  const Vec one = Vec::Ones(H);
  const Vec d_o = dh.cwiseProduct(cache.tanh_c);
  const Vec dc_total =
      dc + dh.cwiseProduct(cache.o).cwiseProduct(one - cache.tanh_c.cwiseAbs2());
  const Vec d_f = dc_total.cwiseProduct(cache.c_prev);
  const Vec d_i = dc_total.cwiseProduct(cache.g);
  const Vec d_g = dc_total.cwiseProduct(cache.i);

  Vec dpre(4 * H);
  dpre.segment(0, H) = d_i.cwiseProduct(cache.i).cwiseProduct(one - cache.i);
  dpre.segment(H, H) = d_f.cwiseProduct(cache.f).cwiseProduct(one - cache.f);
  dpre.segment(2 * H, H) = d_o.cwiseProduct(cache.o).cwiseProduct(one - cache.o);
  dpre.segment(3 * H, H) = d_g.cwiseProduct(one - cache.g.cwiseAbs2());

  grads.weights.leftCols(D).noalias() += dpre * cache.x.transpose();
  grads.weights.rightCols(H).noalias() += dpre * cache.h_prev.transpose();
  grads.bias.col(0) += dpre;

  LstmInputGrads out;
  out.dx = params.weights.leftCols(D).transpose() * dpre;
  out.dh_prev = params.weights.rightCols(H).transpose() * dpre;
  out.dc_prev = dc_total.cwiseProduct(cache.f);
  return out;
}

}  // namespace sugar
