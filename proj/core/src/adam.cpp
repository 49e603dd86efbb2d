#include "sugar/adam.hpp"

#include "sugar/error.hpp"

#include <cmath>

namespace sugar {

AdamState AdamState::zeros_like(const ConstBlockList& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  for (const auto& b : params) {
    s.m.push_back(Mat::Zero(b.value->rows(), b.value->cols()));
    s.v.push_back(Mat::Zero(b.value->rows(), b.value->cols()));
  }
  return s;
}

void adam_step(AdamState& state, const BlockList& params, const ConstBlockList& grads) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameter blocks, " +
                     std::to_string(grads.size()) + " gradient blocks, " +
                     std::to_string(state.m.size()) + " moment blocks");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_shape(*grads[k].value, params[k].value->rows(), params[k].value->cols(),
                  "adam_step gradient " + grads[k].name);
    require_shape(state.m[k], params[k].value->rows(), params[k].value->cols(),
                  "adam_step moment " + params[k].name);
    require_finite(*grads[k].value, "gradient of " + grads[k].name);
  }

  const AdamConfig& c = state.config;
  ++state.step;
  const double k = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, k);
  const double correction2 = 1.0 - std::pow(c.beta2, k);

  for (std::size_t b = 0; b < params.size(); ++b) {
    Mat& p = *params[b].value;
    const Mat& g = *grads[b].value;
    Mat& m = state.m[b];
    Mat& v = state.v[b];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseAbs2();
    p.array() -= c.learning_rate * (m.array() / correction1) /
                 ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

}  // namespace sugar
