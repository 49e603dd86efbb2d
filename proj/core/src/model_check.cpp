#include "sugar/model_check.hpp"

#include "sugar/config.hpp"

#include <algorithm>
#include <random>
#include <utility>

namespace sugar {

namespace {

std::vector<StepInputs> random_inputs(const ModelDims& dims, int steps, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, dims.symbols - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<StepInputs> out;
  int prev = pick(rng);
  for (int i = 0; i < steps; ++i) {
    StepInputs in;
    in.symbol = one_hot(dims.symbols, prev);
    in.ci = unit(rng) < 0.5 ? Vec(Vec::Zero(dims.ci)) : one_hot(dims.ci, pick(rng));
    in.eb = Vec(dims.eb);
    for (Eigen::Index k = 0; k < in.eb.size(); ++k) in.eb(k) = unit(rng);
    const int next = pick(rng);
    in.target = one_hot(dims.symbols, next);
    prev = next;
    out.push_back(std::move(in));
  }
  return out;
}

}  // namespace

ModelCheckResult check_model_gradients(const ModelCheckOptions& options) {
  ModelConfig config;
  config.variant = options.variant;
  std::mt19937_64 rng(derive_seed(options.seed, kParamStream));
  SugarModel model = SugarModel::create(config, rng);

  const std::vector<StepInputs> inputs = random_inputs(config.dims, options.steps, rng);

  // Variant a: surprise is a computed signal with no gradient path, so the
  // finite differences replay the surprise of the unperturbed run.
  std::vector<double> replay;
  auto run = [&](bool record) {
    model.reset_state();
    model.clear_tape();
    model.set_recording(record);
    double loss = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const GateControl gate = replay.empty() ? GateControl::model()
                                              : GateControl::forced_surprise(replay[i]);
      const StepTrace tr = model.step(inputs[i], gate);
      loss += (tr.y_act - inputs[i].target).squaredNorm();
      if (record && options.variant == Variant::A) replay.push_back(tr.surprise);
    }
    model.set_recording(false);
    return loss;
  };

  if (options.variant != Variant::A) {
    // centre x_s on the opening threshold so both gate states occur
    model.params().boundary_readout.weights *= 4.0;
    model.params().boundary_readout.bias.setZero();
    std::vector<double> x_s;
    model.reset_state();
    for (const StepInputs& in : inputs) x_s.push_back(model.step(in).surprise);
    std::nth_element(x_s.begin(), x_s.begin() + x_s.size() / 2, x_s.end());
    model.params().boundary_readout.bias.setConstant(0.5 - x_s[x_s.size() / 2] + 1e-3);
  }

  ModelCheckResult result;
  run(true);
  const BackwardResult plain = model.backward(BackwardOptions{false});
  for (const StepCache& k : model.tape()) result.open_gates += k.beta;

  result.report = grad_check([&] { return run(false); }, model.params().blocks(),
                             std::as_const(plain.grads).blocks(), options.grad);

  if (options.variant == Variant::C) {
    run(true);
    const BackwardResult cfr = model.backward(BackwardOptions{true});
    const auto& tape = model.tape();
    for (const GateDelta& gd : cfr.gate_deltas) {
      const StepCache& k = tape[static_cast<std::size_t>(gd.step)];
      double expected = gd.delta_zeta;
      if (gate_is_open(k.x_zeta)) {
        ++result.cfr_terms;
        const Vec symbol = k.proc.x.head(config.dims.symbols);
        const Vec y_cf = counterfactual_forward(model.params(), symbol, k.x_h_prev,
                                                k.proc.h_prev, k.proc.c_prev);
        const double e_act = (k.y_act - k.target).cwiseAbs().mean();
        const double e_cf = (y_cf - k.target).cwiseAbs().mean();
        expected = gd.delta_zeta + (e_act - e_cf);
      }
      if (gd.delta_zeta_reg != expected) ++result.cfr_mismatches;
    }
    const auto a = std::as_const(plain.grads).blocks();
    const auto b = std::as_const(cfr.grads).blocks();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const bool boundary = a[i].name.rfind("boundary", 0) == 0;
      if (!boundary && *a[i].value != *b[i].value) result.cfr_isolated = false;
    }
  }
  return result;
}

}  // namespace sugar
