#include "sugar/model.hpp"

#include "sugar/error.hpp"

#include <cmath>

namespace sugar {

char variant_char(Variant v) {
  switch (v) {
    case Variant::A: return 'a';
    case Variant::B: return 'b';
    case Variant::C: return 'c';
  }
  return '?';
}

Variant parse_variant(const std::string& s) {
  if (s == "a" || s == "A") return Variant::A;
  if (s == "b" || s == "B") return Variant::B;
  if (s == "c" || s == "C") return Variant::C;
  throw InvalidArgument("unknown variant '" + s + "' (expected a, b or c)");
}

SwitchingOutput switching_forward_gated(const SugarParams& params, const Vec& x_a, double x_zeta,
                                        const Vec& x_h_prev) {
  if (x_a.size() != params.w_a.cols()) throw ShapeError("switching_forward: x_a size mismatch");
  if (x_h_prev.size() != params.w_eta.cols()) {
    throw ShapeError("switching_forward: x_h size mismatch");
  }
  SwitchingOutput out;
  out.x_zeta = x_zeta;
  out.x_eta = params.w_a * x_a + params.w_eta * x_h_prev;
  out.x_h = x_zeta * x_h_prev + (1.0 - x_zeta) * out.x_eta;
  out.x_o = params.w_o * out.x_h;
  return out;
}

SwitchingOutput switching_forward(const SugarParams& params, const GateSquash& gate,
                                  const Vec& x_a, double x_s, const Vec& x_h_prev) {
  return switching_forward_gated(params, x_a, gate(x_s), x_h_prev);
}

SugarState SugarState::zeros(const ModelDims& d, const SurpriseConfig& surprise) {
  SugarState s;
  s.h_ant = Vec::Zero(d.anticipation);
  s.c_ant = Vec::Zero(d.anticipation);
  s.h_bnd = Vec::Zero(d.boundary);
  s.c_bnd = Vec::Zero(d.boundary);
  s.x_h = Vec::Zero(d.switching);
  s.h_proc = Vec::Zero(d.processing);
  s.c_proc = Vec::Zero(d.processing);
  s.surprise.config = surprise;
  return s;
}

bool SugarState::operator==(const SugarState& o) const {
  return h_ant == o.h_ant && c_ant == o.c_ant && h_bnd == o.h_bnd && c_bnd == o.c_bnd &&
         x_h == o.x_h && h_proc == o.h_proc && c_proc == o.c_proc &&
         surprise.mean == o.surprise.mean && surprise.variance == o.surprise.variance &&
         last_error == o.last_error;
}

Vec counterfactual_forward(const SugarParams& params, const Vec& symbol, const Vec& x_h_prev,
                           const Vec& h_proc_prev, const Vec& c_proc_prev) {
  const Vec x_o_cf = params.w_o * x_h_prev;
  Vec in(symbol.size() + x_o_cf.size());
  in << symbol, x_o_cf;
  const LstmOutput proc = lstm_forward(params.processing, in, h_proc_prev, c_proc_prev);
  return dense_forward(params.readout, proc.h);
}

Vec counterfactual_forward(const SugarParams& params, const StepCache& k) {
  if (k.beta == 0) throw InvalidArgument("counterfactual_forward: the gate was closed at this step");
  const Vec symbol = k.proc.x.head(k.proc.x.size() - params.w_o.rows());
  return counterfactual_forward(params, symbol, k.x_h_prev, k.proc.h_prev, k.proc.c_prev);
}

double cfr_gate_gradient(double delta_zeta, int beta, const Vec& y_act, const Vec& y_cf,
                         const Vec& y_hat) {
  if (beta == 0) return delta_zeta;
  return delta_zeta + beta * (mean_abs_error(y_act, y_hat) - mean_abs_error(y_cf, y_hat));
}

SugarModel::SugarModel(ModelConfig config, SugarParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  if (!(params_.dims() == config_.dims)) {
    throw ShapeError("SugarModel: parameter shapes do not match the configured layer sizes");
  }
  reset_state();
}

SugarModel SugarModel::create(const ModelConfig& config, std::mt19937_64& rng) {
  return SugarModel(config, SugarParams::initialize(config.dims, rng));
}

void SugarModel::reset_state() {
  state_ = SugarState::zeros(config_.dims, config_.surprise);
  step_index_ = 0;
}

void SugarModel::set_state(SugarState s) {
  const ModelDims& d = config_.dims;
  if (s.x_h.size() != d.switching || s.h_proc.size() != d.processing ||
      s.h_ant.size() != d.anticipation || s.h_bnd.size() != d.boundary) {
    throw ShapeError("SugarModel::set_state: state does not match model sizes");
  }
  state_ = std::move(s);
}

StepTrace SugarModel::step(const StepInputs& in, const GateControl& gate) {
  const ModelDims& d = config_.dims;
  if (in.symbol.size() != d.symbols || in.target.size() != d.symbols) {
    throw ShapeError("SugarModel::step: symbol vectors must have " + std::to_string(d.symbols) +
                     " entries");
  }
  if (in.ci.size() != d.ci) throw ShapeError("SugarModel::step: CI width mismatch");
  if (in.eb.size() != d.eb) throw ShapeError("SugarModel::step: EB width mismatch");

  StepCache k;
  const LstmOutput ant = lstm_forward(params_.anticipation, in.ci, state_.h_ant, state_.c_ant);
  k.ant = ant.cache;
  k.x_a = ant.h;

  double x_s = 0.0;
  std::optional<LstmOutput> bnd;
  if (config_.variant == Variant::A) {
    if (state_.last_error) x_s = state_.surprise.update(*state_.last_error);
  } else {
    bnd = lstm_forward(params_.boundary, in.eb, state_.h_bnd, state_.c_bnd);
    x_s = dense_forward(params_.boundary_readout, bnd->h)(0);
    k.boundary_used = true;
    k.bnd = bnd->cache;
    k.h_bnd = bnd->h;
  }
  if (gate.mode == GateControl::Mode::ForceSurprise) x_s = gate.surprise;
  k.x_s = x_s;
  k.gate_trainable = config_.variant != Variant::A && gate.mode == GateControl::Mode::Model;

  const double x_zeta =
      gate.mode == GateControl::Mode::ForceClosed ? 1.0 : config_.gate(x_s);
  const SwitchingOutput sw = switching_forward_gated(params_, k.x_a, x_zeta, state_.x_h);
  k.x_zeta = x_zeta;
  k.x_h_prev = state_.x_h;
  k.x_eta = sw.x_eta;
  k.x_h = sw.x_h;
  k.x_o = sw.x_o;

  Vec proc_in(d.symbols + d.switching);
  proc_in << in.symbol, sw.x_o;
  const LstmOutput proc = lstm_forward(params_.processing, proc_in, state_.h_proc, state_.c_proc);
  k.proc = proc.cache;
  k.h_proc = proc.h;
  k.y_act = dense_forward(params_.readout, proc.h);
  require_finite(k.y_act, "prediction");
  k.target = in.target;
  k.e_act = mean_abs_error(k.y_act, in.target);

  StepTrace tr;
  tr.t = step_index_++;
  tr.y_act = k.y_act;
  tr.x_zeta = x_zeta;
  tr.gate_open = gate_is_open(x_zeta);
  tr.x_o = sw.x_o;
  tr.error = k.e_act;
  tr.surprise = x_s;
  if (tr.gate_open) {
    k.beta = 1;
    k.y_cf = counterfactual_forward(params_, in.symbol, state_.x_h, state_.h_proc, state_.c_proc);
    k.e_cf = mean_abs_error(k.y_cf, in.target);
    tr.y_cf = k.y_cf;
    tr.cf_error = k.e_cf;
  }

  state_.h_ant = ant.h;
  state_.c_ant = ant.c;
  if (bnd) {
    state_.h_bnd = bnd->h;
    state_.c_bnd = bnd->c;
  }
  state_.x_h = sw.x_h;
  state_.h_proc = proc.h;
  state_.c_proc = proc.c;
  state_.last_error = k.e_act;

  if (recording_) tape_.push_back(std::move(k));
  return tr;
}

BackwardResult SugarModel::backward(const BackwardOptions& options) const {
  return bptt_backward(params_, config_, tape_, options);
}

BackwardResult bptt_backward(const SugarParams& params, const ModelConfig& config,
                             const std::vector<StepCache>& tape, const BackwardOptions& options) {
  const ModelDims& d = config.dims;
  BackwardResult res;
  res.grads = SugarParams::zeros(d);
  SugarParams& g = res.grads;

  Vec dh_ant = Vec::Zero(d.anticipation), dc_ant = Vec::Zero(d.anticipation);
  Vec dh_bnd = Vec::Zero(d.boundary), dc_bnd = Vec::Zero(d.boundary);
  Vec dx_h_next = Vec::Zero(d.switching);
  Vec dh_proc = Vec::Zero(d.processing), dc_proc = Vec::Zero(d.processing);

  res.gate_deltas.resize(tape.size());
  for (std::size_t r = tape.size(); r-- > 0;) {
    const StepCache& k = tape[r];
    if (k.proc.x.size() != d.symbols + d.switching) {
      throw ShapeError("bptt_backward: tape entry does not match model sizes");
    }
    const Vec diff = k.y_act - k.target;
    res.loss += diff.squaredNorm();

    const Vec dy = 2.0 * diff;
    dh_proc += dense_backward(params.readout, k.h_proc, dy, g.readout);
    const LstmInputGrads proc = lstm_backward(params.processing, k.proc, dh_proc, dc_proc,
                                              g.processing);
    dh_proc = proc.dh_prev;
    dc_proc = proc.dc_prev;

    const Vec dx_o = proc.dx.tail(d.switching);
    g.w_o.noalias() += dx_o * k.x_h.transpose();
    const Vec dx_h = params.w_o.transpose() * dx_o + dx_h_next;

    const double dz = dx_h.dot(k.x_h_prev - k.x_eta);
    const Vec dx_eta = (1.0 - k.x_zeta) * dx_h;
    Vec dx_h_prev = k.x_zeta * dx_h;

    g.w_a.noalias() += dx_eta * k.x_a.transpose();
    g.w_eta.noalias() += dx_eta * k.x_h_prev.transpose();
    dx_h_prev.noalias() += params.w_eta.transpose() * dx_eta;
    const Vec dx_a = params.w_a.transpose() * dx_eta;

    GateDelta& gd = res.gate_deltas[r];
    gd.step = static_cast<int>(r);
    gd.beta = k.beta;
    gd.e_act = k.e_act;
    gd.e_cf = k.e_cf;
    gd.delta_zeta = -dz;
    gd.delta_zeta_reg = gd.delta_zeta;
    if (options.apply_cfr && k.gate_trainable && k.beta == 1) {
      gd.delta_zeta_reg = cfr_gate_gradient(gd.delta_zeta, k.beta, k.y_act, k.y_cf, k.target);
    }

    if (k.gate_trainable) {
      const double dx_s = -gd.delta_zeta_reg * config.gate.derivative(k.x_s);
      Vec dx_s_vec(1);
      dx_s_vec(0) = dx_s;
      dh_bnd += dense_backward(params.boundary_readout, k.h_bnd, dx_s_vec, g.boundary_readout);
    }
    if (k.boundary_used) {
      const LstmInputGrads bnd = lstm_backward(params.boundary, k.bnd, dh_bnd, dc_bnd, g.boundary);
      dh_bnd = bnd.dh_prev;
      dc_bnd = bnd.dc_prev;
    }

    const LstmInputGrads ant = lstm_backward(params.anticipation, k.ant, dx_a + dh_ant, dc_ant,
                                             g.anticipation);
    dh_ant = ant.dh_prev;
    dc_ant = ant.dc_prev;
    dx_h_next = dx_h_prev;
  }
  return res;
}

}  // namespace sugar
