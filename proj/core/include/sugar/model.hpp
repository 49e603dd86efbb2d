#pragma once

#include "sugar/dense.hpp"
#include "sugar/lstm.hpp"
#include "sugar/params.hpp"
#include "sugar/surprise.hpp"
#include "sugar/tensor.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sugar {

/// a: computed surprise drives the gate. b: learned boundary module.
/// c: boundary module trained with counterfactual regularization.
enum class Variant { A, B, C };

char variant_char(Variant v);
Variant parse_variant(const std::string& s);

struct ModelDims {
  int symbols = 3;
  int ci = 3;
  int eb = 4;
  int processing = 16;
  int anticipation = 8;
  int boundary = 8;
  int switching = 4;  // also the width of the latent event code x_o

  bool operator==(const ModelDims&) const = default;
};

/// Update gate squash: x_zeta = sigmoid(bias - gain * x_s). Low surprise holds
/// the context (x_zeta near 1), high surprise replaces it.
struct GateSquash {
  double bias = 4.0;
  double gain = 8.0;

  double operator()(double x_s) const { return sigmoid(bias - gain * x_s); }
  /// d x_zeta / d x_s
  double derivative(double x_s) const {
    const double z = (*this)(x_s);
    return -gain * z * (1.0 - z);
  }
};

struct ModelConfig {
  Variant variant = Variant::B;
  ModelDims dims;
  GateSquash gate;
  SurpriseConfig surprise;
};

struct SugarParams {
  LstmParams anticipation;      // CI -> x_a
  LstmParams boundary;          // EB -> boundary state (variants b, c)
  DenseParams boundary_readout; // boundary state -> scalar x_s
  Mat w_a;                      // switching x anticipation
  Mat w_eta;                    // switching x switching
  Mat w_o;                      // switching x switching
  LstmParams processing;        // [previous symbol ; x_o] -> processing state
  DenseParams readout;          // processing state -> symbol prediction

  static SugarParams zeros(const ModelDims& dims);
  static SugarParams initialize(const ModelDims& dims, std::mt19937_64& rng);

  ModelDims dims() const;
  BlockList blocks();
  ConstBlockList blocks() const;
};

struct SwitchingOutput {
  double x_zeta = 1.0;
  Vec x_eta;
  Vec x_h;
  Vec x_o;
};

/// Event switching layer with an explicit gate value.
SwitchingOutput switching_forward_gated(const SugarParams& params, const Vec& x_a, double x_zeta,
                                        const Vec& x_h_prev);

/// Event switching layer driven by a surprise input x_s.
SwitchingOutput switching_forward(const SugarParams& params, const GateSquash& gate,
                                  const Vec& x_a, double x_s, const Vec& x_h_prev);

/// Recurrent state carried between steps.
struct SugarState {
  Vec h_ant, c_ant;
  Vec h_bnd, c_bnd;
  Vec x_h;
  Vec h_proc, c_proc;
  SurpriseEstimator surprise;
  std::optional<double> last_error;  // error of the previous prediction (variant a)

  static SugarState zeros(const ModelDims& dims, const SurpriseConfig& surprise);
  bool operator==(const SugarState& other) const;
};

/// Inputs for predicting one symbol: the previous symbol plus the CI and EB
/// rows observed alongside it, and the symbol to predict.
struct StepInputs {
  Vec symbol;
  Vec ci;
  Vec eb;
  Vec target;
};

struct GateControl {
  enum class Mode { Model, ForceSurprise, ForceClosed };
  Mode mode = Mode::Model;
  double surprise = 0.0;  // used by ForceSurprise

  static GateControl model() { return {}; }
  static GateControl forced_surprise(double x_s) { return {Mode::ForceSurprise, x_s}; }
  static GateControl closed() { return {Mode::ForceClosed, 0.0}; }
};

struct StepTrace {
  int t = 0;
  Vec y_act;
  std::optional<Vec> y_cf;  // present iff the gate was open
  double x_zeta = 1.0;
  bool gate_open = false;
  Vec x_o;
  double error = 0.0;  // mean |y_act - target|
  double surprise = 0.0;
  std::optional<double> cf_error;  // mean |y_cf - target|, present iff the gate was open
};

inline bool gate_is_open(double x_zeta) { return (1.0 - x_zeta) > 0.5; }

/// Prediction with the update gate fully closed, starting from the frozen
/// pre-step state. Touches no persistent state.
Vec counterfactual_forward(const SugarParams& params, const Vec& symbol, const Vec& x_h_prev,
                           const Vec& h_proc_prev, const Vec& c_proc_prev);

/// Counterfactual regularization of the gate error signal, written in the
/// delta convention delta = -dL/dx_zeta:
///   delta_reg = delta + beta * (mean|y_act - y_hat| - mean|y_cf - y_hat|)
double cfr_gate_gradient(double delta_zeta, int beta, const Vec& y_act, const Vec& y_cf,
                         const Vec& y_hat);

/// Everything the backward pass needs from one forward step.
struct StepCache {
  LstmCache ant;
  LstmCache bnd;
  LstmCache proc;
  bool boundary_used = false;
  Vec h_bnd;
  double x_s = 0.0;
  bool gate_trainable = false;  // false for computed, forced or closed gates
  double x_zeta = 1.0;
  Vec x_a, x_h_prev, x_eta, x_h, x_o;
  Vec h_proc;
  Vec y_act, y_cf, target;
  int beta = 0;
  double e_act = 0.0;
  double e_cf = 0.0;
};

/// Counterfactual prediction for a recorded step. Throws InvalidArgument when
/// the gate was closed at that step (beta = 0).
Vec counterfactual_forward(const SugarParams& params, const StepCache& step);

struct GateDelta {
  int step = 0;
  int beta = 0;
  double delta_zeta = 0.0;      // -dL/dx_zeta from the reconstruction loss
  double delta_zeta_reg = 0.0;  // after counterfactual regularization
  double e_act = 0.0;
  double e_cf = 0.0;
};

struct BackwardOptions {
  bool apply_cfr = false;
};

struct BackwardResult {
  SugarParams grads;
  double loss = 0.0;  // sum over the window of ||y_act - target||^2
  std::vector<GateDelta> gate_deltas;
};

class SugarModel {
 public:
  SugarModel(ModelConfig config, SugarParams params);
  static SugarModel create(const ModelConfig& config, std::mt19937_64& rng);

  const ModelConfig& config() const { return config_; }
  Variant variant() const { return config_.variant; }
  const SugarParams& params() const { return params_; }
  SugarParams& params() { return params_; }
  const SugarState& state() const { return state_; }
  void set_state(SugarState s);
  void reset_state();

  StepTrace step(const StepInputs& in, const GateControl& gate = {});

  /// Steps recorded since the last clear_tape() while recording is on.
  void set_recording(bool on) { recording_ = on; }
  void clear_tape() { tape_.clear(); }
  const std::vector<StepCache>& tape() const { return tape_; }

  /// Truncated BPTT over the recorded tape; no gradient flows into the state
  /// the tape started from.
  BackwardResult backward(const BackwardOptions& options) const;
  BackwardResult backward() const { return backward({config_.variant == Variant::C}); }

 private:
  ModelConfig config_;
  SugarParams params_;
  SugarState state_;
  bool recording_ = false;
  std::vector<StepCache> tape_;
  int step_index_ = 0;
};

/// Backward pass over an explicit tape (the model's tape uses this).
BackwardResult bptt_backward(const SugarParams& params, const ModelConfig& config,
                             const std::vector<StepCache>& tape, const BackwardOptions& options);

}  // namespace sugar
