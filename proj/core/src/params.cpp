#include "sugar/model.hpp"

namespace sugar {

SugarParams SugarParams::zeros(const ModelDims& d) {
  SugarParams p;
  p.anticipation = LstmParams::zeros(d.ci, d.anticipation);
  p.boundary = LstmParams::zeros(d.eb, d.boundary);
  p.boundary_readout = DenseParams::zeros(d.boundary, 1);
  p.w_a = Mat::Zero(d.switching, d.anticipation);
  p.w_eta = Mat::Zero(d.switching, d.switching);
  p.w_o = Mat::Zero(d.switching, d.switching);
  p.processing = LstmParams::zeros(d.symbols + d.switching, d.processing);
  p.readout = DenseParams::zeros(d.processing, d.symbols);
  return p;
}

SugarParams SugarParams::initialize(const ModelDims& d, std::mt19937_64& rng) {
  SugarParams p;
  p.anticipation = LstmParams::initialize(d.ci, d.anticipation, rng);
  p.boundary = LstmParams::initialize(d.eb, d.boundary, rng);
  p.boundary_readout = DenseParams::initialize(d.boundary, 1, rng);
  p.w_a = uniform_init(d.switching, d.anticipation, d.anticipation, rng);
  p.w_eta = uniform_init(d.switching, d.switching, d.switching, rng);
  p.w_o = uniform_init(d.switching, d.switching, d.switching, rng);
  p.processing = LstmParams::initialize(d.symbols + d.switching, d.processing, rng);
  p.readout = DenseParams::initialize(d.processing, d.symbols, rng);
  return p;
}

ModelDims SugarParams::dims() const {
  ModelDims d;
  d.ci = anticipation.input_size();
  d.anticipation = anticipation.hidden_size();
  d.eb = boundary.input_size();
  d.boundary = boundary.hidden_size();
  d.switching = static_cast<int>(w_o.rows());
  d.processing = processing.hidden_size();
  d.symbols = static_cast<int>(readout.weights.rows());
  return d;
}

BlockList SugarParams::blocks() {
  BlockList out;
  anticipation.append_blocks("anticipation", out);
  boundary.append_blocks("boundary", out);
  boundary_readout.append_blocks("boundary_readout", out);
  out.push_back({"switching.w_a", &w_a});
  out.push_back({"switching.w_eta", &w_eta});
  out.push_back({"switching.w_o", &w_o});
  processing.append_blocks("processing", out);
  readout.append_blocks("readout", out);
  return out;
}

ConstBlockList SugarParams::blocks() const {
  return sugar::as_const(const_cast<SugarParams*>(this)->blocks());
}

}  // namespace sugar
