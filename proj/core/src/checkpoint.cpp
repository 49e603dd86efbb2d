#include "sugar/checkpoint.hpp"

#include "sugar/config.hpp"
#include "sugar/error.hpp"

#include <nlohmann/json.hpp>

#include <sstream>
#include <utility>

namespace sugar {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "sugar-checkpoint-1";

json matrix_to_json(const std::string& name, const Mat& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Mat matrix_from_json(const json& j, const std::string& expected_name) {
  const auto name = j.at("name").get<std::string>();
  if (name != expected_name) {
    throw InvalidArgument("checkpoint block '" + name + "' where '" + expected_name +
                          "' was expected");
  }
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw InvalidArgument("checkpoint block '" + name + "': data length does not match " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  Mat m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  }
  return m;
}

json blocks_to_json(const ConstBlockList& blocks) {
  json arr = json::array();
  for (const auto& b : blocks) arr.push_back(matrix_to_json(b.name, *b.value));
  return arr;
}

json dims_to_json(const ModelDims& d) {
  return {{"symbols", d.symbols},       {"ci", d.ci},
          {"eb", d.eb},                 {"processing", d.processing},
          {"anticipation", d.anticipation}, {"boundary", d.boundary},
          {"switching", d.switching}};
}

ModelDims dims_from_json(const json& j) {
  ModelDims d;
  d.symbols = j.at("symbols").get<int>();
  d.ci = j.at("ci").get<int>();
  d.eb = j.at("eb").get<int>();
  d.processing = j.at("processing").get<int>();
  d.anticipation = j.at("anticipation").get<int>();
  d.boundary = j.at("boundary").get<int>();
  d.switching = j.at("switching").get<int>();
  return d;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << v;
  return ss.str();
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  json j;
  j["format"] = kFormat;
  j["variant"] = std::string(1, variant_char(ckpt.model.variant));
  j["dims"] = dims_to_json(ckpt.model.dims);
  j["gate"] = {{"bias", ckpt.model.gate.bias}, {"gain", ckpt.model.gate.gain}};
  const SurpriseConfig& sc = ckpt.model.surprise;
  j["surprise_config"] = {{"rate", sc.rate},
                          {"offset", sc.offset},
                          {"gain", sc.gain},
                          {"sigma_floor", sc.sigma_floor}};
  j["surprise_state"] = {{"mean", ckpt.surprise.mean}, {"variance", ckpt.surprise.variance}};
  j["step_count"] = ckpt.step_count;
  j["config_hash"] = hex64(ckpt.config_hash);
  j["seed"] = ckpt.seed;

  const ConstBlockList blocks = ckpt.params.blocks();
  j["params"] = blocks_to_json(blocks);

  const AdamState& a = ckpt.adam;
  json adam;
  adam["learning_rate"] = a.config.learning_rate;
  adam["beta1"] = a.config.beta1;
  adam["beta2"] = a.config.beta2;
  adam["epsilon"] = a.config.epsilon;
  adam["step"] = a.step;
  json m = json::array(), v = json::array();
  for (std::size_t k = 0; k < a.m.size(); ++k) {
    const std::string name = k < blocks.size() ? blocks[k].name : "block" + std::to_string(k);
    m.push_back(matrix_to_json(name, a.m[k]));
    v.push_back(matrix_to_json(name, a.v[k]));
  }
  adam["m"] = std::move(m);
  adam["v"] = std::move(v);
  j["adam"] = std::move(adam);
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), e.byte);
  }

  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw InvalidArgument("checkpoint: unsupported format '" + j.at("format").get<std::string>() +
                            "'");
    }
    Checkpoint ckpt;
    ckpt.model.variant = parse_variant(j.at("variant").get<std::string>());
    ckpt.model.dims = dims_from_json(j.at("dims"));
    ckpt.model.gate.bias = j.at("gate").at("bias").get<double>();
    ckpt.model.gate.gain = j.at("gate").at("gain").get<double>();
    const json& sc = j.at("surprise_config");
    ckpt.model.surprise.rate = sc.at("rate").get<double>();
    ckpt.model.surprise.offset = sc.at("offset").get<double>();
    ckpt.model.surprise.gain = sc.at("gain").get<double>();
    ckpt.model.surprise.sigma_floor = sc.at("sigma_floor").get<double>();
    ckpt.surprise.config = ckpt.model.surprise;
    ckpt.surprise.mean = j.at("surprise_state").at("mean").get<double>();
    ckpt.surprise.variance = j.at("surprise_state").at("variance").get<double>();
    ckpt.step_count = j.at("step_count").get<std::int64_t>();
    ckpt.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    ckpt.seed = j.at("seed").get<std::uint64_t>();

    // Shapes come from the file; a mismatch with `dims` is reported per block.
    ckpt.params = SugarParams::zeros(ckpt.model.dims);
    BlockList blocks = ckpt.params.blocks();
    const json& params = j.at("params");
    if (params.size() != blocks.size()) {
      throw InvalidArgument("checkpoint: expected " + std::to_string(blocks.size()) +
                            " parameter blocks, found " + std::to_string(params.size()));
    }
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      Mat m = matrix_from_json(params[k], blocks[k].name);
      require_shape(m, blocks[k].value->rows(), blocks[k].value->cols(),
                    "checkpoint block " + blocks[k].name);
      *blocks[k].value = std::move(m);
    }

    const json& adam = j.at("adam");
    ckpt.adam.config.learning_rate = adam.at("learning_rate").get<double>();
    ckpt.adam.config.beta1 = adam.at("beta1").get<double>();
    ckpt.adam.config.beta2 = adam.at("beta2").get<double>();
    ckpt.adam.config.epsilon = adam.at("epsilon").get<double>();
    ckpt.adam.step = adam.at("step").get<std::int64_t>();
    const json& m = adam.at("m");
    const json& v = adam.at("v");
    if (m.size() != v.size() || (!m.empty() && m.size() != blocks.size())) {
      throw InvalidArgument("checkpoint: ADAM moments do not match the parameter blocks");
    }
    for (std::size_t k = 0; k < m.size(); ++k) {
      ckpt.adam.m.push_back(matrix_from_json(m[k], blocks[k].name));
      ckpt.adam.v.push_back(matrix_from_json(v[k], blocks[k].name));
      require_shape(ckpt.adam.m.back(), blocks[k].value->rows(), blocks[k].value->cols(),
                    "checkpoint ADAM moment " + blocks[k].name);
      require_shape(ckpt.adam.v.back(), blocks[k].value->rows(), blocks[k].value->cols(),
                    "checkpoint ADAM moment " + blocks[k].name);
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.model.variant != expected.variant) {
    throw InvalidArgument(std::string("checkpoint holds variant ") +
                          variant_char(ckpt.model.variant) + ", expected " +
                          variant_char(expected.variant));
  }
  const SugarParams want = SugarParams::zeros(expected.dims);
  const ConstBlockList have_blocks = std::as_const(ckpt.params).blocks();
  const ConstBlockList want_blocks = want.blocks();
  for (std::size_t k = 0; k < want_blocks.size(); ++k) {
    require_shape(*have_blocks[k].value, want_blocks[k].value->rows(),
                  want_blocks[k].value->cols(), "checkpoint block " + want_blocks[k].name);
  }
  return ckpt;
}

SugarModel model_from_checkpoint(const Checkpoint& ckpt) {
  return SugarModel(ckpt.model, ckpt.params);
}

}  // namespace sugar
