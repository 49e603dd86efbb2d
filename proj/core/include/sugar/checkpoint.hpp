#pragma once

#include "sugar/adam.hpp"
#include "sugar/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace sugar {

struct Checkpoint {
  ModelConfig model;
  SugarParams params;
  AdamState adam;
  SurpriseEstimator surprise;
  std::int64_t step_count = 0;  // training windows applied
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

/// Structured text: JSON with row-major parameter arrays written as
/// shortest round-trip decimals, so save -> load -> save is byte-identical.
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// Rejects checkpoints whose variant or parameter shapes differ from `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

SugarModel model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace sugar
