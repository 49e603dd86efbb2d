#pragma once

#include "sugar/adam.hpp"
#include "sugar/model.hpp"
#include "sugar/task.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace sugar {

/// Which signal drives the update gate during training. Oracle trains the
/// "fully informed" model: x_s = 1 on the step predicting each new event's
/// first symbol, 0 elsewhere.
enum class TrainGate { Model, Oracle };

struct ExperimentConfig {
  Variant variant = Variant::B;
  TrainGate train_gate = TrainGate::Model;
  std::vector<int> problems{1, 2};
  EbVariant eb;
  StartSymbols start_symbols = kDefaultStartSymbols;
  int train_length = 1000;
  int window = 50;
  int n_windows = 4000;
  int log_every = 50;
  double learning_rate = 1e-3;
  /// Learning rate decays linearly from learning_rate to
  /// learning_rate * final_lr_fraction over the n_windows updates.
  double final_lr_fraction = 1.0;
  ModelDims dims;
  GateSquash gate;
  SurpriseConfig surprise;
  int test_episodes = 20;
  int test_length = 200;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  void validate() const;

  ModelConfig model_config() const;
  TaskConfig train_task() const;
  TaskConfig test_task() const;
  AdamConfig adam() const;

  /// FNV-1a over the canonical JSON with output_dir removed.
  std::uint64_t hash() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Fields absent from `j` keep their defaults; unknown fields are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

std::string dump_config(const ExperimentConfig& config);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// Parses "12" / "123" / "1,2,3".
std::vector<int> parse_problem_set(const std::string& s);
EbKind parse_eb_kind(const std::string& s);
TrainGate parse_train_gate(const std::string& s);
std::string train_gate_name(TrainGate g);
std::string eb_kind_name(EbKind k);

/// Independent, reproducible seed for a named stream derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

/// Seed streams.
inline constexpr std::uint64_t kParamStream = 0;
inline constexpr std::uint64_t kTrainEpisodeStream = 1;
inline constexpr std::uint64_t kTestEpisodeStream = 2;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sugar
