#include "sugar/config.hpp"

#include "sugar/error.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace sugar {

using nlohmann::json;

void ExperimentConfig::validate() const {
  train_task().validate();
  test_task().validate();
  if (window < 2) throw InvalidArgument("window length must be >= 2");
  if (n_windows < 0) throw InvalidArgument("n_windows must be >= 0");
  if (log_every < 1) throw InvalidArgument("log_every must be >= 1");
  if (!(learning_rate >= 0.0)) throw InvalidArgument("learning_rate must be >= 0");
  if (!(final_lr_fraction >= 0.0 && final_lr_fraction <= 1.0)) {
    throw InvalidArgument("final_lr_fraction must lie in [0, 1]");
  }
  if (test_episodes < 1) throw InvalidArgument("test_episodes must be >= 1");
  if (dims.symbols != kNumSymbols || dims.ci != kNumProblems) {
    throw InvalidArgument("symbol and CI widths are fixed at 3");
  }
  if (dims.eb != eb.channels()) {
    throw InvalidArgument("dims.eb (" + std::to_string(dims.eb) + ") must equal the EB channel count (" +
                          std::to_string(eb.channels()) + ")");
  }
  if (dims.processing < 1 || dims.anticipation < 1 || dims.boundary < 1 || dims.switching < 1) {
    throw InvalidArgument("layer sizes must be positive");
  }
}

ModelConfig ExperimentConfig::model_config() const {
  return ModelConfig{variant, dims, gate, surprise};
}

TaskConfig ExperimentConfig::train_task() const {
  return TaskConfig{problems, train_length, eb, start_symbols};
}

TaskConfig ExperimentConfig::test_task() const {
  return TaskConfig{problems, test_length, eb, start_symbols};
}

AdamConfig ExperimentConfig::adam() const {
  AdamConfig a;
  a.learning_rate = learning_rate;
  return a;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string start_symbols_string(const StartSymbols& s) {
  std::string out;
  for (Symbol x : s) out += symbol_char(x);
  return out;
}

StartSymbols parse_start_symbols(const std::string& s) {
  if (s.size() != kNumProblems) throw InvalidArgument("start_symbols needs one letter per problem");
  StartSymbols out{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 'A' || s[i] > 'C') throw InvalidArgument("start symbols must be A, B or C");
    out[i] = static_cast<Symbol>(s[i] - 'A');
  }
  return out;
}

template <typename T>
void take(const json& j, const char* key, T& out, std::set<std::string>& seen) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("config field '") + key + "': " + e.what());
    }
  }
  seen.insert(key);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw InvalidArgument("unknown config field '" + where + it.key() + "'");
    }
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

std::uint64_t ExperimentConfig::hash() const {
  json j = to_json(*this);
  j.erase("output_dir");
  return fnv1a(j.dump());
}

std::vector<int> parse_problem_set(const std::string& s) {
  std::vector<int> out;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '+' || c == '-') continue;
    if (c < '1' || c > '3') throw InvalidArgument("bad problem set '" + s + "'");
    out.push_back(c - '0');
  }
  if (out.size() < 2) throw InvalidArgument("problem set '" + s + "' needs at least two problems");
  return out;
}

EbKind parse_eb_kind(const std::string& s) {
  if (s == "distractor") return EbKind::Distractor;
  if (s == "ramp") return EbKind::Ramp;
  throw InvalidArgument("unknown EB variant '" + s + "' (expected distractor or ramp)");
}

TrainGate parse_train_gate(const std::string& s) {
  if (s == "model") return TrainGate::Model;
  if (s == "oracle") return TrainGate::Oracle;
  throw InvalidArgument("unknown train_gate '" + s + "' (expected model or oracle)");
}

std::string train_gate_name(TrainGate g) { return g == TrainGate::Model ? "model" : "oracle"; }

std::string eb_kind_name(EbKind k) { return k == EbKind::Distractor ? "distractor" : "ramp"; }

json to_json(const ExperimentConfig& c) {
  json j;
  j["variant"] = std::string(1, variant_char(c.variant));
  j["train_gate"] = train_gate_name(c.train_gate);
  j["problems"] = c.problems;
  j["eb"] = {{"kind", eb_kind_name(c.eb.kind)},
             {"n_distractors", c.eb.n_distractors},
             {"ramp_channels", c.eb.ramp_channels},
             {"ramp_len", c.eb.ramp_len}};
  j["start_symbols"] = start_symbols_string(c.start_symbols);
  j["train_length"] = c.train_length;
  j["window"] = c.window;
  j["n_windows"] = c.n_windows;
  j["log_every"] = c.log_every;
  j["learning_rate"] = c.learning_rate;
  j["final_lr_fraction"] = c.final_lr_fraction;
  j["dims"] = {{"symbols", c.dims.symbols},         {"ci", c.dims.ci},
               {"eb", c.dims.eb},                   {"processing", c.dims.processing},
               {"anticipation", c.dims.anticipation}, {"boundary", c.dims.boundary},
               {"switching", c.dims.switching}};
  j["gate"] = {{"bias", c.gate.bias}, {"gain", c.gate.gain}};
  j["surprise"] = {{"rate", c.surprise.rate},
                   {"offset", c.surprise.offset},
                   {"gain", c.surprise.gain},
                   {"sigma_floor", c.surprise.sigma_floor}};
  j["test_episodes"] = c.test_episodes;
  j["test_length"] = c.test_length;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  ExperimentConfig c;
  std::set<std::string> seen;

  std::string variant(1, variant_char(c.variant));
  take(j, "variant", variant, seen);
  c.variant = parse_variant(variant);
  std::string train_gate = train_gate_name(c.train_gate);
  take(j, "train_gate", train_gate, seen);
  c.train_gate = parse_train_gate(train_gate);
  take(j, "problems", c.problems, seen);

  if (auto it = j.find("eb"); it != j.end()) {
    std::set<std::string> eb_seen;
    std::string kind = eb_kind_name(c.eb.kind);
    take(*it, "kind", kind, eb_seen);
    c.eb.kind = parse_eb_kind(kind);
    take(*it, "n_distractors", c.eb.n_distractors, eb_seen);
    take(*it, "ramp_channels", c.eb.ramp_channels, eb_seen);
    take(*it, "ramp_len", c.eb.ramp_len, eb_seen);
    reject_unknown(*it, eb_seen, "eb.");
  }
  seen.insert("eb");

  std::string starts = start_symbols_string(c.start_symbols);
  take(j, "start_symbols", starts, seen);
  c.start_symbols = parse_start_symbols(starts);

  take(j, "train_length", c.train_length, seen);
  take(j, "window", c.window, seen);
  take(j, "n_windows", c.n_windows, seen);
  take(j, "log_every", c.log_every, seen);
  take(j, "learning_rate", c.learning_rate, seen);
  take(j, "final_lr_fraction", c.final_lr_fraction, seen);

  // The EB width follows the EB variant unless given explicitly.
  c.dims.eb = c.eb.channels();
  if (auto it = j.find("dims"); it != j.end()) {
    std::set<std::string> d_seen;
    take(*it, "symbols", c.dims.symbols, d_seen);
    take(*it, "ci", c.dims.ci, d_seen);
    take(*it, "eb", c.dims.eb, d_seen);
    take(*it, "processing", c.dims.processing, d_seen);
    take(*it, "anticipation", c.dims.anticipation, d_seen);
    take(*it, "boundary", c.dims.boundary, d_seen);
    take(*it, "switching", c.dims.switching, d_seen);
    reject_unknown(*it, d_seen, "dims.");
  }
  seen.insert("dims");

  if (auto it = j.find("gate"); it != j.end()) {
    std::set<std::string> g_seen;
    take(*it, "bias", c.gate.bias, g_seen);
    take(*it, "gain", c.gate.gain, g_seen);
    reject_unknown(*it, g_seen, "gate.");
  }
  seen.insert("gate");

  if (auto it = j.find("surprise"); it != j.end()) {
    std::set<std::string> s_seen;
    take(*it, "rate", c.surprise.rate, s_seen);
    take(*it, "offset", c.surprise.offset, s_seen);
    take(*it, "gain", c.surprise.gain, s_seen);
    take(*it, "sigma_floor", c.surprise.sigma_floor, s_seen);
    reject_unknown(*it, s_seen, "surprise.");
  }
  seen.insert("surprise");

  take(j, "test_episodes", c.test_episodes, seen);
  take(j, "test_length", c.test_length, seen);
  take(j, "seed", c.seed, seen);
  take(j, "output_dir", c.output_dir, seen);
  reject_unknown(j, seen, "");

  c.validate();
  return c;
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what(), e.byte);
  }
  return config_from_json(j);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& config) {
  write_file(path, dump_config(config));
}

}  // namespace sugar
