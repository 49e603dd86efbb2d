#include "sugar/checkpoint.hpp"
#include "sugar/config.hpp"
#include "sugar/csv.hpp"
#include "sugar/error.hpp"
#include "sugar/training.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace sugar;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sugar_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Checkpoint sample_checkpoint(Variant v) {
  ExperimentConfig cfg;
  cfg.variant = v;
  cfg.seed = 7;
  Checkpoint ck = initial_checkpoint(cfg);
  // Non-trivial optimizer state so every field is exercised.
  std::mt19937_64 rng(3);
  const SugarParams g = SugarParams::initialize(cfg.dims, rng);
  adam_step(ck.adam, ck.params.blocks(), g.blocks());
  ck.step_count = 1;
  ck.surprise.mean = 0.123456789;
  ck.surprise.variance = 1.0 / 3.0;
  return ck;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c;
  const std::string text = dump_config(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(back.hash(), c.hash());
}

TEST(Config, PartialFileKeepsDefaults) {
  const ExperimentConfig c = parse_config(R"({"variant": "c", "eb": {"kind": "ramp"}, "seed": 9})");
  EXPECT_EQ(c.variant, Variant::C);
  EXPECT_EQ(c.eb.kind, EbKind::Ramp);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.window, 50);
  EXPECT_EQ(c.n_windows, 4000);
  EXPECT_EQ(c.learning_rate, 1e-3);
}

TEST(Config, HashIgnoresOutputDirOnly) {
  ExperimentConfig a, b;
  b.output_dir = "elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 2;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, RejectsUnknownAndInvalidFields) {
  EXPECT_THROW(parse_config(R"({"windw": 50})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"eb": {"knd": "ramp"}})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"window": 1})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"variant": "d"})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"problems": [1]})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"window": "fifty"})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"dims": {"eb": 5}})"), InvalidArgument);
  EXPECT_THROW(parse_config("[1, 2]"), InvalidArgument);
}

TEST(Config, TruncatedTextReportsOffset) {
  const std::string text = dump_config(ExperimentConfig{});
  const std::string cut = text.substr(0, 40);
  try {
    parse_config(cut);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.offset(), 0u);
    EXPECT_LE(e.offset(), cut.size() + 1);
  }
}

TEST(Config, ProblemSetAndNames) {
  EXPECT_EQ(parse_problem_set("12"), (std::vector<int>{1, 2}));
  EXPECT_EQ(parse_problem_set("123"), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(parse_problem_set("1,2,3"), (std::vector<int>{1, 2, 3}));
  EXPECT_THROW(parse_problem_set("14"), InvalidArgument);
  EXPECT_THROW(parse_problem_set("1"), InvalidArgument);
  EXPECT_EQ(parse_eb_kind("ramp"), EbKind::Ramp);
  EXPECT_THROW(parse_eb_kind("ramps"), InvalidArgument);
  EXPECT_EQ(parse_variant("b"), Variant::B);
  EXPECT_EQ(parse_train_gate("oracle"), TrainGate::Oracle);
}

TEST(Config, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 20; ++base) {
    for (std::uint64_t stream = 0; stream < 3; ++stream) {
      for (std::uint64_t idx = 0; idx < 20; ++idx) seen.insert(derive_seed(base, stream, idx));
    }
  }
  EXPECT_EQ(seen.size(), 20u * 3u * 20u);
  EXPECT_EQ(derive_seed(5, 1, 2), derive_seed(5, 1, 2));
}

TEST(Checkpoint, SerializeParseSerializeIsByteIdentical) {
  for (Variant v : {Variant::A, Variant::B, Variant::C}) {
    const Checkpoint ck = sample_checkpoint(v);
    const std::string text = serialize_checkpoint(ck);
    EXPECT_EQ(serialize_checkpoint(parse_checkpoint(text)), text);
  }
}

TEST(Checkpoint, RestoresEveryValueExactly) {
  const Checkpoint ck = sample_checkpoint(Variant::C);
  const Checkpoint back = parse_checkpoint(serialize_checkpoint(ck));
  const auto a = ck.params.blocks();
  const auto b = back.params.blocks();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(*a[i].value, *b[i].value) << a[i].name;
    EXPECT_EQ(ck.adam.m[i], back.adam.m[i]);
    EXPECT_EQ(ck.adam.v[i], back.adam.v[i]);
  }
  EXPECT_EQ(back.adam.step, ck.adam.step);
  EXPECT_EQ(back.surprise.mean, ck.surprise.mean);
  EXPECT_EQ(back.surprise.variance, ck.surprise.variance);
  EXPECT_EQ(back.config_hash, ck.config_hash);
  EXPECT_EQ(back.seed, ck.seed);
  EXPECT_EQ(back.model.variant, Variant::C);
}

TEST(Checkpoint, LoadedModelReproducesOutputs) {
  const fs::path dir = scratch_dir("reload");
  const Checkpoint ck = sample_checkpoint(Variant::B);
  save_checkpoint(dir / "ck.json", ck);
  SugarModel a = model_from_checkpoint(ck);
  SugarModel b = model_from_checkpoint(load_checkpoint(dir / "ck.json"));
  TaskConfig task;
  const Episode ep = generate_episode(task, 4);
  for (int t = 1; t < 200; ++t) {
    const StepTrace ta = a.step(step_inputs(ep, t));
    const StepTrace tb = b.step(step_inputs(ep, t));
    ASSERT_EQ(ta.y_act, tb.y_act) << t;
    ASSERT_EQ(ta.x_zeta, tb.x_zeta) << t;
  }
}

TEST(Checkpoint, TruncatedFileRaisesParseErrorWithOffset) {
  const std::string text = serialize_checkpoint(sample_checkpoint(Variant::B));
  const std::string cut = text.substr(0, text.size() / 2);
  try {
    parse_checkpoint(cut);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GE(e.offset(), cut.size() - 64);
    EXPECT_LE(e.offset(), cut.size() + 1);
  }
}

TEST(Checkpoint, RejectsMismatchedModel) {
  const fs::path dir = scratch_dir("mismatch");
  save_checkpoint(dir / "ck.json", sample_checkpoint(Variant::B));
  ModelConfig other;
  other.variant = Variant::C;
  EXPECT_THROW(load_checkpoint(dir / "ck.json", other), InvalidArgument);
  other.variant = Variant::B;
  other.dims.processing = 17;
  EXPECT_THROW(load_checkpoint(dir / "ck.json", other), ShapeError);
  other.dims.processing = 16;
  EXPECT_NO_THROW(load_checkpoint(dir / "ck.json", other));
}

TEST(Checkpoint, RejectsCorruptedBlocks) {
  nlohmann::json j = nlohmann::json::parse(serialize_checkpoint(sample_checkpoint(Variant::B)));
  nlohmann::json dropped = j;
  dropped["params"].erase(dropped["params"].size() - 1);
  EXPECT_THROW(parse_checkpoint(dropped.dump()), InvalidArgument);
  nlohmann::json missing = j;
  missing.erase("adam");
  EXPECT_THROW(parse_checkpoint(missing.dump()), InvalidArgument);
}

TEST(Checkpoint, MissingFileIsReported) {
  EXPECT_THROW(load_checkpoint(fs::temp_directory_path() / "sugar_no_such_file.json"),
               InvalidArgument);
}
