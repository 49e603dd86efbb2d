// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Every run here uses the default training schedule.

#include "cli.hpp"

#include "sugar/config.hpp"
#include "sugar/evaluation.hpp"
#include "sugar/model_check.hpp"
#include "sugar/training.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace sugar;
namespace fs = std::filesystem;

namespace {

// Tolerances and counts.
constexpr double kGradTolerance = 1e-4;
constexpr int kGradSeeds = 10;
constexpr int kGradSteps = 20;
constexpr double kGradSeconds = 60.0;
constexpr int kSeeds = 5;
constexpr int kMinSeedPasses = 4;
constexpr double kReactiveSpikeMin = 3.0;
constexpr double kQuietSpikeMax = 1.5;
constexpr double kHitRateMin = 0.9;
constexpr int kMinTestSwitches = 100;
constexpr int kCompositionRuns = 4;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << name << "): " << detail
            << std::endl;
  if (!pass) ++failures;
}

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Trained {
  ExperimentConfig config;
  Checkpoint checkpoint;
  std::vector<Episode> episodes;
};

Trained train_run(ExperimentConfig cfg) {
  const TrainResult r = train(cfg);
  if (r.diverged) throw std::runtime_error("training diverged: " + r.diagnostic);
  Trained t{cfg, r.checkpoint, test_episodes(cfg.test_task(), cfg.seed, cfg.test_episodes)};
  return t;
}

RunEvaluation evaluate(const Trained& t) {
  SugarModel m = model_from_checkpoint(t.checkpoint);
  RunEvaluation e = evaluate_run(m, t.episodes);
  e.traces.clear();
  return e;
}

ExperimentConfig base(Variant v, std::uint64_t seed) {
  ExperimentConfig c;
  c.variant = v;
  c.seed = seed;
  return c;
}

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int failed = 0, cfr_terms = 0, mismatches = 0;
  bool isolated = true;
  for (Variant v : {Variant::B, Variant::C}) {
    for (int s = 1; s <= kGradSeeds; ++s) {
      ModelCheckOptions opt;
      opt.variant = v;
      opt.seed = static_cast<std::uint64_t>(s);
      opt.steps = kGradSteps;
      opt.grad.tolerance = kGradTolerance;
      const ModelCheckResult r = check_model_gradients(opt);
      worst = std::max(worst, r.report.max_rel_error);
      failed += r.passed() ? 0 : 1;
      cfr_terms += r.cfr_terms;
      mismatches += r.cfr_mismatches;
      isolated = isolated && r.cfr_isolated;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(1, "gradient correctness",
         failed == 0 && mismatches == 0 && isolated && cfr_terms > 0 && secs < kGradSeconds,
         "max rel error " + num(worst, 8) + " over " + std::to_string(2 * kGradSeeds) +
             " unrolls, " + std::to_string(cfr_terms) + " counterfactual terms, " +
             std::to_string(mismatches) + " mismatches, " + num(secs, 1) + " s");
}

// Criteria 2 and 3 share the variant a runs.
void criteria_surprise() {
  int ordered = 0;
  std::ostringstream detail;
  BoundaryProfile reactive_1, informed_1;
  for (int s = 1; s <= kSeeds; ++s) {
    const Trained reactive = train_run(base(Variant::A, static_cast<std::uint64_t>(s)));
    ExperimentConfig oracle_cfg = base(Variant::A, static_cast<std::uint64_t>(s));
    oracle_cfg.train_gate = TrainGate::Oracle;
    const Trained informed = train_run(oracle_cfg);

    const RunEvaluation r = evaluate(reactive);
    SugarModel m = model_from_checkpoint(informed.checkpoint);
    const BoundaryProfile oracle = run_oracle_gate(m, informed.episodes);
    const bool ok = oracle.mean_error < r.model.mean_error && r.model.mean_error < r.closed.mean_error;
    ordered += ok ? 1 : 0;
    detail << " s" << s << ":" << num(oracle.mean_error, 3) << "<" << num(r.model.mean_error, 3)
           << "<" << num(r.closed.mean_error, 3) << (ok ? "" : "x");
    if (s == 1) {
      reactive_1 = r.model;
      informed_1 = oracle;
    }
  }
  report(2, "baseline ordering", ordered >= kMinSeedPasses,
         std::to_string(ordered) + "/" + std::to_string(kSeeds) + " seeds with oracle < a < closed;" +
             detail.str());
  report(3, "reactive spike",
         reactive_1.spike_ratio >= kReactiveSpikeMin && informed_1.spike_ratio <= kQuietSpikeMax,
         "seed 1 variant a spike ratio " + num(reactive_1.spike_ratio, 2) + " (need >= " +
             num(kReactiveSpikeMin, 1) + "), oracle-gated " + num(informed_1.spike_ratio, 2) +
             " (need <= " + num(kQuietSpikeMax, 1) + ")");
}

void criterion_anticipation() {
  ExperimentConfig cfg = base(Variant::B, 1);
  cfg.eb.kind = EbKind::Distractor;
  const RunEvaluation r = evaluate(train_run(cfg));
  report(4, "anticipation under distractors",
         r.gates.hit_rate >= kHitRateMin && r.gates.switches >= kMinTestSwitches &&
             r.model.spike_ratio <= kQuietSpikeMax,
         "hit rate " + num(r.gates.hit_rate, 3) + " over " + std::to_string(r.gates.switches) +
             " switches, spike ratio " + num(r.model.spike_ratio, 2));
}

// Criteria 5 and 6 share the paired b / c runs.
void criteria_cfr() {
  int focus = 0, stable = 0;
  std::ostringstream focus_detail, stable_detail;
  for (int s = 1; s <= kSeeds; ++s) {
    ExperimentConfig bc = base(Variant::B, static_cast<std::uint64_t>(s));
    bc.eb.kind = EbKind::Ramp;
    ExperimentConfig cc = bc;
    cc.variant = Variant::C;
    const RunEvaluation b = evaluate(train_run(bc));
    const RunEvaluation c = evaluate(train_run(cc));

    const FocusComparison f = compare_focus(b, c);
    focus += f.passed() ? 1 : 0;
    focus_detail << " s" << s << ":" << num(f.b_median, 1) << "/" << num(f.c_median, 1) << "/"
                 << num(f.c_max_intra_ratio, 1) << "x" << (f.passed() ? "" : "!");

    bool ok = false;
    if (b.codes && c.codes) {
      const StabilityComparison st = compare_stability(*b.codes, *c.codes);
      ok = st.passed();
      stable_detail << " s" << s << ":";
      for (std::size_t k = 0; k < st.problem_ids.size(); ++k) {
        stable_detail << (k ? "," : "") << num(st.b_dispersion[k], 3) << ">"
                      << num(st.c_dispersion[k], 3);
      }
      stable_detail << "|" << num(st.c_min_distance, 3) << (ok ? "" : "!");
    } else {
      stable_detail << " s" << s << ": no codes";
    }
    stable += ok ? 1 : 0;
  }
  report(5, "counterfactual focus", focus >= kMinSeedPasses,
         std::to_string(focus) + "/" + std::to_string(kSeeds) +
             " seeds (b median interior / c median interior / c max intra ratio);" +
             focus_detail.str());
  report(6, "code stability", stable >= kMinSeedPasses,
         std::to_string(stable) + "/" + std::to_string(kSeeds) +
             " seeds (b dispersion > c dispersion per problem | c code distance);" +
             stable_detail.str());
}

void criterion_composition() {
  std::vector<LatentCodeSummary> codes;
  std::string missing;
  for (int s = 1; s <= kCompositionRuns; ++s) {
    ExperimentConfig cfg = base(Variant::C, static_cast<std::uint64_t>(s));
    cfg.problems = {1, 2, 3};
    cfg.eb.kind = EbKind::Ramp;
    const RunEvaluation r = evaluate(train_run(cfg));
    if (r.codes) {
      codes.push_back(*r.codes);
    } else {
      missing += " s" + std::to_string(s) + ": " + r.codes_error;
    }
  }
  if (codes.size() < static_cast<std::size_t>(kCompositionRuns)) {
    report(7, "compositionality", false, "codes missing:" + missing);
    return;
  }
  const CompositionReport rep = compositional_analysis(codes);
  std::ostringstream detail;
  for (std::size_t k = 0; k < rep.runs.size(); ++k) {
    const CompositionCheck& c = rep.runs[k];
    detail << " s" << k + 1 << ":d31=" << num(c.dist_31, 3) << ",d32=" << num(c.dist_32, 3)
           << ",lambda=" << num(c.projection, 3) << (c.passed() ? "" : "!");
  }
  report(7, "compositionality",
         rep.evaluated == kCompositionRuns && rep.full_passes == rep.evaluated,
         std::to_string(rep.full_passes) + "/" + std::to_string(kCompositionRuns) + " runs;" +
             detail.str());
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

void criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "sugar_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  ExperimentConfig small;
  small.n_windows = 40;
  small.log_every = 10;
  small.test_episodes = 5;
  save_config(root / "small.json", small);
  const std::string cfg = (root / "small.json").string();
  const std::string run = (root / "runs" / "c").string();

  const std::vector<std::vector<std::string>> commands{
      {"gen", "--config", cfg, "--seed", "3", "--eb", "ramp", "--out", (root / "gen").string()},
      {"train", "--config", cfg, "--seed", "3", "--variant", "c", "--eb", "ramp", "--out", run},
      {"eval", "--out", run},
      {"analyze", "--runs", (root / "runs").string(), "--out", (root / "analysis").string()},
      {"gradcheck", "--variant", "c", "--seed", "3", "--steps", "10", "--out",
       (root / "gradcheck").string()},
  };

  int differing = 0, errors = 0;
  std::string which;
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& args : commands) {
      std::ostringstream out, err;
      if (cli::dispatch(args, out, err) != cli::kExitOk) {
        ++errors;
        which += " " + args[0] + " failed: " + err.str();
      }
    }
    if (pass == 0) first = snapshot(root);
  }
  const auto second = snapshot(root);
  for (const auto& [name, content] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != content) {
      ++differing;
      which += " " + name;
    }
  }
  report(8, "determinism", errors == 0 && differing == 0 && first.size() == second.size(),
         std::to_string(first.size()) + " files from " + std::to_string(commands.size()) +
             " subcommands, " + std::to_string(differing) + " differ" + which);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    criterion_gradients();
    criteria_surprise();
    criterion_anticipation();
    criteria_cfr();
    criterion_composition();
    criterion_determinism();
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << " (" << num(secs, 0) << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
