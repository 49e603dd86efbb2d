#include "cli.hpp"

#include "sugar/checkpoint.hpp"
#include "sugar/config.hpp"
#include "sugar/csv.hpp"
#include "sugar/error.hpp"
#include "sugar/evaluation.hpp"
#include "sugar/model_check.hpp"
#include "sugar/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <future>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace sugar::cli {

namespace {

namespace fs = std::filesystem;

/// Bad invocation: reported with usage text and exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> variant;
  std::optional<std::string> problems;
  std::optional<std::string> eb;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "experiment config (JSON)");
  sub->add_option("--seed", f.seed, "base seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--variant", f.variant, "model variant")->check(CLI::IsMember({"a", "b", "c"}));
  sub->add_option("--problems", f.problems, "problem set")->check(CLI::IsMember({"12", "123"}));
  sub->add_option("--eb", f.eb, "event boundary signal")
      ->check(CLI::IsMember({"distractor", "ramp"}));
}

/// Defaults, then the config file (or `fallback` when no --config is given
/// and it exists), then flag overrides.
ExperimentConfig resolve(const CommonFlags& f, const std::optional<fs::path>& fallback = {}) {
  ExperimentConfig cfg;
  try {
    if (!f.config.empty()) {
      if (!fs::is_regular_file(f.config)) throw UsageError("config file not found: " + f.config);
      cfg = load_config(f.config);
    } else if (fallback && fs::is_regular_file(*fallback)) {
      cfg = load_config(*fallback);
    }
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.output_dir = *f.out;
    if (f.variant) cfg.variant = parse_variant(*f.variant);
    if (f.problems) cfg.problems = parse_problem_set(*f.problems);
    if (f.eb) {
      cfg.eb.kind = parse_eb_kind(*f.eb);
      cfg.dims.eb = cfg.eb.channels();
    }
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  } catch (const ParseError& e) {
    throw UsageError(std::string("unreadable config: ") + e.what());
  }
  return cfg;
}

fs::path prepare_output(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  save_config(dir / "config.json", cfg);
  return dir;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

// ---- gen -------------------------------------------------------------------

int run_gen(const ExperimentConfig& cfg, std::ostream& out) {
  const fs::path dir = prepare_output(cfg);
  Rng rng(derive_seed(cfg.seed, kTrainEpisodeStream));
  const Episode ep = generate_episode(cfg.train_task(), rng);

  std::vector<std::string> header{"t", "symbol", "problem_id", "switch_flag"};
  for (Eigen::Index k = 0; k < ep.ci.cols(); ++k) header.push_back("ci_" + std::to_string(k));
  for (Eigen::Index k = 0; k < ep.eb.cols(); ++k) header.push_back("eb_" + std::to_string(k));
  CsvWriter csv(header);
  for (int t = 0; t < ep.length; ++t) {
    csv.cell(t)
        .cell(std::string(1, symbol_char(static_cast<Symbol>(ep.symbol_ids[static_cast<std::size_t>(t)]))))
        .cell(ep.problem_id[static_cast<std::size_t>(t)])
        .cell(ep.switch_flag[static_cast<std::size_t>(t)]);
    for (Eigen::Index k = 0; k < ep.ci.cols(); ++k) csv.cell(ep.ci(t, k));
    for (Eigen::Index k = 0; k < ep.eb.cols(); ++k) csv.cell(ep.eb(t, k));
    csv.end_row();
  }
  write_file(dir / "episode.csv", csv.str());
  out << "episode: " << ep.length << " steps, " << ep.switch_times.size() << " switches -> "
      << (dir / "episode.csv").string() << "\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

int run_train(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const fs::path dir = prepare_output(cfg);
  const TrainResult res = train(cfg);
  save_checkpoint(dir / "checkpoint.json", res.checkpoint);
  write_file(dir / "metrics.csv", metrics_csv(res.metrics));
  if (res.diverged) {
    write_file(dir / "diagnostic.txt", res.diagnostic + "\n");
    err << "training diverged after " << res.checkpoint.step_count
        << " windows: " << res.diagnostic << "\n";
    return kExitFailure;
  }
  out << "trained variant " << variant_char(cfg.variant) << " for " << res.checkpoint.step_count
      << " windows";
  if (!res.metrics.empty()) out << ", final loss " << fixed(res.metrics.back().mean_loss);
  out << " -> " << (dir / "checkpoint.json").string() << "\n";
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

void profile_rows(CsvWriter& csv, char variant, const std::string& mode, const BoundaryProfile& p) {
  for (int o = -kProfileRadius; o <= kProfileRadius; ++o) {
    csv.cell(std::string(1, variant)).cell(mode).cell(o).cell(p.at_offset(o));
    csv.cell(p.offset_count[static_cast<std::size_t>(o + kProfileRadius)]);
    csv.end_row();
  }
}

void gate_row(CsvWriter& csv, const std::string& mode, const GateStats& g) {
  csv.cell(mode).cell(g.switches).cell(g.hits).cell(g.hit_rate);
  csv.cell(g.openings_in_anticipation_window).cell(g.openings_interior);
  csv.cell(g.median_interior_openings);
  csv.end_row();
}

struct Check {
  std::string name;
  std::string value;
  bool pass = false;
};

std::vector<Check> run_checks(const ExperimentConfig& cfg, const RunEvaluation& r) {
  std::vector<Check> checks;
  auto add = [&](std::string name, std::string value, bool pass) {
    checks.push_back({std::move(name), std::move(value), pass});
  };
  add("error ordering oracle < model < closed",
      fixed(r.oracle.mean_error) + " < " + fixed(r.model.mean_error) + " < " +
          fixed(r.closed.mean_error),
      r.oracle.mean_error < r.model.mean_error && r.model.mean_error < r.closed.mean_error);
  add("oracle spike ratio <= 1.5", fixed(r.oracle.spike_ratio), r.oracle.spike_ratio <= 1.5);
  if (cfg.variant == Variant::A) {
    add("model spike ratio >= 3.0", fixed(r.model.spike_ratio), r.model.spike_ratio >= 3.0);
    return checks;
  }
  add("anticipation hit rate >= 0.9 over >= 100 switches",
      fixed(r.gates.hit_rate) + " over " + std::to_string(r.gates.switches),
      r.gates.hit_rate >= 0.9 && r.gates.switches >= 100);
  add("model spike ratio <= 1.5", fixed(r.model.spike_ratio), r.model.spike_ratio <= 1.5);
  add("max intra-event error <= 3x intra mean", fixed(max_intra_ratio(r.model)) + "x",
      r.model.max_intra_error <= 3.0 * r.model.intra_mean);
  if (r.codes) {
    double worst = 0.0;
    for (const auto& p : r.codes->problems) worst = std::max(worst, p.dispersion);
    const double dist = r.codes->min_pairwise_distance();
    add("code dispersion < 10% of code distance", fixed(worst) + " vs " + fixed(dist),
        worst < 0.1 * dist);
    if (r.codes->problems.size() == 3) {
      const CompositionCheck c = check_composition(r.codes->problem(1).center,
                                                   r.codes->problem(2).center,
                                                   r.codes->problem(3).center);
      add("problem 3 code between 1 and 2, closer to 1",
          "d31=" + fixed(c.dist_31) + " d32=" + fixed(c.dist_32) + " lambda=" + fixed(c.projection),
          c.passed());
    }
  }
  return checks;
}

std::string profile_line(const std::string& mode, const BoundaryProfile& p) {
  return mode + ": mean " + fixed(p.mean_error) + ", intra " + fixed(p.intra_mean) + ", spike " +
         fixed(p.spike_mean) + ", spike ratio " + fixed(p.spike_ratio) + "\n";
}

int run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_flag, std::ostream& out) {
  const fs::path dir = prepare_output(cfg);
  const fs::path ckpt_path =
      checkpoint_flag.empty() ? dir / "checkpoint.json" : fs::path(checkpoint_flag);
  if (!fs::is_regular_file(ckpt_path)) {
    throw std::runtime_error("no checkpoint at " + ckpt_path.string() + " (run train first)");
  }
  const Checkpoint ckpt = load_checkpoint(ckpt_path, cfg.model_config());
  SugarModel model = model_from_checkpoint(ckpt);
  const std::vector<Episode> episodes = test_episodes(cfg.test_task(), cfg.seed, cfg.test_episodes);
  const RunEvaluation r = evaluate_run(model, episodes);
  const char v = variant_char(cfg.variant);

  CsvWriter profile({"variant", "mode", "offset", "mean_error", "count"});
  profile_rows(profile, v, "model", r.model);
  profile_rows(profile, v, "oracle", r.oracle);
  profile_rows(profile, v, "closed", r.closed);
  write_file(dir / "profile.csv", profile.str());

  CsvWriter gates({"mode", "switches", "hits", "hit_rate", "openings_anticipation",
                   "openings_interior", "median_interior_openings"});
  gate_row(gates, "model", r.gates);
  gate_row(gates, "oracle", gate_stats(run_episodes(model, episodes, GateMode::Oracle)));
  write_file(dir / "gates.csv", gates.str());

  std::vector<std::string> header{"problem_id", "seed"};
  for (int j = 0; j < cfg.dims.switching; ++j) header.push_back("c_" + std::to_string(j));
  header.push_back("dispersion");
  header.push_back("occurrences");
  CsvWriter codes(header);
  if (r.codes) {
    for (const ProblemCode& p : r.codes->problems) {
      codes.cell(p.problem_id).cell(static_cast<long long>(cfg.seed));
      for (Eigen::Index j = 0; j < p.center.size(); ++j) codes.cell(p.center(j));
      codes.cell(p.dispersion).cell(p.occurrences);
      codes.end_row();
    }
  }
  write_file(dir / "codes.csv", codes.str());

  fs::create_directories(dir / "traces");
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    std::ostringstream name;
    name << "episode_" << std::setw(3) << std::setfill('0') << i << ".csv";
    write_file(dir / "traces" / name.str(), trace_csv(r.traces[i]));
  }

  std::ostringstream report;
  report << "variant " << v << ", problems ";
  for (int p : cfg.problems) report << p;
  report << ", eb " << eb_kind_name(cfg.eb.kind) << ", seed " << cfg.seed << "\n";
  report << "test set: " << episodes.size() << " episodes, " << r.model.switches << " switches\n";
  report << profile_line("model", r.model) << profile_line("oracle", r.oracle)
         << profile_line("closed", r.closed);
  report << "gate: hit rate " << fixed(r.gates.hit_rate) << ", median interior openings "
         << fixed(r.gates.median_interior_openings) << "\n";
  if (!r.codes) report << "codes: " << r.codes_error << "\n";
  report << "\n";
  for (const Check& c : run_checks(cfg, r)) {
    report << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": " << c.value << "\n";
  }
  write_file(dir / "report.txt", report.str());
  out << report.str();
  return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

struct RunSummary {
  std::string name;
  ExperimentConfig config;
  RunEvaluation eval;
};

RunSummary summarize_run(const fs::path& dir) {
  RunSummary s;
  s.name = dir.filename().string();
  s.config = load_config(dir / "config.json");
  SugarModel model =
      model_from_checkpoint(load_checkpoint(dir / "checkpoint.json", s.config.model_config()));
  const auto episodes = test_episodes(s.config.test_task(), s.config.seed, s.config.test_episodes);
  s.eval = evaluate_run(model, episodes);
  s.eval.traces.clear();
  return s;
}

bool same_problems(const ExperimentConfig& c, std::initializer_list<int> ids) {
  return c.problems == std::vector<int>(ids);
}

int run_analyze(const ExperimentConfig& cfg, const std::string& runs_flag, std::ostream& out) {
  const fs::path runs_dir = runs_flag.empty() ? fs::path(cfg.output_dir) : fs::path(runs_flag);
  if (!fs::is_directory(runs_dir)) throw std::runtime_error("not a directory: " + runs_dir.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "config.json") &&
        fs::is_regular_file(entry.path() / "checkpoint.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw std::runtime_error("no trained runs under " + runs_dir.string());

  std::vector<std::future<RunSummary>> jobs;
  for (const fs::path& d : dirs) jobs.push_back(std::async(std::launch::async, summarize_run, d));
  std::vector<RunSummary> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  const fs::path dir = prepare_output(cfg);
  std::ostringstream summary;

  CsvWriter runs_csv({"run", "variant", "problems", "eb", "seed", "mean_error", "spike_ratio",
                      "oracle_mean_error", "closed_mean_error", "hit_rate",
                      "median_interior_openings", "max_intra_ratio"});
  for (const RunSummary& r : runs) {
    std::string probs;
    for (int p : r.config.problems) probs += std::to_string(p);
    runs_csv.cell(r.name).cell(std::string(1, variant_char(r.config.variant))).cell(probs);
    runs_csv.cell(eb_kind_name(r.config.eb.kind)).cell(static_cast<long long>(r.config.seed));
    runs_csv.cell(r.eval.model.mean_error).cell(r.eval.model.spike_ratio);
    runs_csv.cell(r.eval.oracle.mean_error).cell(r.eval.closed.mean_error);
    runs_csv.cell(r.eval.gates.hit_rate).cell(r.eval.gates.median_interior_openings);
    runs_csv.cell(max_intra_ratio(r.eval.model));
    runs_csv.end_row();
  }
  write_file(dir / "runs.csv", runs_csv.str());
  summary << runs.size() << " runs under " << runs_dir.string() << "\n";

  // compositionality: variant c on problems 1-3
  CsvWriter comp({"run", "seed", "dist_31", "dist_32", "projection", "closer_to_p1", "between",
                  "pass"});
  std::vector<LatentCodeSummary> comp_codes;
  for (const RunSummary& r : runs) {
    if (r.config.variant != Variant::C || !same_problems(r.config, {1, 2, 3}) || !r.eval.codes) {
      continue;
    }
    const LatentCodeSummary& c = *r.eval.codes;
    const CompositionCheck k =
        check_composition(c.problem(1).center, c.problem(2).center, c.problem(3).center);
    comp.cell(r.name).cell(static_cast<long long>(r.config.seed)).cell(k.dist_31).cell(k.dist_32);
    comp.cell(k.projection).cell(k.closer_to_p1 ? 1 : 0).cell(k.between ? 1 : 0);
    comp.cell(k.passed() ? 1 : 0);
    comp.end_row();
    comp_codes.push_back(c);
  }
  write_file(dir / "composition.csv", comp.str());
  if (comp_codes.size() >= 4) {
    const CompositionReport rep = compositional_analysis(comp_codes);
    summary << "composition: " << rep.full_passes << "/" << rep.evaluated
            << " runs place problem 3 between 1 and 2 and closer to 1 ("
            << (rep.full_passes == rep.evaluated ? "PASS" : "FAIL") << ")\n";
  } else {
    summary << "composition: " << comp_codes.size()
            << " variant c runs on problems 1-3, need at least 4\n";
  }

  // CFR: variant b against variant c on problems 1+2, paired by seed and EB signal
  CsvWriter pairs({"seed", "eb", "b_median_interior", "c_median_interior", "c_max_intra_ratio",
                   "focus_pass", "b_max_dispersion", "c_max_dispersion", "c_min_distance",
                   "stability_pass"});
  int n_pairs = 0, focus = 0, stable = 0;
  for (const RunSummary& b : runs) {
    if (b.config.variant != Variant::B || !same_problems(b.config, {1, 2})) continue;
    for (const RunSummary& c : runs) {
      if (c.config.variant != Variant::C || !same_problems(c.config, {1, 2}) ||
          c.config.seed != b.config.seed || c.config.eb.kind != b.config.eb.kind) {
        continue;
      }
      const FocusComparison f = compare_focus(b.eval, c.eval);
      pairs.cell(static_cast<long long>(b.config.seed)).cell(eb_kind_name(b.config.eb.kind));
      pairs.cell(f.b_median).cell(f.c_median).cell(f.c_max_intra_ratio).cell(f.passed() ? 1 : 0);
      bool stability = false;
      if (b.eval.codes && c.eval.codes) {
        const StabilityComparison s = compare_stability(*b.eval.codes, *c.eval.codes);
        pairs.cell(*std::max_element(s.b_dispersion.begin(), s.b_dispersion.end()));
        pairs.cell(*std::max_element(s.c_dispersion.begin(), s.c_dispersion.end()));
        pairs.cell(s.c_min_distance);
        stability = s.passed();
      } else {
        pairs.empty().empty().empty();
      }
      pairs.cell(stability ? 1 : 0);
      pairs.end_row();
      ++n_pairs;
      focus += f.passed() ? 1 : 0;
      stable += stability ? 1 : 0;
    }
  }
  write_file(dir / "cfr_comparison.csv", pairs.str());
  summary << "cfr focus: " << focus << "/" << n_pairs << " paired seeds\n";
  summary << "code stability: " << stable << "/" << n_pairs << " paired seeds\n";

  write_file(dir / "summary.txt", summary.str());
  out << summary.str();
  return kExitOk;
}

// ---- gradcheck -------------------------------------------------------------

int run_gradcheck(const ExperimentConfig& cfg, int steps, std::ostream& out) {
  const fs::path dir = prepare_output(cfg);
  ModelCheckOptions opt;
  opt.variant = cfg.variant;
  opt.seed = cfg.seed;
  opt.steps = steps;
  const ModelCheckResult r = check_model_gradients(opt);

  std::ostringstream text;
  text << "variant " << variant_char(cfg.variant) << ", seed " << cfg.seed << ", " << steps
       << " steps, " << r.open_gates << " open gates\n";
  for (const BlockCheck& b : r.report.blocks) {
    text << "  " << std::left << std::setw(20) << b.name << " " << fixed(b.max_rel_error, 3)
         << "\n";
  }
  text << "max relative error: " << fixed(r.report.max_rel_error, 6) << " (tolerance "
       << fixed(r.report.tolerance) << ")\n";
  if (cfg.variant == Variant::C) {
    text << "counterfactual terms: " << r.cfr_terms << ", mismatches " << r.cfr_mismatches
         << (r.cfr_isolated ? "" : ", leaked outside the boundary blocks") << "\n";
  }
  text << (r.passed() ? "PASS" : "FAIL") << "\n";
  write_file(dir / "gradcheck.txt", text.str());
  out << text.str();
  return r.passed() ? kExitOk : kExitFailure;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Surprise-gated recurrent network experiments", "sugar"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string checkpoint;
  std::string runs;
  int steps = 20;

  CLI::App* gen = app.add_subcommand("gen", "write one generated training episode");
  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained model on fresh test episodes");
  CLI::App* analyze = app.add_subcommand("analyze", "compare trained runs across seeds");
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "check BPTT against finite differences");
  for (CLI::App* sub : {gen, train_cmd, eval, analyze, gradcheck}) add_common(sub, flags);
  eval->add_option("--checkpoint", checkpoint, "checkpoint (default <out>/checkpoint.json)");
  analyze->add_option("--runs", runs, "directory holding one subdirectory per run (default <out>)");
  gradcheck->add_option("--steps", steps, "unrolled steps")->check(CLI::Range(1, 1000));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return run_gen(resolve(flags), out);
    if (train_cmd->parsed()) return run_train(resolve(flags), out, err);
    if (eval->parsed()) {
      const fs::path snapshot = fs::path(flags.out.value_or("out")) / "config.json";
      return run_eval(resolve(flags, snapshot), checkpoint, out);
    }
    if (analyze->parsed()) return run_analyze(resolve(flags), runs, out);
    if (gradcheck->parsed()) return run_gradcheck(resolve(flags), steps, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sugar::cli
