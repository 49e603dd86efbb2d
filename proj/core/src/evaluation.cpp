#include "sugar/evaluation.hpp"

#include "sugar/config.hpp"
#include "sugar/csv.hpp"
#include "sugar/error.hpp"
#include "sugar/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace sugar {

std::string gate_mode_name(GateMode m) {
  switch (m) {
    case GateMode::Model: return "model";
    case GateMode::Oracle: return "oracle";
    case GateMode::Closed: return "closed";
  }
  return "?";
}

std::vector<int> EpisodeTrace::switch_times() const {
  std::vector<int> out;
  for (int t = 1; t < length; ++t) {
    if (switch_flag[static_cast<std::size_t>(t)]) out.push_back(t);
  }
  return out;
}

EpisodeTrace run_episode(SugarModel& model, const Episode& ep, GateMode mode) {
  model.reset_state();
  EpisodeTrace tr;
  tr.length = ep.length;
  tr.symbol = ep.symbol_ids;
  tr.problem_id = ep.problem_id;
  tr.switch_flag = ep.switch_flag;
  tr.steps.reserve(static_cast<std::size_t>(std::max(0, ep.length - 1)));
  for (int t = 1; t < ep.length; ++t) {
    GateControl gate;
    if (mode == GateMode::Closed) {
      gate = GateControl::closed();
    } else if (mode == GateMode::Oracle) {
      gate = GateControl::forced_surprise(ep.switch_flag[static_cast<std::size_t>(t)] ? 1.0 : 0.0);
    }
    StepTrace s = model.step(step_inputs(ep, t), gate);
    s.t = t;
    tr.steps.push_back(std::move(s));
  }
  return tr;
}

std::string trace_csv(const EpisodeTrace& trace) {
  const int hs = trace.steps.empty() ? 0 : static_cast<int>(trace.steps.front().x_o.size());
  std::vector<std::string> header{"t",        "symbol",  "problem_id", "switch_flag", "error",
                                  "surprise", "x_zeta",  "gate_open"};
  for (int j = 0; j < hs; ++j) header.push_back("x_o_" + std::to_string(j));
  header.push_back("y_cf_error");
  CsvWriter csv(std::move(header));
  for (const StepTrace& s : trace.steps) {
    const auto t = static_cast<std::size_t>(s.t);
    csv.cell(s.t)
        .cell(std::string(1, symbol_char(static_cast<Symbol>(trace.symbol[t]))))
        .cell(trace.problem_id[t])
        .cell(trace.switch_flag[t])
        .cell(s.error)
        .cell(s.surprise)
        .cell(s.x_zeta)
        .cell(s.gate_open ? 1 : 0);
    for (int j = 0; j < hs; ++j) csv.cell(s.x_o(j));
    if (s.cf_error) {
      csv.cell(*s.cf_error);
    } else {
      csv.empty();
    }
    csv.end_row();
  }
  return csv.str();
}

BoundaryProfile boundary_profile(std::span<const EpisodeTrace> traces, int min_switches) {
  BoundaryProfile p;
  std::array<double, 2 * kProfileRadius + 1> sums{};
  double intra_sum = 0.0, spike_sum = 0.0, all_sum = 0.0;
  long long intra_n = 0, spike_n = 0, all_n = 0;

  for (const EpisodeTrace& tr : traces) {
    const std::vector<int> switches = tr.switch_times();
    for (int s : switches) {
      ++p.switches;
      for (int off = -kProfileRadius; off <= kProfileRadius; ++off) {
        const int t = s + off;
        if (t < 1 || t >= tr.length) continue;
        const auto k = static_cast<std::size_t>(off + kProfileRadius);
        sums[k] += tr.at(t).error;
        ++p.offset_count[k];
      }
    }
    if (switches.empty()) continue;
    std::size_t next = 0;
    int last_switch = -1;
    for (int t = switches.front(); t < tr.length; ++t) {
      while (next < switches.size() && switches[next] <= t) last_switch = switches[next++];
      const double e = tr.at(t).error;
      all_sum += e;
      ++all_n;
      if (t - last_switch <= 1) {
        spike_sum += e;
        ++spike_n;
      } else {
        intra_sum += e;
        ++intra_n;
        p.max_intra_error = std::max(p.max_intra_error, e);
      }
    }
  }

  if (p.switches < min_switches) {
    throw InvalidArgument("boundary_profile: need at least " + std::to_string(min_switches) +
                          " switches, got " + std::to_string(p.switches));
  }
  for (std::size_t k = 0; k < sums.size(); ++k) {
    p.offset_mean[k] = p.offset_count[k] ? sums[k] / p.offset_count[k]
                                         : std::numeric_limits<double>::quiet_NaN();
  }
  p.intra_mean = intra_n ? intra_sum / static_cast<double>(intra_n) : 0.0;
  p.spike_mean = spike_n ? spike_sum / static_cast<double>(spike_n) : 0.0;
  p.mean_error = all_n ? all_sum / static_cast<double>(all_n) : 0.0;
  if (p.intra_mean > 0.0) {
    p.spike_ratio = p.spike_mean / p.intra_mean;
  } else {
    p.spike_ratio = p.spike_mean > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  }
  return p;
}

GateStats gate_stats(std::span<const EpisodeTrace> traces) {
  GateStats g;
  for (const EpisodeTrace& tr : traces) {
    const std::vector<int> switches = tr.switch_times();
    for (int s : switches) {
      if (s < 2) continue;
      ++g.switches;
      const int in_window = (tr.at(s - 1).gate_open ? 1 : 0) + (tr.at(s).gate_open ? 1 : 0);
      g.openings_in_anticipation_window += in_window;
      if (in_window > 0) ++g.hits;
    }
    for (std::size_t k = 0; k + 1 < switches.size(); ++k) {
      int count = 0;
      for (int t = switches[k] + 1; t <= switches[k + 1] - 2; ++t) count += tr.at(t).gate_open ? 1 : 0;
      g.interior_openings_per_event.push_back(count);
      g.openings_interior += count;
    }
  }
  g.hit_rate = g.switches ? static_cast<double>(g.hits) / g.switches : 0.0;
  if (!g.interior_openings_per_event.empty()) {
    std::vector<int> v = g.interior_openings_per_event;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    g.median_interior_openings =
        n % 2 ? v[n / 2] : 0.5 * (static_cast<double>(v[n / 2 - 1]) + v[n / 2]);
  }
  return g;
}

double code_dispersion(std::span<const Vec> occurrence_means) {
  if (occurrence_means.empty()) return 0.0;
  Vec center = Vec::Zero(occurrence_means.front().size());
  for (const Vec& m : occurrence_means) center += m;
  center /= static_cast<double>(occurrence_means.size());
  double d = 0.0;
  for (const Vec& m : occurrence_means) d += (m - center).norm();
  return d / static_cast<double>(occurrence_means.size());
}

double LatentCodeSummary::min_pairwise_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pairwise.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pairwise.cols(); ++j) best = std::min(best, pairwise(i, j));
  }
  return best;
}

const ProblemCode& LatentCodeSummary::problem(int id) const {
  for (const auto& p : problems) {
    if (p.problem_id == id) return p;
  }
  throw InvalidArgument("no latent code for problem " + std::to_string(id));
}

LatentCodeSummary extract_latent_codes(std::span<const EpisodeTrace> traces, int min_occurrences) {
  std::map<int, std::vector<Vec>> by_problem;
  for (const EpisodeTrace& tr : traces) {
    const std::vector<int> switches = tr.switch_times();
    for (std::size_t k = 0; k < switches.size(); ++k) {
      const int begin = switches[k] + kCodeTransientSteps;
      const int end = k + 1 < switches.size() ? switches[k + 1] : tr.length;
      if (begin >= end) continue;
      Vec mean = Vec::Zero(tr.at(begin).x_o.size());
      for (int t = begin; t < end; ++t) mean += tr.at(t).x_o;
      mean /= static_cast<double>(end - begin);
      by_problem[tr.problem_id[static_cast<std::size_t>(switches[k])]].push_back(std::move(mean));
    }
  }

  LatentCodeSummary out;
  for (auto& [id, means] : by_problem) {
    if (static_cast<int>(means.size()) < min_occurrences) {
      throw InvalidArgument("extract_latent_codes: problem " + std::to_string(id) + " has " +
                            std::to_string(means.size()) + " occurrences, need " +
                            std::to_string(min_occurrences));
    }
    ProblemCode pc;
    pc.problem_id = id;
    pc.occurrences = static_cast<int>(means.size());
    pc.center = Vec::Zero(means.front().size());
    for (const Vec& m : means) pc.center += m;
    pc.center /= static_cast<double>(means.size());
    pc.dispersion = code_dispersion(means);
    pc.occurrence_means = std::move(means);
    out.problems.push_back(std::move(pc));
  }
  const auto n = static_cast<Eigen::Index>(out.problems.size());
  out.pairwise = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.pairwise(i, j) = (out.problems[static_cast<std::size_t>(i)].center -
                            out.problems[static_cast<std::size_t>(j)].center)
                               .norm();
    }
  }
  return out;
}

CompositionCheck check_composition(const Vec& c1, const Vec& c2, const Vec& c3) {
  CompositionCheck c;
  c.dist_31 = (c3 - c1).norm();
  c.dist_32 = (c3 - c2).norm();
  const Vec axis = c2 - c1;
  const double len2 = axis.squaredNorm();
  if (len2 == 0.0) {
    c.degenerate = true;
    return c;
  }
  c.projection = (c3 - c1).dot(axis) / len2;
  c.closer_to_p1 = c.dist_31 < c.dist_32;
  c.between = c.projection > 0.0 && c.projection < 1.0;
  return c;
}

CompositionReport compositional_analysis(std::span<const LatentCodeSummary> summaries) {
  if (summaries.size() < 4) {
    throw InvalidArgument("compositional_analysis: need at least 4 runs, got " +
                          std::to_string(summaries.size()));
  }
  CompositionReport r;
  for (const LatentCodeSummary& s : summaries) {
    const CompositionCheck c =
        check_composition(s.problem(1).center, s.problem(2).center, s.problem(3).center);
    r.runs.push_back(c);
    if (c.degenerate) continue;
    ++r.evaluated;
    r.closer_passes += c.closer_to_p1 ? 1 : 0;
    r.between_passes += c.between ? 1 : 0;
    r.full_passes += c.passed() ? 1 : 0;
  }
  return r;
}

std::vector<Episode> test_episodes(const TaskConfig& task, std::uint64_t seed, int count) {
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(generate_episode(task, derive_seed(seed, kTestEpisodeStream,
                                                     static_cast<std::uint64_t>(i))));
  }
  return out;
}

std::vector<EpisodeTrace> run_episodes(SugarModel& model, std::span<const Episode> episodes,
                                       GateMode mode) {
  std::vector<EpisodeTrace> out;
  out.reserve(episodes.size());
  for (const Episode& ep : episodes) out.push_back(run_episode(model, ep, mode));
  return out;
}

BoundaryProfile run_baseline_closed(SugarModel& model, std::span<const Episode> episodes) {
  return boundary_profile(run_episodes(model, episodes, GateMode::Closed));
}

BoundaryProfile run_oracle_gate(SugarModel& model, std::span<const Episode> episodes) {
  return boundary_profile(run_episodes(model, episodes, GateMode::Oracle));
}

RunEvaluation evaluate_run(SugarModel& model, std::span<const Episode> episodes) {
  RunEvaluation r;
  r.traces = run_episodes(model, episodes, GateMode::Model);
  r.model = boundary_profile(r.traces);
  r.gates = gate_stats(r.traces);
  try {
    r.codes = extract_latent_codes(r.traces);
  } catch (const InvalidArgument& e) {
    r.codes_error = e.what();
  }
  r.oracle = run_oracle_gate(model, episodes);
  r.closed = run_baseline_closed(model, episodes);
  return r;
}

double max_intra_ratio(const BoundaryProfile& p) {
  return p.intra_mean > 0.0 ? p.max_intra_error / p.intra_mean : 0.0;
}

FocusComparison compare_focus(const RunEvaluation& b, const RunEvaluation& c) {
  FocusComparison f;
  f.b_median = b.gates.median_interior_openings;
  f.c_median = c.gates.median_interior_openings;
  f.c_max_intra_ratio = max_intra_ratio(c.model);
  f.fewer_openings = f.c_median < f.b_median;
  f.no_intra_spikes = c.model.max_intra_error <= 3.0 * c.model.intra_mean;
  return f;
}

StabilityComparison compare_stability(const LatentCodeSummary& b, const LatentCodeSummary& c) {
  if (b.problems.size() != c.problems.size()) {
    throw InvalidArgument("compare_stability: runs cover different problem sets");
  }
  StabilityComparison s;
  s.c_min_distance = c.min_pairwise_distance();
  s.lower_everywhere = true;
  s.compact = true;
  for (std::size_t i = 0; i < b.problems.size(); ++i) {
    const ProblemCode& pb = b.problems[i];
    const ProblemCode& pc = c.problem(pb.problem_id);
    s.problem_ids.push_back(pb.problem_id);
    s.b_dispersion.push_back(pb.dispersion);
    s.c_dispersion.push_back(pc.dispersion);
    if (!(pc.dispersion < pb.dispersion)) s.lower_everywhere = false;
    if (!(pc.dispersion < 0.1 * s.c_min_distance)) s.compact = false;
  }
  return s;
}

}  // namespace sugar
