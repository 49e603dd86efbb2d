#pragma once

#include "sugar/model.hpp"
#include "sugar/task.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sugar {

enum class GateMode { Model, Oracle, Closed };
std::string gate_mode_name(GateMode m);

/// One test run over an episode. steps[i] predicts symbol t = i + 1, so every
/// label vector is indexed by that target time.
struct EpisodeTrace {
  int length = 0;
  std::vector<int> symbol;
  std::vector<int> problem_id;
  std::vector<int> switch_flag;
  std::vector<StepTrace> steps;

  const StepTrace& at(int t) const { return steps[static_cast<std::size_t>(t - 1)]; }
  std::vector<int> switch_times() const;
};

/// Resets the model state and runs every prediction of `ep`. Oracle forces
/// x_s = 1 on the step that predicts the first symbol of each new event and
/// x_s = 0 elsewhere; Closed pins x_zeta = 1.
EpisodeTrace run_episode(SugarModel& model, const Episode& ep, GateMode mode = GateMode::Model);

std::string trace_csv(const EpisodeTrace& trace);

inline constexpr int kProfileRadius = 5;

struct BoundaryProfile {
  std::array<double, 2 * kProfileRadius + 1> offset_mean{};  // offsets -5..+5
  std::array<int, 2 * kProfileRadius + 1> offset_count{};
  double intra_mean = 0.0;  // rows after the first switch, outside offsets {0, +1}
  double spike_mean = 0.0;  // rows at offsets {0, +1}
  double spike_ratio = 0.0;
  double max_intra_error = 0.0;
  double mean_error = 0.0;  // every row after the first switch
  int switches = 0;

  double at_offset(int offset) const { return offset_mean[static_cast<std::size_t>(offset + kProfileRadius)]; }
};

inline constexpr int kMinProfileSwitches = 30;

/// Offset-aligned error averages. Offsets count target steps from the first
/// symbol of the new event. Throws InvalidArgument with the count when the
/// traces hold fewer than `min_switches` switches.
BoundaryProfile boundary_profile(std::span<const EpisodeTrace> traces,
                                 int min_switches = kMinProfileSwitches);

struct GateStats {
  int switches = 0;
  int hits = 0;  // switches with an opening in the anticipation window
  double hit_rate = 0.0;
  int openings_in_anticipation_window = 0;
  int openings_interior = 0;
  std::vector<int> interior_openings_per_event;
  double median_interior_openings = 0.0;
};

/// The anticipation window of a switch predicting symbol s covers the steps
/// predicting s-1 and s (gate inputs observed at s-2 and s-1). Event interior
/// is every step of a complete event outside both windows.
GateStats gate_stats(std::span<const EpisodeTrace> traces);

inline constexpr int kCodeTransientSteps = 2;
inline constexpr int kMinCodeOccurrences = 10;

struct ProblemCode {
  int problem_id = 0;
  int occurrences = 0;
  Vec center;                      // mean of the per-occurrence mean codes
  double dispersion = 0.0;         // mean distance of occurrence means to center
  std::vector<Vec> occurrence_means;
};

struct LatentCodeSummary {
  std::vector<ProblemCode> problems;  // ascending problem id
  Mat pairwise;                       // distances between centers
  double min_pairwise_distance() const;
  const ProblemCode& problem(int id) const;
};

/// Per-occurrence mean x_o over steps at offsets >= 2 after each switch.
LatentCodeSummary extract_latent_codes(std::span<const EpisodeTrace> traces,
                                       int min_occurrences = kMinCodeOccurrences);

/// Dispersion of a set of occurrence means around their center.
double code_dispersion(std::span<const Vec> occurrence_means);

struct CompositionCheck {
  double dist_31 = 0.0;
  double dist_32 = 0.0;
  double projection = 0.0;  // parameter of c3's projection onto the segment c1 -> c2
  bool degenerate = false;  // c1 == c2
  bool closer_to_p1 = false;
  bool between = false;
  bool passed() const { return !degenerate && closer_to_p1 && between; }
};

CompositionCheck check_composition(const Vec& c1, const Vec& c2, const Vec& c3);

struct CompositionReport {
  std::vector<CompositionCheck> runs;
  int evaluated = 0;  // runs that were not degenerate
  int closer_passes = 0;
  int between_passes = 0;
  int full_passes = 0;
};

/// Needs codes for problems 1, 2 and 3 in every summary, at least four summaries.
CompositionReport compositional_analysis(std::span<const LatentCodeSummary> summaries);

/// Test episodes for a run, seeded from a stream disjoint from training.
std::vector<Episode> test_episodes(const TaskConfig& task, std::uint64_t seed, int count);

std::vector<EpisodeTrace> run_episodes(SugarModel& model, std::span<const Episode> episodes,
                                       GateMode mode);

/// Everything the reports need from one trained model on one test set.
struct RunEvaluation {
  BoundaryProfile model;
  BoundaryProfile oracle;
  BoundaryProfile closed;
  GateStats gates;  // gate driven by the model
  std::optional<LatentCodeSummary> codes;
  std::string codes_error;  // why codes is empty
  std::vector<EpisodeTrace> traces;  // gate driven by the model
};

RunEvaluation evaluate_run(SugarModel& model, std::span<const Episode> episodes);

/// Largest intra-event error as a multiple of the intra-event mean.
double max_intra_ratio(const BoundaryProfile& p);

struct FocusComparison {
  double b_median = 0.0;
  double c_median = 0.0;
  double c_max_intra_ratio = 0.0;
  bool fewer_openings = false;
  bool no_intra_spikes = false;  // no intra-event error above 3x the intra mean
  bool passed() const { return fewer_openings && no_intra_spikes; }
};

FocusComparison compare_focus(const RunEvaluation& b, const RunEvaluation& c);

struct StabilityComparison {
  std::vector<int> problem_ids;
  std::vector<double> b_dispersion;
  std::vector<double> c_dispersion;
  double c_min_distance = 0.0;  // smallest distance between two c codes
  bool lower_everywhere = false;
  bool compact = false;  // every c dispersion below 10% of c_min_distance
  bool passed() const { return lower_everywhere && compact; }
};

/// Both summaries must cover the same problems.
StabilityComparison compare_stability(const LatentCodeSummary& b, const LatentCodeSummary& c);

/// Always-closed baseline: x_zeta pinned to 1 on every step.
BoundaryProfile run_baseline_closed(SugarModel& model, std::span<const Episode> episodes);
/// Gate forced open exactly once per switch, on the step predicting its first symbol.
BoundaryProfile run_oracle_gate(SugarModel& model, std::span<const Episode> episodes);

}  // namespace sugar
