#pragma once

#include "sugar/tensor.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sugar {

using Rng = std::mt19937_64;

inline constexpr int kNumSymbols = 3;   // A, B, C
inline constexpr int kNumProblems = 3;  // one-hot width of the CI channel
inline constexpr int kMinSwitchInterval = 10;
inline constexpr int kMaxSwitchInterval = 30;

enum class Symbol : int { A = 0, B = 1, C = 2 };

char symbol_char(Symbol s);

struct ProblemGraph {
  int problem_id = 0;          // 1-based
  std::vector<Symbol> cycle;   // one period of the generated sequence
  std::size_t start_index = 0; // where each occurrence of the problem begins

  Symbol start_symbol() const { return cycle[start_index]; }
  /// Symbol emitted `step` steps after the problem became active.
  Symbol symbol_at(std::size_t step) const { return cycle[(start_index + step) % cycle.size()]; }
};

/// Start symbol per problem id (1..3). Defaults: A, B, A.
using StartSymbols = std::array<Symbol, kNumProblems>;
inline constexpr StartSymbols kDefaultStartSymbols{Symbol::A, Symbol::B, Symbol::A};

ProblemGraph build_problem_graph(int problem_id, const StartSymbols& starts = kDefaultStartSymbols);

int sample_switch_interval(Rng& rng);

enum class EbKind { Distractor, Ramp };

struct EbVariant {
  EbKind kind = EbKind::Distractor;
  int n_distractors = 3;  // Distractor: channels 1..n_distractors are coin flips
  int ramp_channels = 4;  // Ramp: number of staggered ramp channels
  int ramp_len = 5;       // Ramp: steps over which channels rise before a switch

  int channels() const { return kind == EbKind::Distractor ? 1 + n_distractors : ramp_channels; }
  void validate() const;
};

struct TaskConfig {
  std::vector<int> problems{1, 2};
  int length = 1000;
  EbVariant eb;
  StartSymbols start_symbols = kDefaultStartSymbols;

  void validate() const;
};

struct Episode {
  int length = 0;
  Mat symbols;                   // T x 3 one-hot
  std::vector<int> symbol_ids;   // T
  std::vector<int> problem_id;   // T, 1-based
  std::vector<int> switch_flag;  // T, 1 at the first step of every new problem after t=0
  Mat ci;                        // T x 3
  Mat eb;                        // T x eb channels
  std::vector<int> tau_list;     // sampled interval of each segment, last may be truncated by T
  std::vector<int> tau_star;     // absolute CI onset per segment
  std::vector<int> switch_times; // t with switch_flag[t] == 1
  std::uint64_t seed = 0;
};

/// Writes rows [begin, end) of `ci`: zero before `onset`, one-hot of `next_problem` from it.
void fill_ci_segment(Mat& ci, int begin, int end, int onset, int next_problem);

/// One CI onset per segment, drawn uniformly from the open interval (segment start, segment end).
/// Segments are [0, s_0), [s_0, s_1), ..., [s_last, length); `next_problem_ids` needs one entry
/// per segment. Returns the T x 3 stream; onsets are appended to `onsets` when non-null.
Mat make_ci_stream(int length, std::span<const int> switch_times,
                   std::span<const int> next_problem_ids, Rng& rng,
                   std::vector<int>* onsets = nullptr);

Mat make_eb_stream(int length, std::span<const int> switch_times, const EbVariant& variant,
                   Rng& rng);

Episode generate_episode(const TaskConfig& config, Rng& rng);

/// Convenience: seeds an mt19937_64 and records the seed on the episode.
Episode generate_episode(const TaskConfig& config, std::uint64_t seed);

}  // namespace sugar
