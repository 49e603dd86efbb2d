#include "sugar/task.hpp"

#include "sugar/error.hpp"

#include <algorithm>
#include <string>

namespace sugar {

char symbol_char(Symbol s) { return static_cast<char>('A' + static_cast<int>(s)); }

ProblemGraph build_problem_graph(int problem_id, const StartSymbols& starts) {
  ProblemGraph g;
  g.problem_id = problem_id;
  switch (problem_id) {
    case 1: g.cycle = {Symbol::A, Symbol::B}; break;
    case 2: g.cycle = {Symbol::B, Symbol::C}; break;
    case 3: g.cycle = {Symbol::A, Symbol::B, Symbol::C, Symbol::B}; break;
    default:
      throw InvalidArgument("problem id must be 1, 2 or 3, got " + std::to_string(problem_id));
  }
  const Symbol start = starts[problem_id - 1];
  const auto it = std::find(g.cycle.begin(), g.cycle.end(), start);
  if (it == g.cycle.end()) {
    throw InvalidArgument(std::string("start symbol ") + symbol_char(start) +
                          " does not occur in problem " + std::to_string(problem_id));
  }
  g.start_index = static_cast<std::size_t>(it - g.cycle.begin());
  return g;
}

int sample_switch_interval(Rng& rng) {
  std::uniform_int_distribution<int> dist(kMinSwitchInterval, kMaxSwitchInterval);
  return dist(rng);
}

void EbVariant::validate() const {
  if (kind == EbKind::Distractor) {
    if (n_distractors < 0) throw InvalidArgument("n_distractors must be >= 0");
  } else {
    if (ramp_channels < 1) throw InvalidArgument("ramp_channels must be >= 1");
    if (ramp_len < 1) throw InvalidArgument("ramp_len must be >= 1");
    if (ramp_len >= kMinSwitchInterval) {
      throw InvalidArgument("ramp_len " + std::to_string(ramp_len) +
                            " must be shorter than the minimum switch interval " +
                            std::to_string(kMinSwitchInterval));
    }
  }
}

void TaskConfig::validate() const {
  if (problems.size() < 2) throw InvalidArgument("task needs at least two problems");
  for (std::size_t i = 0; i < problems.size(); ++i) {
    build_problem_graph(problems[i], start_symbols);
    for (std::size_t j = 0; j < i; ++j) {
      if (problems[i] == problems[j]) throw InvalidArgument("duplicate problem id in task");
    }
  }
  if (length < 2) throw InvalidArgument("episode length must be >= 2");
  eb.validate();
}

void fill_ci_segment(Mat& ci, int begin, int end, int onset, int next_problem) {
  if (begin < 0 || end > ci.rows() || begin > end) throw InvalidArgument("CI segment out of range");
  if (next_problem < 1 || next_problem > kNumProblems) throw InvalidArgument("bad next problem id");
  ci.block(begin, 0, end - begin, ci.cols()).setZero();
  for (int t = std::max(onset, begin); t < end; ++t) ci(t, next_problem - 1) = 1.0;
}

Mat make_ci_stream(int length, std::span<const int> switch_times,
                   std::span<const int> next_problem_ids, Rng& rng, std::vector<int>* onsets) {
  if (next_problem_ids.size() != switch_times.size() + 1) {
    throw InvalidArgument("make_ci_stream: need one next-problem id per segment (" +
                          std::to_string(switch_times.size() + 1) + "), got " +
                          std::to_string(next_problem_ids.size()));
  }
  if (!std::is_sorted(switch_times.begin(), switch_times.end())) {
    throw InvalidArgument("make_ci_stream: switch times must be ascending");
  }
  Mat ci = Mat::Zero(length, kNumProblems);
  int begin = 0;
  for (std::size_t k = 0; k <= switch_times.size(); ++k) {
    const int end = k < switch_times.size() ? switch_times[k] : length;
    if (end <= begin || end > length) {
      throw InvalidArgument("make_ci_stream: switch time out of range");
    }
    // Onset strictly inside the segment. A one-step segment (possible only when
    // truncated by the episode end) gets no CI.
    int onset = end;
    if (end - begin >= 2) {
      std::uniform_int_distribution<int> dist(begin + 1, end - 1);
      onset = dist(rng);
    }
    fill_ci_segment(ci, begin, end, onset, next_problem_ids[k]);
    if (onsets) onsets->push_back(onset);
    begin = end;
  }
  return ci;
}

Mat make_eb_stream(int length, std::span<const int> switch_times, const EbVariant& variant,
                   Rng& rng) {
  variant.validate();
  Mat eb = Mat::Zero(length, variant.channels());
  if (variant.kind == EbKind::Distractor) {
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < length; ++t) {
      for (int c = 1; c <= variant.n_distractors; ++c) eb(t, c) = coin(rng) ? 1.0 : 0.0;
    }
    for (int s : switch_times) {
      if (s >= 1 && s <= length) eb(s - 1, 0) = 1.0;
    }
    return eb;
  }

  const int r = variant.ramp_len;
  const int d = variant.ramp_channels;
  for (int s : switch_times) {
    for (int c = 0; c < d; ++c) {
      // Channel onsets are spread over the first r-1 ramp steps; every channel
      // reaches 1.0 at s-1.
      const int start = s - r + (r > 1 ? (c * (r - 1)) / d : 0);
      const int span = s - start;
      for (int t = start; t < s; ++t) {
        if (t < 0 || t >= length) continue;
        eb(t, c) = static_cast<double>(t - start + 1) / span;
      }
    }
  }
  return eb;
}

Episode generate_episode(const TaskConfig& config, Rng& rng) {
  config.validate();
  const int T = config.length;
  const auto n = config.problems.size();

  Episode ep;
  ep.length = T;
  ep.symbols = Mat::Zero(T, kNumSymbols);
  ep.symbol_ids.assign(T, 0);
  ep.problem_id.assign(T, 0);
  ep.switch_flag.assign(T, 0);

  auto pick_other = [&](int current) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 2);
    std::size_t k = dist(rng);
    std::size_t cur_idx = static_cast<std::size_t>(
        std::find(config.problems.begin(), config.problems.end(), current) -
        config.problems.begin());
    if (k >= cur_idx) ++k;
    return config.problems[k];
  };

  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  int active = config.problems[first(rng)];
  std::vector<int> next_ids;

  int t = 0;
  while (t < T) {
    const int tau = sample_switch_interval(rng);
    const int next = pick_other(active);
    ep.tau_list.push_back(tau);
    next_ids.push_back(next);
    const ProblemGraph g = build_problem_graph(active, config.start_symbols);
    const int end = std::min(T, t + tau);
    for (int k = 0; t + k < end; ++k) {
      const int id = static_cast<int>(g.symbol_at(static_cast<std::size_t>(k)));
      ep.symbol_ids[t + k] = id;
      ep.symbols(t + k, id) = 1.0;
      ep.problem_id[t + k] = active;
    }
    if (t > 0) {
      ep.switch_flag[t] = 1;
      ep.switch_times.push_back(t);
    }
    t = end;
    active = next;
  }

  ep.ci = make_ci_stream(T, ep.switch_times, next_ids, rng, &ep.tau_star);
  ep.eb = make_eb_stream(T, ep.switch_times, config.eb, rng);
  return ep;
}

Episode generate_episode(const TaskConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  Episode ep = generate_episode(config, rng);
  ep.seed = seed;
  return ep;
}

}  // namespace sugar
