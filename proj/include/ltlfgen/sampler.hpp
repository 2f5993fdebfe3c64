#pragma once

// Randomized depth-first walks over a compiled automaton, and the datasets
// and curricula built from them.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ltlfgen/csp.hpp"
#include "ltlfgen/rng.hpp"
#include "ltlfgen/sfa.hpp"
#include "ltlfgen/spec.hpp"

namespace ltlfgen {

struct WalkStep {
  int from = 0;
  int transition = 0;  // index into Sfa::transitions(from)
  int to = 0;

  friend bool operator==(const WalkStep&, const WalkStep&) = default;
};

struct WalkResult {
  std::vector<WalkStep> steps;
  bool target_label = true;
  int achieved_length = 0;

  friend bool operator==(const WalkResult&, const WalkResult&) = default;
};

struct Candidate {
  int transition = 0;
  int to = 0;
  bool self_loop = false;
  bool enters_sink = false;  // edge into a sink state from another state
};

/// Encounter counters for one search, per state.
struct BiasCounters {
  std::map<int, int> self_loops;
  std::map<int, int> sinks;
};

/// Survival probability of a candidate seen for the k-th time (0-based).
double survival_probability(double rate, int k);

/// Drops candidates per the decay rules and bumps the counters.  Survivors
/// keep their relative order.  Never returns an empty list for a non-empty
/// input: if everything is pruned the input comes back unchanged.
std::vector<Candidate> apply_bias(const std::vector<Candidate>& successors, BiasCounters& counters,
                                  const BiasOptions& bias, Rng& rng);

/// `usable(from, transition index)`: false when the guard has no solutions.
using TransitionFilter = std::function<bool(int, int)>;

/// Length is drawn uniformly from the range, then the search falls back to
/// shorter lengths down to range.min.  Throws InfeasibleError.
WalkResult sample_walk(const Sfa& a, bool target, LengthRange range, const BiasOptions& bias, Rng& rng,
                       const TransitionFilter& usable = {});

/// Filter backed by the cache: a transition is usable iff its pool is non-empty.
TransitionFilter pool_filter(const Sfa& a, SolutionCache& cache);

struct SequenceSample {
  WalkResult walk;
  std::vector<SampledAssignment> steps;  // one per transition
};

struct SplitSequences {
  std::string split;
  std::vector<SequenceSample> sequences;
};

struct SamplerOptions {
  unsigned workers = 1;
};

/// Every split in declaration order.  Output depends on (spec, seed) only.
std::vector<SplitSequences> sample_sequential_dataset(const Problem& problem, SolutionCache& cache,
                                                      const SamplerOptions& options = {});

struct Episode {
  int from = 0;
  int transition = 0;
  int to = 0;
  Guard guard;                       // transition guard over the formula atoms
  std::uint32_t minterm = 0;         // active truths of the formula atoms (bit i = atoms[i])
  std::vector<std::string> orphans;  // orphans scheduled in positive form
};

struct Curriculum {
  std::vector<int> states;  // T + 1 entries
  std::vector<Episode> episodes;
  /// Orphan -> scheduled episode, -1 when it could not be placed.
  std::vector<std::pair<std::string, int>> orphan_schedule;

  std::size_t covered_orphans() const;
};

Curriculum sample_curriculum(const Problem& problem, SolutionCache& cache, Rng& rng);

struct EpisodeSample {
  SampledAssignment assignment;
  bool forced = false;  // drawn to satisfy the scheduled orphan
};

struct EpisodeSplit {
  std::string split;
  std::vector<EpisodeSample> samples;
};

/// Split sizes floor(N * f), remainder to the first split.
std::vector<std::pair<std::string, int>> episode_split_sizes(const TaskSpec& spec);

std::vector<EpisodeSplit> sample_episode(const Problem& problem, SolutionCache& cache, const Curriculum& curriculum,
                                         int episode);

/// Guard over `atoms` fixing every atom to the bit in `minterm`, plus extra
/// literals; the atom list is widened to include the extra names.
Guard pattern_guard(const std::vector<std::string>& atoms, std::uint32_t minterm, const Valuation& extra = {});

}  // namespace ltlfgen
