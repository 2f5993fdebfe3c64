#include "ltlfgen/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <exception>
#include <set>
#include <thread>

#include "ltlfgen/error.hpp"

namespace ltlfgen {

double survival_probability(double rate, int k) {
  if (rate <= 0.0) return 1.0;
  return std::clamp(static_cast<double>(k) * rate, 0.0, 1.0);
}

std::vector<Candidate> apply_bias(const std::vector<Candidate>& successors, BiasCounters& counters,
                                  const BiasOptions& bias, Rng& rng) {
  std::vector<Candidate> kept;
  kept.reserve(successors.size());
  for (const auto& c : successors) {
    double p = 1.0;
    if (c.self_loop && bias.self_loop_decay > 0) p = survival_probability(bias.self_loop_decay, counters.self_loops[c.to]++);
    else if (c.enters_sink && bias.sink_decay > 0) p = survival_probability(bias.sink_decay, counters.sinks[c.to]++);
    if (rng.bernoulli(p)) kept.push_back(c);
  }
  if (kept.empty()) return successors;
  return kept;
}

namespace {

class WalkSearch {
 public:
  WalkSearch(const Sfa& a, bool target, const BiasOptions& bias, Rng& rng, const std::vector<std::vector<Candidate>>& cands)
      : a_(a), target_(target), bias_(bias), rng_(rng), cands_(cands) {}

  bool run(int length) {
    path_.clear();
    return go(a_.initial(), length);
  }
  const std::vector<WalkStep>& path() const { return path_; }

 private:
  bool go(int state, int remaining) {
    if (remaining == 0) return a_.is_accepting(state) == target_;
    if (dead_.count({state, remaining})) return false;
    const auto& all = cands_[state];
    std::vector<Candidate> first = apply_bias(all, counters_, bias_, rng_);
    std::vector<Candidate> rest;
    for (const auto& c : all)
      if (std::none_of(first.begin(), first.end(), [&](const Candidate& k) { return k.transition == c.transition; }))
        rest.push_back(c);
    rng_.shuffle(first);
    rng_.shuffle(rest);
    // Pruned candidates are retried last so the search stays complete.
    first.insert(first.end(), rest.begin(), rest.end());
    for (const auto& c : first) {
      path_.push_back({state, c.transition, c.to});
      if (go(c.to, remaining - 1)) return true;
      path_.pop_back();
    }
    dead_.insert({state, remaining});
    return false;
  }

  const Sfa& a_;
  bool target_;
  const BiasOptions& bias_;
  Rng& rng_;
  const std::vector<std::vector<Candidate>>& cands_;
  std::set<std::pair<int, int>> dead_;
  BiasCounters counters_;
  std::vector<WalkStep> path_;
};

}  // namespace

WalkResult sample_walk(const Sfa& a, bool target, LengthRange range, const BiasOptions& bias, Rng& rng,
                       const TransitionFilter& usable) {
  if (range.min < 1 || range.min > range.max) throw ValidationError("walk length range must satisfy 1 <= min <= max");
  std::vector<std::vector<Candidate>> cands(a.num_states());
  for (int s = 0; s < a.num_states(); ++s) {
    const auto& ts = a.transitions(s);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (usable && !usable(s, static_cast<int>(i))) continue;
      const int to = ts[i].to;
      cands[s].push_back({static_cast<int>(i), to, to == s, to != s && a.is_sink(to)});
    }
  }
  const int drawn = range.min + static_cast<int>(rng.uniform(static_cast<std::uint64_t>(range.max - range.min) + 1));
  for (int len = drawn; len >= range.min; --len) {
    WalkSearch search(a, target, bias, rng, cands);
    if (search.run(len)) {
      WalkResult w;
      w.steps = search.path();
      w.target_label = target;
      w.achieved_length = len;
      return w;
    }
  }
  throw InfeasibleError(std::string("no ") + (target ? "positive" : "negative") + " walk with length in [" +
                        std::to_string(range.min) + ", " + std::to_string(drawn) + "]");
}

TransitionFilter pool_filter(const Sfa& a, SolutionCache& cache) {
  return [&a, &cache](int from, int t) { return !cache.get(a.transitions(from)[t].guard)->empty(); };
}

namespace {

// Runs job(i) for i in [0, n) on up to `workers` threads; rethrows the
// exception of the lowest failing index so failures are deterministic too.
template <class Job>
void parallel_for(std::size_t n, unsigned workers, Job job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (k == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < k; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<SplitSequences> sample_sequential_dataset(const Problem& problem, SolutionCache& cache,
                                                      const SamplerOptions& options) {
  const TaskSpec& spec = problem.spec;
  if (spec.mode != Mode::Sequential) throw ValidationError("sequential sampling needs a sequential specification");
  const Sfa& a = problem.automaton;
  const TransitionFilter usable = pool_filter(a, cache);

  std::vector<SplitSequences> out;
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (const auto& [split, n] : spec.counts) {
    out.push_back({split, std::vector<SequenceSample>(n)});
    for (int i = 0; i < n; ++i) jobs.emplace_back(out.size() - 1, i);
  }
  parallel_for(jobs.size(), options.workers, [&](std::size_t j) {
    const auto [s, i] = jobs[j];
    Rng rng = Rng::derive(spec.seed, "sequence/" + out[s].split, i);
    const bool target = spec.balance == Balance::AllPositive || i % 2 == 0;
    SequenceSample& seq = out[s].sequences[i];
    seq.walk = sample_walk(a, target, spec.length, spec.bias, rng, usable);
    for (const auto& st : seq.walk.steps) {
      auto pool = cache.get(a.transitions(st.from)[st.transition].guard);
      seq.steps.push_back(sample_from_pool(*pool, problem.model, rng));
    }
  });
  return out;
}

std::size_t Curriculum::covered_orphans() const {
  return static_cast<std::size_t>(
      std::count_if(orphan_schedule.begin(), orphan_schedule.end(), [](const auto& o) { return o.second >= 0; }));
}

Guard pattern_guard(const std::vector<std::string>& atoms, std::uint32_t minterm, const Valuation& extra) {
  Valuation lits = extra;
  for (std::size_t i = 0; i < atoms.size(); ++i) lits[atoms[i]] = (minterm >> i) & 1u;
  std::vector<std::string> all;
  for (const auto& [name, v] : lits) all.push_back(name);
  return Guard::cube(std::move(all), lits);
}

namespace {

// Maximum matching of orphans to episodes (at most one orphan per episode),
// augmenting paths tried earliest episode first.
std::vector<int> match_orphans(const std::vector<std::vector<bool>>& can, std::size_t episodes) {
  std::vector<int> owner(episodes, -1);
  std::vector<bool> seen;
  std::function<bool(int)> augment = [&](int o) {
    for (std::size_t e = 0; e < episodes; ++e) {
      if (!can[o][e] || seen[e]) continue;
      seen[e] = true;
      if (owner[e] < 0 || augment(owner[e])) {
        owner[e] = o;
        return true;
      }
    }
    return false;
  };
  for (std::size_t o = 0; o < can.size(); ++o) {
    seen.assign(episodes, false);
    augment(static_cast<int>(o));
  }
  std::vector<int> episode_of(can.size(), -1);
  for (std::size_t e = 0; e < episodes; ++e)
    if (owner[e] >= 0) episode_of[owner[e]] = static_cast<int>(e);
  return episode_of;
}

}  // namespace

Curriculum sample_curriculum(const Problem& problem, SolutionCache& cache, Rng& rng) {
  const TaskSpec& spec = problem.spec;
  if (spec.mode != Mode::Incremental) throw ValidationError("curriculum sampling needs an incremental specification");
  const Sfa& a = problem.automaton;
  const auto& atoms = problem.atoms;
  const TransitionFilter usable = pool_filter(a, cache);
  const bool schedule = spec.bias.orphan_coverage == OrphanCoverage::BestEffort && !problem.orphans.empty();
  const int attempts = schedule ? 32 : 1;

  auto feasible = [&](const Guard& g) { return !cache.get(g)->empty(); };

  Curriculum best;
  std::vector<std::vector<std::uint32_t>> best_options;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    WalkResult w = sample_walk(a, true, {spec.episodes, spec.episodes}, spec.bias, rng, usable);
    Curriculum c;
    c.states.push_back(a.initial());
    std::vector<std::vector<std::uint32_t>> options;
    for (const auto& st : w.steps) {
      Episode e;
      e.from = st.from;
      e.transition = st.transition;
      e.to = st.to;
      e.guard = a.transitions(st.from)[st.transition].guard;
      std::vector<std::uint32_t> ms;
      for (auto m : e.guard.minterms())
        if (feasible(pattern_guard(atoms, m))) ms.push_back(m);
      options.push_back(std::move(ms));
      c.states.push_back(st.to);
      c.episodes.push_back(std::move(e));
    }
    for (const auto& o : problem.orphans) c.orphan_schedule.emplace_back(o, -1);
    if (schedule) {
      std::vector<std::vector<bool>> can(problem.orphans.size(), std::vector<bool>(c.episodes.size(), false));
      for (std::size_t o = 0; o < problem.orphans.size(); ++o)
        for (std::size_t e = 0; e < c.episodes.size(); ++e)
          for (auto m : options[e])
            if (feasible(pattern_guard(atoms, m, {{problem.orphans[o], true}}))) {
              can[o][e] = true;
              break;
            }
      const auto episode_of = match_orphans(can, c.episodes.size());
      for (std::size_t o = 0; o < episode_of.size(); ++o) c.orphan_schedule[o].second = episode_of[o];
    }
    if (attempt == 0 || c.covered_orphans() > best.covered_orphans()) {
      best = std::move(c);
      best_options = std::move(options);
    }
    if (best.covered_orphans() == problem.orphans.size()) break;
  }

  for (const auto& [orphan, e] : best.orphan_schedule)
    if (e >= 0) best.episodes[e].orphans.push_back(orphan);
  for (std::size_t e = 0; e < best.episodes.size(); ++e) {
    Episode& ep = best.episodes[e];
    std::vector<std::uint32_t> ms = best_options[e];
    if (!ep.orphans.empty()) {
      std::erase_if(ms, [&](std::uint32_t m) { return !feasible(pattern_guard(atoms, m, {{ep.orphans[0], true}})); });
    }
    ep.minterm = rng.pick(ms);
  }
  return best;
}

std::vector<std::pair<std::string, int>> episode_split_sizes(const TaskSpec& spec) {
  std::vector<std::pair<std::string, int>> out;
  int used = 0;
  for (const auto& [split, f] : spec.split_fractions) {
    const int n = static_cast<int>(std::floor(spec.samples_per_episode * f + 1e-9));
    out.emplace_back(split, n);
    used += n;
  }
  if (!out.empty()) out.front().second += spec.samples_per_episode - used;
  return out;
}

std::vector<EpisodeSplit> sample_episode(const Problem& problem, SolutionCache& cache, const Curriculum& curriculum,
                                         int episode) {
  const TaskSpec& spec = problem.spec;
  const Episode& ep = curriculum.episodes.at(episode);
  Rng rng = Rng::derive(spec.seed, "episode", static_cast<std::uint64_t>(episode));
  auto base = cache.get(pattern_guard(problem.atoms, ep.minterm));
  std::shared_ptr<const SolutionPool> positive, negative;
  if (!ep.orphans.empty()) {
    positive = cache.get(pattern_guard(problem.atoms, ep.minterm, {{ep.orphans[0], true}}));
    negative = cache.get(pattern_guard(problem.atoms, ep.minterm, {{ep.orphans[0], false}}));
    if (negative->empty()) negative = base;
  }
  std::vector<EpisodeSplit> out;
  for (const auto& [split, n] : episode_split_sizes(spec)) {
    EpisodeSplit s{split, {}};
    for (int i = 0; i < n; ++i) {
      EpisodeSample sample;
      const SolutionPool* pool = base.get();
      if (positive) {
        sample.forced = rng.bernoulli(spec.orphan_positive_ratio);
        pool = sample.forced ? positive.get() : negative.get();
      }
      sample.assignment = sample_from_pool(*pool, problem.model, rng);
      s.samples.push_back(std::move(sample));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ltlfgen
