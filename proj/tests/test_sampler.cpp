#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "ltlfgen/error.hpp"
#include "ltlfgen/sampler.hpp"
#include "oracle.hpp"

using namespace ltlfgen;

namespace {

Sfa compile_text(const std::string& f, std::vector<std::string> atoms) {
  CompileOptions o;
  o.extra_atoms = std::move(atoms);
  return compile(parse_formula(f), o);
}

// A letter of every step's guard, chosen by the rng.
std::vector<std::uint32_t> letters_of(const Sfa& a, const WalkResult& w, Rng& rng) {
  std::vector<std::uint32_t> out;
  for (const auto& s : w.steps) out.push_back(rng.pick(a.transitions(s.from)[s.transition].guard.minterms()));
  return out;
}

Trace to_trace(const std::vector<std::string>& atoms, const std::vector<std::uint32_t>& letters) {
  Trace t;
  for (auto l : letters) {
    Valuation v;
    for (std::size_t i = 0; i < atoms.size(); ++i) v[atoms[i]] = (l >> i) & 1u;
    t.push_back(v);
  }
  return t;
}

bool connected(const Sfa& a, const WalkResult& w) {
  int s = a.initial();
  for (const auto& st : w.steps) {
    if (st.from != s || a.transitions(s).at(st.transition).to != st.to) return false;
    s = st.to;
  }
  return a.is_accepting(s) == w.target_label;
}

// Constraint truths of the formula atoms for each sampled assignment.
Trace truth_trace(const Problem& p, const std::vector<const SampledAssignment*>& steps) {
  Trace t;
  for (const auto* s : steps) {
    Valuation v;
    for (const auto& atom : p.atoms) v[atom] = s->truths[p.model.constraint_index(atom)];
    t.push_back(v);
  }
  return t;
}

}  // namespace

TEST_CASE("survival probability is a clamped linear ramp") {
  CHECK(survival_probability(0.1, 0) == 0.0);
  CHECK(survival_probability(0.1, 3) == doctest::Approx(0.3));
  CHECK(survival_probability(0.1, 10) == 1.0);
  CHECK(survival_probability(0.1, 50) == 1.0);
  CHECK(survival_probability(0.0, 0) == 1.0);
}

TEST_CASE("bias pruning") {
  Rng rng(1);
  const std::vector<Candidate> cands = {{0, 0, true, false}, {1, 1, false, false}, {2, 2, false, true}};
  BiasOptions off;
  BiasCounters counters;
  CHECK(apply_bias(cands, counters, off, rng).size() == 3);
  CHECK(counters.self_loops.empty());

  BiasOptions on;
  on.self_loop_decay = 0.1;
  on.sink_decay = 0.01;
  auto kept = apply_bias(cands, counters, on, rng);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].transition == 1);
  CHECK(counters.self_loops.at(0) == 1);
  CHECK(counters.sinks.at(2) == 1);

  // Nothing survives: the input comes back unchanged.
  BiasCounters fresh;
  const std::vector<Candidate> loops = {{0, 0, true, false}, {1, 3, false, true}};
  const auto all = apply_bias(loops, fresh, on, rng);
  CHECK(all.size() == 2);
  CHECK(fresh.self_loops.at(0) == 1);

  // After ten encounters a self-loop always survives.
  BiasCounters warm;
  warm.self_loops[0] = 10;
  for (int i = 0; i < 20; ++i) CHECK(apply_bias(cands, warm, on, rng).front().self_loop);
}

TEST_CASE("walks on the running-example automaton") {
  const std::vector<std::string> pqr = {"p", "q", "r"};
  const Formula f = parse_formula("F r & ((p <-> X q) U r)");
  const Sfa a = compile_text("F r & ((p <-> X q) U r)", pqr);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const WalkResult w = sample_walk(a, true, {5, 5}, {}, rng);
    CHECK(w.steps.size() == 5);
    CHECK(w.achieved_length == 5);
    CHECK(connected(a, w));
    CHECK(eval_trace(f, to_trace(pqr, letters_of(a, w, rng))));
    const WalkResult n = sample_walk(a, false, {1, 7}, {0.1, 0.01, OrphanCoverage::Off}, rng);
    CHECK(connected(a, n));
    CHECK_FALSE(eval_trace(f, to_trace(pqr, letters_of(a, n, rng))));
  }
}

TEST_CASE("negatives and infeasibility") {
  const Sfa g = compile_text("G p", {"p"});
  Rng rng(2);
  const WalkResult w = sample_walk(g, false, {3, 3}, {}, rng);
  CHECK(w.achieved_length == 3);
  CHECK_FALSE(g.is_accepting(w.steps.back().to));
  const Sfa t = compile_text("true", {"p"});
  CHECK_THROWS_WITH_AS(sample_walk(t, false, {2, 2}, {}, rng), "no negative walk with length in [2, 2]", InfeasibleError);
  CHECK_THROWS_AS(sample_walk(t, true, {0, 2}, {}, rng), ValidationError);
}

TEST_CASE("length falls back towards the minimum") {
  // Only traces of length at most two are accepted.
  const Sfa a = compile_text("WX WX false", {"p"});
  std::set<int> lengths;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const WalkResult w = sample_walk(a, true, {1, 6}, {}, rng);
    CHECK(w.achieved_length <= 2);
    CHECK(w.achieved_length >= 1);
    CHECK(connected(a, w));
    lengths.insert(w.achieved_length);
  }
  CHECK(lengths == std::set<int>{1, 2});
  Rng rng(0);
  CHECK_THROWS_AS(sample_walk(a, true, {3, 6}, {}, rng), InfeasibleError);
}

TEST_CASE("walk feasibility agrees with the suffix oracle") {
  std::mt19937_64 gen(17);
  const std::vector<std::string> atoms = {"a", "b"};
  for (int i = 0; i < 60; ++i) {
    const Formula f = oracle::random_formula(gen, atoms, 3);
    const Sfa a = compile(f, {4096, atoms});
    const oracle::SuffixTable table(f, atoms, 4);
    for (int n = 1; n <= 4; ++n) {
      std::uint64_t pos = 0;
      for (std::uint64_t w = 0; w < table.count(n); ++w) pos += table.holds(n, w);
      for (bool target : {true, false}) {
        const bool exists = target ? pos > 0 : pos < table.count(n);
        Rng rng(static_cast<std::uint64_t>(i * 10 + n));
        try {
          const WalkResult w = sample_walk(a, target, {n, n}, {0.1, 0.01, OrphanCoverage::Off}, rng);
          CHECK_MESSAGE(exists, to_string(f));
          CHECK(connected(a, w));
          const auto letters = letters_of(a, w, rng);
          std::uint64_t index = 0;
          for (std::size_t k = letters.size(); k-- > 0;) index = index * 4 + letters[k];
          CHECK(table.holds(n, index) == target);
        } catch (const InfeasibleError&) {
          CHECK_MESSAGE(!exists, to_string(f));
        }
      }
    }
  }
}

TEST_CASE("self-loop decay changes how long loops persist") {
  // Two states, each with a self-loop and an edge to the other.
  const Sfa a = compile_text("F (p & WX false)", {"p"});
  REQUIRE(a.num_states() == 2);
  auto mean_loops = [&](double rate) {
    double total = 0;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      Rng rng(seed);
      const WalkResult w = sample_walk(a, true, {20, 20}, {rate, 0.0, OrphanCoverage::Off}, rng);
      total += static_cast<double>(std::count_if(w.steps.begin(), w.steps.end(), [](const WalkStep& s) {
        return s.from == s.to;
      }));
    }
    return total / 400;
  };
  const double none = mean_loops(0.0), slow = mean_loops(0.02), fast = mean_loops(0.2);
  CHECK(slow < fast);
  CHECK(fast < none);
  CHECK(none == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("sequential datasets") {
  const Problem p = resolve(*bundled_task("task3_short"));
  SolutionCache cache(p.model);
  const auto data = sample_sequential_dataset(p, cache);
  REQUIRE(data.size() == 3);
  CHECK(data[0].sequences.size() == 320);
  CHECK(data[1].sequences.size() == 40);
  CHECK(data[2].sequences.size() == 40);
  for (const auto& split : data) {
    std::size_t positives = 0;
    for (const auto& s : split.sequences) {
      positives += s.walk.target_label;
      CHECK(s.walk.achieved_length >= 10);
      CHECK(s.walk.achieved_length <= 20);
      CHECK(s.steps.size() == s.walk.steps.size());
      CHECK(connected(p.automaton, s.walk));
      std::vector<const SampledAssignment*> ptrs;
      for (const auto& st : s.steps) ptrs.push_back(&st);
      CHECK(eval_trace(p.formula, truth_trace(p, ptrs)) == s.walk.target_label);
    }
    CHECK(positives == (split.sequences.size() + 1) / 2);
  }

  SolutionCache other(p.model);
  const auto again = sample_sequential_dataset(p, other, {4});
  for (std::size_t s = 0; s < data.size(); ++s)
    for (std::size_t i = 0; i < data[s].sequences.size(); ++i) {
      CHECK(again[s].sequences[i].walk == data[s].sequences[i].walk);
      for (std::size_t k = 0; k < data[s].sequences[i].steps.size(); ++k)
        CHECK(again[s].sequences[i].steps[k].values == data[s].sequences[i].steps[k].values);
    }
}

TEST_CASE("all-positive datasets") {
  TaskSpec spec = *bundled_task("task1_short");
  spec.balance = Balance::AllPositive;
  spec.counts = {{"train", 30}};
  const Problem p = resolve(spec);
  SolutionCache cache(p.model);
  const auto data = sample_sequential_dataset(p, cache);
  for (const auto& s : data[0].sequences) CHECK(s.walk.target_label);
}

TEST_CASE("episode split sizes") {
  const TaskSpec t = *bundled_task("ccl_task1_mnist");
  CHECK(episode_split_sizes(t) == std::vector<std::pair<std::string, int>>{{"train", 800}, {"val", 100}, {"test", 100}});
  TaskSpec odd = t;
  odd.samples_per_episode = 7;
  odd.split_fractions = {{"train", 0.5}, {"val", 0.25}, {"test", 0.25}};
  CHECK(episode_split_sizes(odd) == std::vector<std::pair<std::string, int>>{{"train", 5}, {"val", 1}, {"test", 1}});
}

TEST_CASE("pattern guards fix every atom") {
  const Guard g = pattern_guard({"p", "q"}, 0b01, {{"r", true}});
  CHECK(g.atoms() == std::vector<std::string>{"p", "q", "r"});
  CHECK(g.to_string() == "p & !q & r");
  CHECK(pattern_guard({"p", "q"}, 0b10).to_string() == "!p & q");
}

TEST_CASE("curricula satisfy the formula and cover the orphans") {
  for (const char* name : {"ccl_task1_mnist", "ccl_task2_mnist", "ccl_task1_cifar100", "ccl_task2_cifar100"}) {
    const Problem p = resolve(*bundled_task(name));
    SolutionCache cache(p.model);
    Rng rng = Rng::derive(p.spec.seed, "curriculum");
    const Curriculum c = sample_curriculum(p, cache, rng);
    REQUIRE(c.episodes.size() == static_cast<std::size_t>(p.spec.episodes));
    CHECK(c.states.size() == c.episodes.size() + 1);
    CHECK(p.automaton.is_accepting(c.states.back()));
    std::vector<std::uint32_t> letters;
    for (const auto& e : c.episodes) {
      CHECK(e.guard.eval(e.minterm));
      letters.push_back(e.minterm);
    }
    CHECK_MESSAGE(eval_trace(p.formula, to_trace(p.atoms, letters)), name);
    CHECK(c.covered_orphans() == p.orphans.size());
    std::set<int> used;
    for (const auto& [o, e] : c.orphan_schedule) used.insert(e);
    CHECK(used.size() == p.orphans.size());
  }
}

TEST_CASE("rare class appears in exactly one episode") {
  const Problem p = resolve(*bundled_task("ccl_task1_mnist"));
  SolutionCache cache(p.model);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Curriculum c = sample_curriculum(p, cache, rng);
    const auto zero = std::find(p.atoms.begin(), p.atoms.end(), "zero") - p.atoms.begin();
    int hits = 0;
    for (const auto& e : c.episodes) hits += (e.minterm >> zero) & 1u;
    CHECK(hits == 1);
  }
}

TEST_CASE("episode samples follow the schedule") {
  const Problem p = resolve(*bundled_task("ccl_task1_mnist"));
  SolutionCache cache(p.model);
  Rng rng = Rng::derive(p.spec.seed, "curriculum");
  const Curriculum c = sample_curriculum(p, cache, rng);
  for (int e = 0; e < p.spec.episodes; ++e) {
    const auto splits = sample_episode(p, cache, c, e);
    REQUIRE(splits.size() == 3);
    CHECK(splits[0].samples.size() == 800);
    const auto& ep = c.episodes[e];
    for (const auto& s : splits)
      for (const auto& x : s.samples) {
        for (std::size_t i = 0; i < p.atoms.size(); ++i)
          CHECK(x.assignment.truths[p.model.constraint_index(p.atoms[i])] == static_cast<bool>((ep.minterm >> i) & 1u));
        if (!ep.orphans.empty()) {
          CHECK(x.forced);
          CHECK(x.assignment.truths[p.model.constraint_index(ep.orphans[0])]);
        }
      }
  }
  CHECK_THROWS(sample_episode(p, cache, c, p.spec.episodes));
}
