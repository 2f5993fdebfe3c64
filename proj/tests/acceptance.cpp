// One PASS/FAIL line per acceptance criterion.  Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "ltlfgen/datagen.hpp"
#include "ltlfgen/probeval.hpp"
#include "ltlfgen/sampler.hpp"
#include "ltlfgen/spec.hpp"
#include "oracle.hpp"

using namespace ltlfgen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double x) {
  std::ostringstream o;
  o.precision(10);
  o << x;
  return o.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ltlfgen_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

bool partitions(const Sfa& a) {
  for (int s = 0; s < a.num_states(); ++s)
    for (std::uint32_t l = 0; l < (1u << a.atoms().size()); ++l) {
      int hits = 0;
      for (const auto& t : a.transitions(s)) hits += t.guard.eval(l);
      if (hits != 1) return false;
    }
  return true;
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

Outcome example_automaton() {
  Outcome o;
  const std::vector<std::string> pqr = {"p", "q", "r"};
  const Formula f = parse_formula("◊r ∧ ((p ↔ ◯q) U r)");
  const Sfa a = compile(f, {4096, pqr});
  const oracle::SuffixTable table(f, pqr, 6);
  const auto bad = oracle::disagreements(a, table);
  o.detail = "states=" + std::to_string(a.num_states()) + " (expected 5), disagreements=" + std::to_string(bad) +
             " over lengths 1..6";
  o.require(a.num_states() == 5, "state count");
  o.require(minimize(a).num_states() == a.num_states(), "not minimal");
  o.require(partitions(a), "not complete and deterministic");
  o.require(bad == 0, "language differs from the oracle");
  return o;
}

Outcome task_automata() {
  Outcome o;
  const std::vector<int> expected = {8, 5, 5, 5, 4, 4};
  std::string counts;
  for (int k = 1; k <= 6; ++k) {
    for (const char* variant : {"_short", "_long"}) {
      const std::string name = "task" + std::to_string(k) + variant;
      const Problem p = resolve(*bundled_task(name));
      const oracle::SuffixTable table(p.formula, p.atoms, p.atoms.size() <= 2 ? 8 : 6);
      const auto bad = oracle::disagreements(p.automaton, table);
      o.require(bad == 0, name + " differs from the oracle");
      o.require(p.automaton.num_states() == expected[k - 1],
                name + " has " + std::to_string(p.automaton.num_states()) + " states");
      o.require(partitions(p.automaton), name + " not complete");
      if (std::string(variant) == "_short") counts += (counts.empty() ? "" : "/") + std::to_string(p.automaton.num_states());
    }
  }
  o.detail = "states " + counts + " (expected 8/5/5/5/4/4)" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome probe_numbers() {
  Outcome o;
  const ProbeProblem p = load_probe(slurp(fs::path(LTLFGEN_SOURCE_DIR) / "specs" / "probe_example.json"));
  const ProbeReport r = run_probe(p);
  auto near = [&](double got, double want, const std::string& what) {
    o.require(std::abs(got - want) <= 1e-9, what + "=" + fmt(got) + " want " + fmt(want));
  };
  const std::map<std::string, std::pair<double, double>> want = {{"p", {0.41, 0.32}}, {"q", {0.97, 0.4}}, {"r", {0.85, 0.8}}};
  for (std::size_t i = 0; i < r.constraints.size(); ++i) {
    near(r.exact[i], want.at(r.constraints[i]).first, "exact " + r.constraints[i]);
    near(r.topk[i], want.at(r.constraints[i]).second, "top1 " + r.constraints[i]);
  }
  const GuardRow& a = r.guards.at(0);
  const GuardRow& b = r.guards.at(1);
  o.require(a.label == "!q & r" && b.label == "!p & !q", "guard order");
  near(a.factored_topk, 0.48, "top1 !q&r");
  near(a.factored_exact, 0.0255, "exact !q&r");
  near(b.factored_topk, 0.408, "top1 !p&!q");
  near(b.factored_exact, 0.0177, "exact !p&!q");
  near(b.joint, 0.03, "joint !p&!q");
  near(a.joint, 0.0255, "joint !q&r");
  if (o.pass) o.detail = "all 12 values within 1e-9";
  return o;
}

// Labels and lengths of every sequence in a split's jsonl file.
std::vector<std::pair<bool, int>> read_sequences(const fs::path& f) {
  std::vector<std::pair<bool, int>> out;
  std::istringstream in(slurp(f));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) {
      const json j = json::parse(line);
      out.emplace_back(j["label"].get<bool>(), j["length"].get<int>());
    }
  return out;
}

Outcome dataset_shape() {
  Outcome o;
  for (const auto& [name, lo, hi] : {std::tuple{"task3_short", 10, 20}, std::tuple{"task3_long", 50, 100}}) {
    const fs::path dir = scratch(name);
    generate(*bundled_task(name), dir);
    std::string sizes;
    for (const auto& [split, want] : std::vector<std::pair<std::string, std::size_t>>{{"train", 320}, {"val", 40}, {"test", 40}}) {
      const auto seqs = read_sequences(dir / (split + ".jsonl"));
      o.require(seqs.size() == want, std::string(name) + " " + split + " has " + std::to_string(seqs.size()));
      std::size_t pos = 0;
      for (const auto& [label, len] : seqs) {
        pos += label;
        o.require(len >= lo && len <= hi, std::string(name) + " length " + std::to_string(len));
      }
      o.require(pos == (seqs.size() + 1) / 2, std::string(name) + " " + split + " positives " + std::to_string(pos));
      sizes += (sizes.empty() ? "" : "/") + std::to_string(seqs.size());
    }
    o.detail += std::string(o.detail.empty() ? "" : ", ") + name + " " + sizes + " in [" + std::to_string(lo) + "," +
                std::to_string(hi) + "]";
    fs::remove_all(dir);
  }
  return o;
}

Outcome soundness() {
  Outcome o;
  std::size_t sequences = 0, episodes = 0;
  for (const auto& t : bundled_tasks()) {
    const fs::path dir = scratch(t.name);
    const auto report = generate(t, dir);
    const ValidationReport v = validate_dataset(dir);
    o.require(v.ok() && report.validation.ok(),
              t.name + ": " + std::to_string(v.violations.size()) + " violations" +
                  (v.violations.empty() ? "" : " first " + v.violations[0].where + " " + v.violations[0].message));
    sequences += v.sequences;
    episodes += v.episodes;
    fs::remove_all(dir);
  }
  o.detail = "16 datasets, " + std::to_string(sequences) + " sequences, " + std::to_string(episodes) + " episodes" +
             (o.detail.empty() ? ", 0 violations" : "; " + o.detail);
  return o;
}

Outcome curricula() {
  Outcome o;
  {
    const Problem p = resolve(*bundled_task("ccl_task1_mnist"));
    SolutionCache cache(p.model);
    Rng rng = Rng::derive(p.spec.seed, "curriculum");
    const Curriculum c = sample_curriculum(p, cache, rng);
    o.require(c.episodes.size() == 10, "task 1 episode count");
    const int zero = p.model.constraint_index("zero");
    int zero_episodes = 0;
    std::map<std::string, int> orphan_hits;
    for (int e = 0; e < static_cast<int>(c.episodes.size()); ++e) {
      std::size_t n = 0, with_zero = 0;
      std::map<std::string, std::size_t> positive;
      for (const auto& split : sample_episode(p, cache, c, e))
        for (const auto& s : split.samples) {
          ++n;
          with_zero += s.assignment.truths[zero];
          for (const auto& orphan : p.orphans) positive[orphan] += s.assignment.truths[p.model.constraint_index(orphan)];
        }
      if (with_zero > 0) {
        ++zero_episodes;
        o.require(with_zero == n, "zero episode not pure");
      }
      for (const auto& orphan : c.episodes[e].orphans) {
        o.require(positive[orphan] == n, orphan + " below ratio 1.0 in episode " + std::to_string(e));
        ++orphan_hits[orphan];
      }
    }
    o.require(zero_episodes == 1, "zero in " + std::to_string(zero_episodes) + " episodes");
    o.require(orphan_hits["even"] >= 1 && orphan_hits["odd"] >= 1, "orphans not scheduled");
    o.detail = "task 1: zero in " + std::to_string(zero_episodes) + " episode, even x" +
               std::to_string(orphan_hits["even"]) + ", odd x" + std::to_string(orphan_hits["odd"]);
  }
  {
    const Formula f = parse_formula("□(p ↔ (◯¬q ∧ ◯●q))");
    std::set<std::vector<int>> traces;
    for (std::uint64_t seed : {11u, 22u, 33u}) {
      TaskSpec spec = *bundled_task("ccl_task2_mnist");
      spec.seed = seed;
      const Problem p = resolve(spec);
      SolutionCache cache(p.model);
      Rng rng = Rng::derive(seed, "curriculum");
      const Curriculum c = sample_curriculum(p, cache, rng);
      o.require(c.episodes.size() == 20, "task 2 episode count");
      std::vector<std::uint32_t> letters;
      for (const auto& e : c.episodes) letters.push_back(e.minterm);
      o.require(eval_trace(f, to_trace(p.atoms, letters)), "task 2 trace violates the formula");
      traces.insert(c.states);
    }
    o.require(traces.size() == 3, "seeds gave " + std::to_string(traces.size()) + " distinct traces");
    o.detail += ", task 2: 20 episodes x 3 seeds satisfy the formula, " + std::to_string(traces.size()) + " distinct traces";
  }
  return o;
}

Outcome solver_oracle() {
  Outcome o;
  std::mt19937_64 rng(7);
  int instances = 0, bad = 0;
  while (instances < 200) {
    const auto in = oracle::random_csp(rng);
    if (!in) continue;
    ++instances;
    const SolutionPool pool = solve_all(in->guard, in->model());
    const auto rel = oracle::relevant_variables(*in);
    const auto want = oracle::brute_solutions(*in, rel);
    std::set<std::vector<int>> got;
    for (std::size_t i = 0; i < pool.size() && !pool.variables.empty(); ++i) got.emplace(pool.row(i).begin(), pool.row(i).end());
    if (pool.variables != rel || pool.full_count != want.full || (!rel.empty() && got != want.projected)) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " instances differ");

  const Domain d = Domain::range("digits", 0, 9);
  std::vector<Variable> vars = {{"A", d}, {"B", d}, {"C", d}};
  std::vector<ConstraintDef> cons = {ConstraintDef::make("sum", {"A", "B", "C"}, "A + B = C", {d, d, d}, {}),
                                     ConstraintDef::make("eq", {"A", "B", "C"}, "all_equal([A, B, C])", {d, d, d}, {})};
  const CspModel m(vars, cons);
  const std::vector<std::string> atoms = {"eq", "sum"};
  const auto sum = solve_all(Guard::parse("sum", atoms), m).size();
  const auto both = solve_all(Guard::parse("sum & eq", atoms), m).size();
  o.require(sum == 55, "A+B=C has " + std::to_string(sum));
  o.require(both == 1, "A+B=C & all_equal has " + std::to_string(both));
  o.detail = std::to_string(instances) + " random instances, " + std::to_string(bad) + " mismatches; counts " +
             std::to_string(sum) + " and " + std::to_string(both) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome properties() {
  Outcome o;
  std::string parts;
  // (a) negation normal form and derived operators.
  {
    const std::vector<std::string> atoms = {"a", "b", "c"};
    std::mt19937_64 rng(99);
    std::uint64_t bad = 0;
    for (int i = 0; i < 150; ++i) {
      const Formula f = oracle::random_formula(rng, atoms, 4);
      const Formula n = to_nnf(f);
      if (!is_nnf(n) || oracle::formula_disagreements(f, n, atoms, 6) != 0) ++bad;
    }
    const std::vector<std::pair<const char*, const char*>> laws = {
        {"F a", "true U a"}, {"G a", "!F !a"},          {"G a", "false R a"},   {"a R b", "!(!a U !b)"},
        {"WX a", "!X !a"},   {"a -> b", "!a | b"},      {"a <-> b", "(a -> b) & (b -> a)"},
        {"a U b", "b | (a & X (a U b))"},               {"G a", "a & WX G a"},  {"F a", "a | X F a"},
        {"a U (b & c)", "!(!a R !(b & c))"},
    };
    for (const auto& [l, r] : laws) bad += oracle::formula_disagreements(parse_formula(l), parse_formula(r), atoms, 6) != 0;
    o.require(bad == 0, "(a) " + std::to_string(bad) + " failures");
    parts += "(a) 150 formulas + 11 laws";
  }
  // (b) row-stochasticity.
  {
    std::mt19937_64 rng(5);
    double worst = 0;
    for (const auto& t : bundled_tasks()) {
      const Problem p = resolve(t);
      for (int v = 0; v < 50; ++v) {
        GuardAtomProbs probs;
        for (const auto& a : p.atoms) probs[a] = std::uniform_real_distribution<double>(0, 1)(rng);
        for (int s = 0; s < p.automaton.num_states(); ++s) {
          double total = 0;
          for (const auto& tr : p.automaton.transitions(s)) total += guard_prob_factored(tr.guard, probs);
          worst = std::max(worst, std::abs(total - 1));
        }
      }
    }
    o.require(worst <= 1e-9, "(b) deviation " + fmt(worst));
    parts += ", (b) max row deviation " + fmt(worst);
  }
  // (c) top-k dominance and independence collapse.
  {
    std::mt19937_64 rng(13);
    auto simplex = [&](std::size_t n) {
      std::vector<double> v(n);
      double tot = 0;
      for (auto& x : v) tot += x = std::uniform_real_distribution<double>(0.01, 1)(rng);
      for (auto& x : v) x /= tot;
      double s = 0;
      for (std::size_t i = 1; i < n; ++i) s += v[i];
      v[0] = 1 - s;
      return v;
    };
    const std::vector<std::string> joint_bodies = {"A < B", "A + B = C", "all_different([A, B, C])", "(A * B) mod 3 = C",
                                                   "A = B -> C > 0"};
    const std::vector<std::string> unary = {"X < 2", "X = 0 \\/ X = 3", "X mod 2 = 1", "X != 1", "X in {1, 2}"};
    int bad_topk = 0, bad_collapse = 0;
    double worst = 0;
    const Domain d = Domain::range("d", 0, 3);
    for (int i = 0; i < 100; ++i) {
      Distributions dists;
      for (const char* v : {"A", "B", "C"}) dists.emplace(v, CategoricalDist::make(v, d, simplex(4)));
      const ConstraintDef c = ConstraintDef::make("c", {"A", "B", "C"}, joint_bodies[i % joint_bodies.size()], {d, d, d}, {});
      const double exact = constraint_prob_exact(c, dists);
      double prev = 0;
      for (std::size_t k = 1; k <= 64; ++k) {
        const double t = constraint_prob_topk(c, dists, k);
        if (t < prev - 1e-15 || t > exact + 1e-12) ++bad_topk;
        prev = t;
      }
      if (std::abs(prev - exact) > 1e-12) ++bad_topk;

      Distributions ind;
      std::vector<ConstraintDef> cs;
      std::vector<std::string> atoms;
      GuardAtomProbs probs;
      for (int k = 0; k < 3; ++k) {
        const std::string v = "V" + std::to_string(k), name(1, static_cast<char>('a' + k));
        ind.emplace(v, CategoricalDist::make(v, d, simplex(4)));
        std::string body;
        for (char ch : unary[rng() % unary.size()]) body += ch == 'X' ? v : std::string(1, ch);
        cs.push_back(ConstraintDef::make(name, {v}, body, {d}, {}));
        atoms.push_back(name);
        probs[name] = constraint_prob_exact(cs.back(), ind);
      }
      std::vector<bool> truth(8);
      for (auto&& t : truth) t = rng() & 1;
      const Guard g = Guard::from_truth_table(atoms, truth);
      const double diff = std::abs(guard_prob_joint(g, cs, ind) - guard_prob_factored(g, probs));
      worst = std::max(worst, diff);
      if (diff > 1e-12) ++bad_collapse;
    }
    o.require(bad_topk == 0, "(c) " + std::to_string(bad_topk) + " top-k violations");
    o.require(bad_collapse == 0, "(c) " + std::to_string(bad_collapse) + " collapse violations");
    parts += ", (c) 100+100 instances, max collapse gap " + fmt(worst);
  }
  // (d) identical files for one and four workers.
  {
    int differing = 0, files = 0;
    for (const char* name : {"task1_short", "ccl_task2_mnist"}) {
      int here = 0;
      const fs::path one = scratch(std::string(name) + "_w1"), four = scratch(std::string(name) + "_w4");
      generate(*bundled_task(name), one, {1, std::nullopt});
      generate(*bundled_task(name), four, {4, std::nullopt});
      for (const auto& e : fs::recursive_directory_iterator(one)) {
        if (!e.is_regular_file()) continue;
        const fs::path rel = fs::relative(e.path(), one);
        ++here;
        std::string a = slurp(e.path()), b = fs::exists(four / rel) ? slurp(four / rel) : std::string("\x01");
        if (rel == "manifest.json") {
          json ja = json::parse(a), jb = json::parse(b);
          ja.erase("wall_clock_seconds");
          jb.erase("wall_clock_seconds");
          a = ja.dump();
          b = jb.dump();
        }
        differing += a != b;
      }
      int there = 0;
      for (const auto& e : fs::recursive_directory_iterator(four)) there += e.is_regular_file();
      differing += std::abs(there - here);
      files += here;
      fs::remove_all(one);
      fs::remove_all(four);
    }
    o.require(differing == 0, "(d) " + std::to_string(differing) + " files differ");
    parts += ", (d) " + std::to_string(files) + " files identical";
  }
  o.detail = parts + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria = {
      {1, "example automaton", 30, example_automaton},
      {2, "task automata", 0, task_automata},
      {3, "probability suite", 1, probe_numbers},
      {4, "dataset shape", 300, dataset_shape},
      {5, "soundness gate", 0, soundness},
      {6, "incremental curricula", 0, curricula},
      {7, "solver oracle", 120, solver_oracle},
      {8, "property suites", 0, properties},
  };
  int failed = 0;
  for (const auto& [id, name, limit, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit > 0 && secs > limit) o.require(false, "took longer than " + fmt(limit) + " s");
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.2f s%s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
                secs, limit > 0 ? (", limit " + fmt(limit) + " s").c_str() : "");
    std::fflush(stdout);
  }
  return failed;
}
