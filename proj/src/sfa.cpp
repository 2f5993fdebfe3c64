#include "ltlfgen/sfa.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "ltlfgen/error.hpp"

namespace ltlfgen {

// ---------------------------------------------------------------------------
// Sfa

namespace {

void check_alphabet(const std::vector<std::string>& atoms) {
  if (atoms.size() > Sfa::kMaxAtoms) throw CompileError("automata support at most 16 atoms");
  if (!std::is_sorted(atoms.begin(), atoms.end()) ||
      std::adjacent_find(atoms.begin(), atoms.end()) != atoms.end())
    throw ValidationError("automaton atoms must be sorted and unique");
}

}  // namespace

Sfa Sfa::from_table(std::vector<std::string> atoms, int initial, std::vector<bool> accepting,
                    std::vector<std::vector<int>> delta) {
  check_alphabet(atoms);
  const int n = static_cast<int>(accepting.size());
  const std::size_t letters = std::size_t{1} << atoms.size();
  if (n == 0 || initial < 0 || initial >= n || static_cast<int>(delta.size()) != n)
    throw ValidationError("malformed automaton table");
  Sfa a;
  a.atoms_ = std::move(atoms);
  a.initial_ = initial;
  a.accepting_ = std::move(accepting);
  a.transitions_.resize(n);
  for (int s = 0; s < n; ++s) {
    if (delta[s].size() != letters) throw ValidationError("automaton table row has wrong width");
    std::map<int, std::vector<bool>> by_target;
    for (std::size_t m = 0; m < letters; ++m) {
      const int t = delta[s][m];
      if (t < 0 || t >= n) throw ValidationError("automaton successor out of range");
      auto [it, fresh] = by_target.try_emplace(t, std::vector<bool>(letters, false));
      it->second[m] = true;
    }
    for (auto& [t, truth] : by_target)
      a.transitions_[s].push_back(Transition{Guard::from_truth_table(a.atoms_, truth), t});
  }
  a.delta_ = std::move(delta);
  return a;
}

Sfa Sfa::from_transitions(std::vector<std::string> atoms, int initial, std::vector<bool> accepting,
                          const std::vector<std::vector<Transition>>& transitions) {
  check_alphabet(atoms);
  const int n = static_cast<int>(accepting.size());
  if (static_cast<int>(transitions.size()) != n) throw ValidationError("transition list size mismatch");
  const std::size_t letters = std::size_t{1} << atoms.size();
  std::vector<std::vector<int>> delta(n, std::vector<int>(letters, -1));
  for (int s = 0; s < n; ++s) {
    for (const auto& tr : transitions[s]) {
      const Guard g = tr.guard.atoms() == atoms ? tr.guard : tr.guard.widen(atoms);
      for (auto m : g.minterms()) {
        if (delta[s][m] != -1)
          throw ValidationError("state " + std::to_string(s) + " is not deterministic");
        delta[s][m] = tr.to;
      }
    }
    for (std::size_t m = 0; m < letters; ++m)
      if (delta[s][m] == -1) throw ValidationError("state " + std::to_string(s) + " is not complete");
  }
  return from_table(std::move(atoms), initial, std::move(accepting), std::move(delta));
}

std::vector<int> Sfa::accepting_states() const {
  std::vector<int> out;
  for (int s = 0; s < num_states(); ++s)
    if (accepting_[s]) out.push_back(s);
  return out;
}

std::size_t Sfa::num_transitions() const {
  std::size_t n = 0;
  for (const auto& ts : transitions_) n += ts.size();
  return n;
}

bool Sfa::is_sink(int state) const {
  for (const auto& tr : transitions_.at(state))
    if (tr.to != state) return false;
  return true;
}

int Sfa::transition_index(int from, int to) const {
  const auto& ts = transitions_.at(from);
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i].to == to) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// Minimization

namespace {

struct Table {
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<std::vector<int>> delta;
};

// Hopcroft partition refinement on the reachable part, then renumbering in
// breadth-first order from the initial state (letters ascending).
Table minimize_table(const Table& in, std::size_t letters) {
  // Reachable states, BFS order.
  std::vector<int> order;
  std::vector<int> index(in.accepting.size(), -1);
  {
    std::deque<int> queue{in.initial};
    index[in.initial] = 0;
    order.push_back(in.initial);
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      for (std::size_t m = 0; m < letters; ++m) {
        const int t = in.delta[s][m];
        if (index[t] == -1) {
          index[t] = static_cast<int>(order.size());
          order.push_back(t);
          queue.push_back(t);
        }
      }
    }
  }
  const int n = static_cast<int>(order.size());
  std::vector<std::vector<int>> delta(n, std::vector<int>(letters));
  std::vector<bool> accepting(n);
  for (int i = 0; i < n; ++i) {
    accepting[i] = in.accepting[order[i]];
    for (std::size_t m = 0; m < letters; ++m) delta[i][m] = index[in.delta[order[i]][m]];
  }

  // Inverse transitions in CSR form per letter.
  std::vector<std::vector<int>> pred_start(letters, std::vector<int>(n + 1, 0));
  std::vector<std::vector<int>> pred(letters, std::vector<int>(n));
  for (std::size_t m = 0; m < letters; ++m) {
    auto& start = pred_start[m];
    for (int s = 0; s < n; ++s) ++start[delta[s][m] + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<int> fill(start.begin(), start.end() - 1);
    for (int s = 0; s < n; ++s) pred[m][fill[delta[s][m]]++] = s;
  }

  std::vector<int> block_of(n);
  std::vector<std::vector<int>> blocks;
  {
    std::vector<int> acc, rej;
    for (int s = 0; s < n; ++s) (accepting[s] ? acc : rej).push_back(s);
    for (auto* b : {&acc, &rej})
      if (!b->empty()) {
        for (int s : *b) block_of[s] = static_cast<int>(blocks.size());
        blocks.push_back(*b);
      }
  }
  std::vector<bool> in_work(blocks.size(), false);
  std::vector<int> work;
  if (blocks.size() == 2) {
    const int smaller = blocks[0].size() <= blocks[1].size() ? 0 : 1;
    work.push_back(smaller);
    in_work[smaller] = true;
  }

  std::vector<int> touched_count;
  std::vector<char> marked(n, 0);
  while (!work.empty()) {
    const int a = work.back();
    work.pop_back();
    in_work[a] = false;
    const std::vector<int> splitter = blocks[a];
    for (std::size_t m = 0; m < letters; ++m) {
      std::vector<int> hit;
      for (int q : splitter)
        for (int k = pred_start[m][q]; k < pred_start[m][q + 1]; ++k) {
          const int s = pred[m][k];
          if (!marked[s]) {
            marked[s] = 1;
            hit.push_back(s);
          }
        }
      touched_count.assign(blocks.size(), 0);
      std::vector<int> touched_blocks;
      for (int s : hit)
        if (touched_count[block_of[s]]++ == 0) touched_blocks.push_back(block_of[s]);
      for (int y : touched_blocks) {
        if (touched_count[y] == static_cast<int>(blocks[y].size())) continue;
        std::vector<int> inside, outside;
        for (int s : blocks[y]) (marked[s] ? inside : outside).push_back(s);
        const int fresh = static_cast<int>(blocks.size());
        blocks[y] = std::move(outside);
        blocks.push_back(std::move(inside));
        for (int s : blocks[fresh]) block_of[s] = fresh;
        in_work.push_back(false);
        if (in_work[y]) {
          work.push_back(fresh);
          in_work[fresh] = true;
        } else {
          const int smaller = blocks[y].size() <= blocks[fresh].size() ? y : fresh;
          work.push_back(smaller);
          in_work[smaller] = true;
        }
      }
      for (int s : hit) marked[s] = 0;
    }
  }

  // Quotient, renumbered breadth-first.
  const int nb = static_cast<int>(blocks.size());
  std::vector<int> rename(nb, -1);
  std::vector<int> reps;
  std::deque<int> queue{block_of[0]};
  rename[block_of[0]] = 0;
  reps.push_back(blocks[block_of[0]].front());
  while (!queue.empty()) {
    const int b = queue.front();
    queue.pop_front();
    const int rep = blocks[b].front();
    for (std::size_t m = 0; m < letters; ++m) {
      const int tb = block_of[delta[rep][m]];
      if (rename[tb] == -1) {
        rename[tb] = static_cast<int>(reps.size());
        reps.push_back(blocks[tb].front());
        queue.push_back(tb);
      }
    }
  }
  Table out;
  out.initial = 0;
  out.accepting.resize(reps.size());
  out.delta.assign(reps.size(), std::vector<int>(letters));
  for (std::size_t i = 0; i < reps.size(); ++i) {
    out.accepting[i] = accepting[reps[i]];
    for (std::size_t m = 0; m < letters; ++m) out.delta[i][m] = rename[block_of[delta[reps[i]][m]]];
  }
  return out;
}

}  // namespace

Sfa minimize(const Sfa& a) {
  Table t{a.initial(), {}, a.table()};
  for (int s = 0; s < a.num_states(); ++s) t.accepting.push_back(a.is_accepting(s));
  Table m = minimize_table(t, std::size_t{1} << a.atoms().size());
  return Sfa::from_table(a.atoms(), m.initial, std::move(m.accepting), std::move(m.delta));
}

// ---------------------------------------------------------------------------
// Compilation by formula progression
//
// A state is a positive Boolean combination (kept as an absorbed DNF) of
// obligations "X g" (strong: the next step must exist and satisfy g) and
// "WX g" (weak: satisfied if the trace ends).  Reading a letter replaces every
// obligation by the one-step unfolding of its formula; a state accepts at the
// end of the trace iff some clause contains only weak obligations.

namespace {

struct Node {
  Op op;
  int atom;
  int a;
  int b;
  auto key() const { return std::tuple(static_cast<int>(op), atom, a, b); }
};

using Clause = std::vector<int>;  // sorted obligation ids: 2*node (+1 if weak)
using Dnf = std::vector<Clause>;  // sorted, absorbed

const Dnf kTrue{Clause{}};
const Dnf kFalse{};

void normalize(Dnf& d) {
  for (auto& c : d) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::sort(d.begin(), d.end(), [](const Clause& x, const Clause& y) {
    return x.size() != y.size() ? x.size() < y.size() : x < y;
  });
  d.erase(std::unique(d.begin(), d.end()), d.end());
  Dnf kept;
  for (auto& c : d) {
    bool absorbed = false;
    for (const auto& k : kept)
      if (std::includes(c.begin(), c.end(), k.begin(), k.end())) {
        absorbed = true;
        break;
      }
    if (!absorbed) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end());
  d = std::move(kept);
}

Dnf dnf_or(const Dnf& x, const Dnf& y) {
  Dnf out = x;
  out.insert(out.end(), y.begin(), y.end());
  normalize(out);
  return out;
}

Dnf dnf_and(const Dnf& x, const Dnf& y) {
  Dnf out;
  out.reserve(x.size() * y.size());
  for (const auto& cx : x)
    for (const auto& cy : y) {
      Clause c;
      std::set_union(cx.begin(), cx.end(), cy.begin(), cy.end(), std::back_inserter(c));
      out.push_back(std::move(c));
    }
  normalize(out);
  return out;
}

class Progression {
 public:
  Progression(const Formula& nnf, const std::vector<std::string>& atoms) : atoms_(atoms) {
    root_ = intern(nnf);
  }

  int root() const { return root_; }

  Dnf step(const Dnf& state, std::uint32_t letter) {
    Dnf out;
    for (const auto& clause : state) {
      Dnf acc = kTrue;
      for (int ob : clause) {
        acc = dnf_and(acc, unfold(ob / 2, letter));
        if (acc.empty()) break;
      }
      out.insert(out.end(), acc.begin(), acc.end());
    }
    normalize(out);
    return out;
  }

  static bool accepts_at_end(const Dnf& state) {
    for (const auto& c : state)
      if (std::all_of(c.begin(), c.end(), [](int ob) { return ob % 2 == 1; })) return true;
    return false;
  }

 private:
  int intern(const Formula& f) {
    Node n{f.op(), -1, -1, -1};
    switch (arity(f.op())) {
      case 0:
        if (f.op() == Op::Atom)
          n.atom = static_cast<int>(std::lower_bound(atoms_.begin(), atoms_.end(), f.name()) - atoms_.begin());
        break;
      case 1:
        n.a = intern(f.child());
        break;
      default:
        n.a = intern(f.lhs());
        n.b = intern(f.rhs());
    }
    auto [it, fresh] = ids_.try_emplace(n.key(), static_cast<int>(nodes_.size()));
    if (fresh) nodes_.push_back(n);
    return it->second;
  }

  // One-step unfolding of node k under `letter`.
  const Dnf& unfold(int k, std::uint32_t letter) {
    const std::uint64_t key = (static_cast<std::uint64_t>(k) << 32) | letter;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const Node n = nodes_[k];
    Dnf out;
    switch (n.op) {
      case Op::True:
        out = kTrue;
        break;
      case Op::False:
        out = kFalse;
        break;
      case Op::Atom:
        out = ((letter >> n.atom) & 1u) ? kTrue : kFalse;
        break;
      case Op::Not:  // NNF: child is an atom
        out = ((letter >> nodes_[n.a].atom) & 1u) ? kFalse : kTrue;
        break;
      case Op::And:
        out = dnf_and(unfold(n.a, letter), unfold(n.b, letter));
        break;
      case Op::Or:
        out = dnf_or(unfold(n.a, letter), unfold(n.b, letter));
        break;
      case Op::Next:
        out = Dnf{Clause{2 * n.a}};
        break;
      case Op::WeakNext:
        out = Dnf{Clause{2 * n.a + 1}};
        break;
      case Op::Until:  // b | (a & X(a U b))
        out = dnf_or(unfold(n.b, letter), dnf_and(unfold(n.a, letter), Dnf{Clause{2 * k}}));
        break;
      case Op::Release:  // b & (a | WX(a R b))
        out = dnf_and(unfold(n.b, letter), dnf_or(unfold(n.a, letter), Dnf{Clause{2 * k + 1}}));
        break;
      default:
        throw CompileError("formula is not in negation normal form");
    }
    return memo_.emplace(key, std::move(out)).first->second;
  }

  const std::vector<std::string>& atoms_;
  std::vector<Node> nodes_;
  std::map<std::tuple<int, int, int, int>, int> ids_;
  std::unordered_map<std::uint64_t, Dnf> memo_;
  int root_ = 0;
};

}  // namespace

Sfa compile(const Formula& f, const CompileOptions& options) {
  std::vector<std::string> atoms = atoms_of(f);
  atoms.insert(atoms.end(), options.extra_atoms.begin(), options.extra_atoms.end());
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  check_alphabet(atoms);
  const std::size_t letters = std::size_t{1} << atoms.size();

  Progression prog(to_nnf(f), atoms);
  std::map<Dnf, int> ids;
  std::vector<Dnf> states;
  auto state_id = [&](Dnf d) {
    auto [it, fresh] = ids.try_emplace(d, static_cast<int>(states.size()));
    if (fresh) {
      if (states.size() >= options.max_states)
        throw CompileError("automaton exceeds the state cap of " + std::to_string(options.max_states) +
                           " states; the formula is too large");
      states.push_back(std::move(d));
    }
    return it->second;
  };
  // The first step must exist: the initial obligation is strong.
  state_id(Dnf{Clause{2 * prog.root()}});
  Table t;
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::vector<int> row(letters);
    for (std::size_t m = 0; m < letters; ++m) {
      Dnf next = prog.step(states[s], static_cast<std::uint32_t>(m));
      row[m] = state_id(std::move(next));
    }
    t.delta.push_back(std::move(row));
  }
  for (const auto& s : states) t.accepting.push_back(Progression::accepts_at_end(s));

  // Traces are never empty, so acceptance of the initial state on the empty
  // word is free.  Split off a fresh initial state without incoming edges and
  // keep whichever acceptance bit yields fewer states (ties: rejecting).
  const int fresh = static_cast<int>(t.accepting.size());
  t.delta.push_back(t.delta[0]);
  t.accepting.push_back(false);
  t.initial = fresh;
  Table best = minimize_table(t, letters);
  t.accepting[fresh] = true;
  Table alt = minimize_table(t, letters);
  if (alt.accepting.size() < best.accepting.size()) best = std::move(alt);
  return Sfa::from_table(std::move(atoms), best.initial, std::move(best.accepting), std::move(best.delta));
}

// ---------------------------------------------------------------------------
// Runs and equivalence

RunResult run(const Sfa& a, std::span<const std::uint32_t> letters) {
  if (letters.empty()) throw ValidationError("traces must contain at least one step");
  RunResult r;
  r.states.reserve(letters.size() + 1);
  int s = a.initial();
  r.states.push_back(s);
  const std::uint32_t limit = 1u << a.atoms().size();
  for (auto m : letters) {
    if (m >= limit) throw ValidationError("letter outside the automaton alphabet");
    s = a.step(s, m);
    r.states.push_back(s);
  }
  r.accepted = a.is_accepting(s);
  return r;
}

RunResult run(const Sfa& a, const Trace& trace) {
  if (trace.empty()) throw ValidationError("traces must contain at least one step");
  std::vector<std::uint32_t> letters;
  letters.reserve(trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < a.atoms().size(); ++i) {
      auto it = trace[t].find(a.atoms()[i]);
      if (it == trace[t].end())
        throw ValidationError("atom '" + a.atoms()[i] + "' undefined at step " + std::to_string(t));
      if (it->second) m |= 1u << i;
    }
    letters.push_back(m);
  }
  return run(a, letters);
}

bool check_equiv(const Sfa& a, const Formula& f, int max_len, std::uint64_t max_traces) {
  for (const auto& atom : atoms_of(f))
    if (!std::binary_search(a.atoms().begin(), a.atoms().end(), atom))
      throw ValidationError("formula atom '" + atom + "' is not in the automaton alphabet");
  const std::uint64_t letters = std::uint64_t{1} << a.atoms().size();
  std::uint64_t total = 0, layer = 1;
  for (int len = 1; len <= max_len; ++len) {
    layer *= letters;
    total += layer;
    if (total > max_traces) throw DomainError("equivalence check exceeds the trace enumeration cap");
  }
  TraceEvaluator eval(f, a.atoms());
  std::vector<std::uint32_t> trace;
  std::vector<int> states{a.initial()};
  // Depth-first over prefixes; every prefix is itself a trace to check.
  std::function<bool()> extend = [&]() -> bool {
    for (std::uint32_t m = 0; m < letters; ++m) {
      trace.push_back(m);
      states.push_back(a.step(states.back(), m));
      if (a.is_accepting(states.back()) != eval(trace)) return false;
      if (static_cast<int>(trace.size()) < max_len && !extend()) return false;
      trace.pop_back();
      states.pop_back();
    }
    return true;
  };
  return max_len < 1 || extend();
}

// ---------------------------------------------------------------------------
// Export / import

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string export_sfa(const Sfa& a, ExportFormat format) {
  if (format == ExportFormat::Dot) {
    std::ostringstream os;
    os << "digraph sfa {\n  rankdir=LR;\n  node [shape=circle];\n  __start [shape=point];\n";
    for (int s = 0; s < a.num_states(); ++s)
      os << "  " << s << " [shape=" << (a.is_accepting(s) ? "doublecircle" : "circle") << "];\n";
    os << "  __start -> " << a.initial() << ";\n";
    for (int s = 0; s < a.num_states(); ++s)
      for (const auto& tr : a.transitions(s))
        os << "  " << s << " -> " << tr.to << " [label=\"" << dot_escape(tr.guard.to_string()) << "\"];\n";
    os << "}\n";
    return os.str();
  }
  nlohmann::ordered_json j;
  j["atoms"] = a.atoms();
  j["states"] = a.num_states();
  j["initial"] = a.initial();
  j["accepting"] = a.accepting_states();
  auto trs = nlohmann::ordered_json::array();
  for (int s = 0; s < a.num_states(); ++s)
    for (const auto& tr : a.transitions(s))
      trs.push_back({{"from", s}, {"guard", tr.guard.to_string()}, {"to", tr.to}});
  j["transitions"] = std::move(trs);
  return j.dump(2) + "\n";
}

Sfa import_sfa_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, "invalid automaton JSON");
  }
  try {
    auto atoms = j.at("atoms").get<std::vector<std::string>>();
    const int n = j.at("states").get<int>();
    if (n <= 0) throw ValidationError("automaton must have at least one state");
    std::vector<bool> accepting(n, false);
    for (int s : j.at("accepting").get<std::vector<int>>()) accepting.at(s) = true;
    std::vector<std::vector<Transition>> trs(n);
    for (const auto& tr : j.at("transitions")) {
      const int from = tr.at("from").get<int>();
      const int to = tr.at("to").get<int>();
      if (from < 0 || from >= n || to < 0 || to >= n) throw ValidationError("transition state out of range");
      trs[from].push_back(Transition{Guard::parse(tr.at("guard").get<std::string>(), atoms), to});
    }
    return Sfa::from_transitions(std::move(atoms), j.at("initial").get<int>(), std::move(accepting), trs);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed automaton JSON: ") + e.what());
  } catch (const std::out_of_range&) {
    throw ValidationError("accepting state out of range");
  }
}

}  // namespace ltlfgen
