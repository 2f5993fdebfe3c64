#include "ltlfgen/guard.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <optional>
#include <set>

#include "ltlfgen/error.hpp"

namespace ltlfgen {

namespace {

void check_atoms(const std::vector<std::string>& atoms) {
  if (atoms.size() > Guard::kMaxAtoms) throw DomainError("guards support at most 20 atoms");
  if (!std::is_sorted(atoms.begin(), atoms.end()) ||
      std::adjacent_find(atoms.begin(), atoms.end()) != atoms.end())
    throw ValidationError("guard atoms must be sorted and unique");
}

bool eval_prop(const Formula& f, const std::vector<std::string>& atoms, std::uint32_t letter) {
  switch (f.op()) {
    case Op::True:
      return true;
    case Op::False:
      return false;
    case Op::Atom: {
      auto it = std::lower_bound(atoms.begin(), atoms.end(), f.name());
      return (letter >> (it - atoms.begin())) & 1u;
    }
    case Op::Not:
      return !eval_prop(f.child(), atoms, letter);
    case Op::And:
      return eval_prop(f.lhs(), atoms, letter) && eval_prop(f.rhs(), atoms, letter);
    case Op::Or:
      return eval_prop(f.lhs(), atoms, letter) || eval_prop(f.rhs(), atoms, letter);
    case Op::Implies:
      return !eval_prop(f.lhs(), atoms, letter) || eval_prop(f.rhs(), atoms, letter);
    case Op::Iff:
      return eval_prop(f.lhs(), atoms, letter) == eval_prop(f.rhs(), atoms, letter);
    default:
      throw ValidationError("guards cannot contain temporal operators");
  }
}

// Literal order used for the canonical cube ordering: positive < negative < absent.
int literal_rank(const Cube& c, std::size_t i) {
  const std::uint32_t bit = 1u << i;
  if (!(c.care & bit)) return 2;
  return (c.value & bit) ? 0 : 1;
}

// Prime implicants by iterated merging (Quine-McCluskey) followed by a
// deterministic cover: essential primes, then greedy by coverage.
std::vector<Cube> minimize_sop(std::size_t n, const std::vector<bool>& truth) {
  const std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1u);
  std::vector<std::uint32_t> ones;
  for (std::uint32_t m = 0; m < truth.size(); ++m)
    if (truth[m]) ones.push_back(m);
  if (ones.empty()) return {};
  if (ones.size() == truth.size()) return {Cube{0, 0}};

  auto key = [](const Cube& c) { return (static_cast<std::uint64_t>(c.care) << 32) | c.value; };
  std::set<std::uint64_t> current;
  for (auto m : ones) current.insert(key(Cube{full, m}));
  std::vector<Cube> primes;
  while (!current.empty()) {
    std::vector<Cube> layer;
    for (auto k : current) layer.push_back(Cube{static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k)});
    std::vector<bool> merged(layer.size(), false);
    std::set<std::uint64_t> next;
    for (std::size_t i = 0; i < layer.size(); ++i) {
      for (std::uint32_t bits = layer[i].care; bits; bits &= bits - 1) {
        const std::uint32_t bit = bits & (~bits + 1);
        const Cube partner{layer[i].care, layer[i].value ^ bit};
        auto it = current.find(key(partner));
        if (it == current.end()) continue;
        merged[i] = true;
        next.insert(key(Cube{layer[i].care & ~bit, layer[i].value & ~bit}));
      }
    }
    for (std::size_t i = 0; i < layer.size(); ++i)
      if (!merged[i]) primes.push_back(layer[i]);
    current = std::move(next);
  }

  std::vector<Cube> chosen;
  std::set<std::uint32_t> uncovered(ones.begin(), ones.end());
  auto take = [&](const Cube& c) {
    chosen.push_back(c);
    for (auto it = uncovered.begin(); it != uncovered.end();) {
      if (c.matches(*it)) it = uncovered.erase(it);
      else ++it;
    }
  };
  for (auto m : ones) {
    const Cube* only = nullptr;
    int count = 0;
    for (const auto& p : primes)
      if (p.matches(m)) {
        ++count;
        only = &p;
      }
    if (count == 1 && uncovered.count(m)) take(*only);
  }
  while (!uncovered.empty()) {
    const Cube* best = nullptr;
    std::size_t best_cover = 0;
    for (const auto& p : primes) {
      std::size_t cover = 0;
      for (auto m : uncovered) cover += p.matches(m);
      // Ties go to the cube with fewer literals, then to the earliest prime.
      if (cover > best_cover ||
          (cover == best_cover && cover > 0 && std::popcount(p.care) < std::popcount(best->care))) {
        best = &p;
        best_cover = cover;
      }
    }
    take(*best);
  }
  std::sort(chosen.begin(), chosen.end(), [n](const Cube& a, const Cube& b) {
    for (std::size_t i = 0; i < n; ++i) {
      int ra = literal_rank(a, i), rb = literal_rank(b, i);
      if (ra != rb) return ra < rb;
    }
    return false;
  });
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  return chosen;
}

}  // namespace

Guard Guard::from_truth_table(std::vector<std::string> atoms, const std::vector<bool>& truth) {
  check_atoms(atoms);
  if (truth.size() != (std::size_t{1} << atoms.size()))
    throw ValidationError("truth table size does not match the atom count");
  auto cubes = minimize_sop(atoms.size(), truth);
  return Guard(std::move(atoms), std::move(cubes));
}

Guard Guard::from_formula(const Formula& f, std::vector<std::string> atoms) {
  check_atoms(atoms);
  for (const auto& a : atoms_of(f))
    if (!std::binary_search(atoms.begin(), atoms.end(), a))
      throw ValidationError("guard atom '" + a + "' is not in the atom list");
  std::vector<bool> truth(std::size_t{1} << atoms.size());
  for (std::uint32_t m = 0; m < truth.size(); ++m) truth[m] = eval_prop(f, atoms, m);
  return from_truth_table(std::move(atoms), truth);
}

Guard Guard::parse(std::string_view text, std::vector<std::string> atoms) {
  std::set<std::string> known(atoms.begin(), atoms.end());
  Formula f = parse_formula(text, known);
  if (!is_propositional(f)) throw ValidationError("guards cannot contain temporal operators");
  return from_formula(f, std::move(atoms));
}

Guard Guard::cube(std::vector<std::string> atoms, const Valuation& literals) {
  check_atoms(atoms);
  Cube c;
  for (const auto& [name, value] : literals) {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), name);
    if (it == atoms.end() || *it != name) throw ValidationError("unknown guard atom '" + name + "'");
    const std::uint32_t bit = 1u << (it - atoms.begin());
    c.care |= bit;
    if (value) c.value |= bit;
  }
  return Guard(std::move(atoms), {c});
}

bool Guard::eval(std::uint32_t letter) const noexcept {
  for (const auto& c : cubes_)
    if (c.matches(letter)) return true;
  return false;
}

std::uint32_t Guard::letter_of(const Valuation& v) const {
  std::uint32_t letter = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    auto it = v.find(atoms_[i]);
    if (it == v.end()) throw ValidationError("atom '" + atoms_[i] + "' undefined in valuation");
    if (it->second) letter |= 1u << i;
  }
  return letter;
}

bool Guard::eval(const Valuation& v) const { return eval(letter_of(v)); }

std::vector<bool> Guard::truth_table() const {
  std::vector<bool> truth(std::size_t{1} << atoms_.size());
  for (std::uint32_t m = 0; m < truth.size(); ++m) truth[m] = eval(m);
  return truth;
}

std::vector<std::uint32_t> Guard::minterms() const {
  std::vector<std::uint32_t> out;
  const std::uint32_t n = 1u << atoms_.size();
  for (std::uint32_t m = 0; m < n; ++m)
    if (eval(m)) out.push_back(m);
  return out;
}

std::vector<std::string> Guard::mentioned_atoms() const {
  std::uint32_t mask = 0;
  for (const auto& c : cubes_) mask |= c.care;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (mask & (1u << i)) out.push_back(atoms_[i]);
  return out;
}

bool Guard::mentions(std::string_view atom) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
  if (it == atoms_.end() || *it != atom) return false;
  const std::uint32_t bit = 1u << (it - atoms_.begin());
  for (const auto& c : cubes_)
    if (c.care & bit) return true;
  return false;
}

std::string Guard::to_string() const {
  if (is_false()) return "false";
  if (is_true()) return "true";
  std::string out;
  for (std::size_t k = 0; k < cubes_.size(); ++k) {
    if (k) out += " | ";
    bool first = true;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const std::uint32_t bit = 1u << i;
      if (!(cubes_[k].care & bit)) continue;
      if (!first) out += " & ";
      first = false;
      if (!(cubes_[k].value & bit)) out += '!';
      out += atoms_[i];
    }
  }
  return out;
}

Formula Guard::to_formula() const {
  if (is_false()) return Formula::bottom();
  std::optional<Formula> sum;
  for (const auto& c : cubes_) {
    std::optional<Formula> prod;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const std::uint32_t bit = 1u << i;
      if (!(c.care & bit)) continue;
      Formula lit = Formula::atom(atoms_[i]);
      if (!(c.value & bit)) lit = !lit;
      prod = prod ? (*prod && lit) : lit;
    }
    Formula term = prod ? *prod : Formula::top();
    sum = sum ? (*sum || term) : term;
  }
  return *sum;
}

Guard Guard::operator&(const Guard& other) const {
  if (atoms_ != other.atoms_) throw ValidationError("guard conjunction over different atom lists");
  std::vector<bool> truth(std::size_t{1} << atoms_.size());
  for (std::uint32_t m = 0; m < truth.size(); ++m) truth[m] = eval(m) && other.eval(m);
  return from_truth_table(atoms_, truth);
}

Guard Guard::operator!() const {
  std::vector<bool> truth = truth_table();
  truth.flip();
  return from_truth_table(atoms_, truth);
}

Guard Guard::widen(const std::vector<std::string>& atoms) const {
  check_atoms(atoms);
  std::vector<int> pos(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), atoms_[i]);
    if (it == atoms.end() || *it != atoms_[i]) throw ValidationError("widen target misses atom " + atoms_[i]);
    pos[i] = static_cast<int>(it - atoms.begin());
  }
  std::vector<Cube> cubes;
  for (const auto& c : cubes_) {
    Cube w;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (c.care & (1u << i)) w.care |= 1u << pos[i];
      if (c.value & (1u << i)) w.value |= 1u << pos[i];
    }
    cubes.push_back(w);
  }
  // Re-canonicalize: cube order depends on the atom positions.
  std::vector<bool> truth(std::size_t{1} << atoms.size());
  for (std::uint32_t m = 0; m < truth.size(); ++m)
    for (const auto& c : cubes)
      if (c.matches(m)) {
        truth[m] = true;
        break;
      }
  return from_truth_table(atoms, truth);
}

}  // namespace ltlfgen
