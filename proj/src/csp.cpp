#include "ltlfgen/csp.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

#include "ltlfgen/error.hpp"

namespace ltlfgen {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

}  // namespace

CspModel::CspModel(std::vector<Variable> variables, std::vector<ConstraintDef> constraints)
    : variables_(std::move(variables)), constraints_(std::move(constraints)) {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    for (std::size_t j = i + 1; j < variables_.size(); ++j)
      if (variables_[i].name == variables_[j].name)
        throw ValidationError("duplicate variable " + variables_[i].name);
  for (const auto& c : constraints_) {
    std::vector<int> b;
    for (std::size_t i = 0; i < c.params.size(); ++i) {
      const int v = variable_index(c.params[i]);
      if (v < 0) throw ValidationError("unknown variable " + c.params[i]);
      if (!(variables_[v].domain == c.param_domains[i]))
        throw ValidationError("constraint '" + c.name + "' disagrees on the domain of " + c.params[i]);
      b.push_back(v);
    }
    bindings_.push_back(std::move(b));
  }
}

int CspModel::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return static_cast<int>(i);
  return -1;
}

int CspModel::constraint_index(std::string_view name) const {
  for (std::size_t i = 0; i < constraints_.size(); ++i)
    if (constraints_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::uint64_t CspModel::assignment_count() const {
  std::uint64_t n = 1;
  for (const auto& v : variables_) n = saturating_mul(n, v.domain.size());
  return n;
}

std::string guard_key(const Guard& guard) {
  std::string key;
  for (std::size_t i = 0; i < guard.atoms().size(); ++i) {
    if (i) key += ',';
    key += guard.atoms()[i];
  }
  return key + ':' + guard.to_string();
}

SolutionPool solve_all(const Guard& guard, const CspModel& model, const SolveOptions& options) {
  SolutionPool pool;
  pool.key = guard_key(guard);
  pool.guard = guard;

  const auto& atoms = guard.atoms();
  std::vector<int> atom_constraint(atoms.size(), -1);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atom_constraint[i] = model.constraint_index(atoms[i]);
    if (atom_constraint[i] < 0) throw ValidationError("guard atom '" + atoms[i] + "' is not a declared constraint");
  }
  if (guard.is_false()) return pool;

  std::vector<int> mentioned;  // guard atom positions
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (guard.mentions(atoms[i])) {
      mentioned.push_back(static_cast<int>(i));
      pool.constraints.push_back(atom_constraint[i]);
    }
  std::sort(pool.constraints.begin(), pool.constraints.end());

  std::vector<bool> relevant(model.variables().size(), false);
  for (int k : pool.constraints)
    for (int v : model.bindings(k)) relevant[v] = true;
  for (std::size_t v = 0; v < relevant.size(); ++v)
    if (relevant[v]) pool.variables.push_back(static_cast<int>(v));

  std::uint64_t space = 1, rest = 1;
  for (std::size_t v = 0; v < relevant.size(); ++v) {
    const auto n = model.variables()[v].domain.size();
    if (relevant[v]) space = saturating_mul(space, n);
    else rest = saturating_mul(rest, n);
  }
  if (space > options.max_tuples)
    throw DomainError("guard '" + guard.to_string() + "' spans " + std::to_string(space) +
                      " tuples, above the solver cap of " + std::to_string(options.max_tuples));

  const std::size_t m = pool.variables.size();
  std::vector<int> depth_of(model.variables().size(), -1);
  for (std::size_t d = 0; d < m; ++d) depth_of[pool.variables[d]] = static_cast<int>(d);

  // Constraints become decidable at the depth of their last parameter; a
  // parameterless constraint is decided before the search starts.
  std::vector<std::vector<int>> ready(m + 1);
  for (int pos : mentioned) {
    const int k = atom_constraint[pos];
    int d = -1;
    for (int v : model.bindings(k)) d = std::max(d, depth_of[v]);
    ready[d + 1].push_back(pos);
  }

  const auto& cubes = guard.cubes();
  auto consistent = [&](std::uint32_t known, std::uint32_t letter) {
    for (const auto& c : cubes)
      if (((letter ^ c.value) & c.care & known) == 0) return true;
    return false;
  };

  std::vector<int> value(model.variables().size(), 0);
  std::vector<int> args;
  auto decide = [&](int level, std::uint32_t& known, std::uint32_t& letter) {
    for (int pos : ready[level]) {
      const int k = atom_constraint[pos];
      const auto& b = model.bindings(k);
      args.resize(b.size());
      for (std::size_t i = 0; i < b.size(); ++i) args[i] = value[b[i]];
      known |= 1u << pos;
      if (eval_expression(model.constraints()[k].expr, args)) letter |= 1u << pos;
    }
  };

  std::uint32_t known0 = 0, letter0 = 0;
  decide(0, known0, letter0);
  if (!consistent(known0, letter0)) return pool;
  if (m == 0) {
    pool.full_count = rest;
    return pool;
  }

  std::vector<std::size_t> choice(m, 0);
  std::vector<std::uint32_t> known(m + 1), letter(m + 1);
  known[0] = known0;
  letter[0] = letter0;
  std::size_t d = 0;
  std::uint64_t rows = 0;
  // Iterative depth-first enumeration in lexicographic order.
  for (;;) {
    const auto& dom = model.variables()[pool.variables[d]].domain;
    if (choice[d] == dom.size()) {
      if (d == 0) break;
      choice[d] = 0;
      --d;
      ++choice[d];
      continue;
    }
    value[pool.variables[d]] = dom.values[choice[d]];
    std::uint32_t kn = known[d], lt = letter[d];
    decide(static_cast<int>(d) + 1, kn, lt);
    if (!consistent(kn, lt)) {
      ++choice[d];
      continue;
    }
    if (d + 1 == m) {
      for (std::size_t i = 0; i < m; ++i) pool.values.push_back(value[pool.variables[i]]);
      ++rows;
      ++choice[d];
      continue;
    }
    known[d + 1] = kn;
    letter[d + 1] = lt;
    ++d;
  }
  pool.full_count = saturating_mul(rows, rest);
  return pool;
}

SampledAssignment sample_from_pool(const SolutionPool& pool, const CspModel& model, Rng& rng) {
  if (pool.empty()) throw DomainError("cannot sample from the empty pool of '" + pool.guard.to_string() + "'");
  const auto& vars = model.variables();
  SampledAssignment s;
  s.values.resize(vars.size());
  s.variable_relevant.assign(vars.size(), false);
  const std::size_t r = pool.variables.empty() ? 0 : rng.uniform(pool.size());
  for (std::size_t i = 0; i < pool.variables.size(); ++i) {
    s.values[pool.variables[i]] = pool.row(r)[i];
    s.variable_relevant[pool.variables[i]] = true;
  }
  for (std::size_t v = 0; v < vars.size(); ++v)
    if (!s.variable_relevant[v]) s.values[v] = vars[v].domain.values[rng.uniform(vars[v].domain.size())];

  const auto& cs = model.constraints();
  s.truths.resize(cs.size());
  s.constraint_relevant.assign(cs.size(), false);
  std::vector<int> args;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const auto& b = model.bindings(static_cast<int>(k));
    args.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) args[i] = s.values[b[i]];
    s.truths[k] = eval_expression(cs[k].expr, args);
  }
  for (int k : pool.constraints) s.constraint_relevant[k] = true;
  return s;
}

namespace {

std::uint64_t env_cap() {
  if (const char* v = std::getenv("LTLFGEN_CACHE_MAX_SOLUTIONS")) {
    char* end = nullptr;
    const unsigned long long n = std::strtoull(v, &end, 10);
    if (end != v && *end == '\0') return n;
  }
  return std::numeric_limits<std::uint64_t>::max();
}

}  // namespace

SolutionCache::SolutionCache(const CspModel& model, SolveOptions options)
    : SolutionCache(model, options, env_cap()) {}

SolutionCache::SolutionCache(const CspModel& model, SolveOptions options, std::uint64_t max_stored)
    : model_(model), options_(options), max_stored_(max_stored) {}

std::shared_ptr<const SolutionPool> SolutionCache::get(const Guard& guard) {
  const std::string key = guard_key(guard);
  std::promise<std::shared_ptr<const SolutionPool>> promise;
  std::shared_future<std::shared_ptr<const SolutionPool>> pending;
  {
    std::lock_guard lock(mu_);
    auto it = pools_.find(key);
    if (it != pools_.end()) {
      ++stats_.hits;
      pending = it->second;
    } else {
      ++stats_.misses;
      pools_.emplace(key, promise.get_future().share());
    }
  }
  if (pending.valid()) return pending.get();

  std::shared_ptr<const SolutionPool> pool;
  try {
    pool = std::make_shared<const SolutionPool>(solve_all(guard, model_, options_));
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mu_);
    pools_.erase(key);
    throw;
  }
  promise.set_value(pool);
  std::lock_guard lock(mu_);
  const std::uint64_t n = pool->size();
  if (stats_.solutions + n > max_stored_) {
    pools_.erase(key);
  } else {
    ++stats_.pools;
    stats_.solutions += n;
  }
  return pool;
}

CacheStats SolutionCache::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace ltlfgen
