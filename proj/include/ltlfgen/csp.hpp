#pragma once

// All-solutions solving of reified guards over finite-domain constraints and
// a concurrent memo table of solution pools.

#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "ltlfgen/constraint.hpp"
#include "ltlfgen/guard.hpp"
#include "ltlfgen/rng.hpp"

namespace ltlfgen {

struct Variable {
  std::string name;
  Domain domain;
};

/// Variables in declaration order and the constraints over them.  Constraint
/// parameters name model variables directly.
class CspModel {
 public:
  CspModel() = default;
  CspModel(std::vector<Variable> variables, std::vector<ConstraintDef> constraints);

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<ConstraintDef>& constraints() const noexcept { return constraints_; }
  int variable_index(std::string_view name) const;
  int constraint_index(std::string_view name) const;
  /// Model variable index of every parameter of constraint k.
  const std::vector<int>& bindings(int k) const { return bindings_.at(k); }
  /// Product of all domain sizes (saturating).
  std::uint64_t assignment_count() const;

 private:
  std::vector<Variable> variables_;
  std::vector<ConstraintDef> constraints_;
  std::vector<std::vector<int>> bindings_;
};

struct SolutionPool {
  std::string key;
  Guard guard;
  std::vector<int> variables;    // relevant model variables, declaration order
  std::vector<int> constraints;  // model constraints mentioned by the guard
  std::vector<int> values;       // row-major, one row per solution
  /// Number of full assignments satisfying the guard.
  std::uint64_t full_count = 0;

  std::size_t size() const noexcept { return variables.empty() ? (full_count ? 1 : 0) : values.size() / variables.size(); }
  bool empty() const noexcept { return size() == 0; }
  std::span<const int> row(std::size_t i) const {
    return {values.data() + i * variables.size(), variables.size()};
  }
};

struct SolveOptions {
  std::uint64_t max_tuples = 10'000'000;
};

/// Every assignment to the guard-relevant variables under which the reified
/// constraint truths satisfy the guard, in lexicographic order.  Throws
/// DomainError when the relevant search space exceeds the cap.
SolutionPool solve_all(const Guard& guard, const CspModel& model, const SolveOptions& options = {});

/// Canonical cache key of a guard: atom list plus sum-of-products text.
std::string guard_key(const Guard& guard);

/// One full assignment drawn from a pool.
struct SampledAssignment {
  std::vector<int> values;               // per model variable
  std::vector<bool> variable_relevant;   // per model variable
  std::vector<bool> truths;              // per model constraint
  std::vector<bool> constraint_relevant; // per model constraint
};

/// Uniform over the pool rows; irrelevant variables uniform over their
/// domains.  Throws DomainError on an empty pool.
SampledAssignment sample_from_pool(const SolutionPool& pool, const CspModel& model, Rng& rng);

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t pools = 0;
  std::uint64_t solutions = 0;
};

/// Thread-safe lazily filled pool cache.  A key is solved once; concurrent
/// requests for it wait on the same fill.  Pools that would push the stored
/// solution count past `max_stored` are returned but not retained.
class SolutionCache {
 public:
  /// Default cap comes from LTLFGEN_CACHE_MAX_SOLUTIONS (unlimited if unset).
  explicit SolutionCache(const CspModel& model, SolveOptions options = {});
  SolutionCache(const CspModel& model, SolveOptions options, std::uint64_t max_stored);

  std::shared_ptr<const SolutionPool> get(const Guard& guard);
  CacheStats stats() const;
  const CspModel& model() const noexcept { return model_; }

 private:
  const CspModel& model_;
  SolveOptions options_;
  std::uint64_t max_stored_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_future<std::shared_ptr<const SolutionPool>>> pools_;
  CacheStats stats_;
};

}  // namespace ltlfgen
