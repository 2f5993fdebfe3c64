#pragma once

// Probabilistic evaluation of constraints, guards and automata under
// independent per-variable categorical distributions.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltlfgen/constraint.hpp"
#include "ltlfgen/guard.hpp"
#include "ltlfgen/sfa.hpp"

namespace ltlfgen {

struct CategoricalDist {
  std::string variable;
  Domain domain;
  std::vector<double> probabilities;  // parallel to domain.values

  /// Throws ValidationError unless sizes match, entries lie in [0,1] and the
  /// total is 1 within 1e-9.
  static CategoricalDist make(std::string variable, Domain domain, std::vector<double> probabilities);
};

/// Keyed by variable name; constraint parameters name variables directly.
using Distributions = std::map<std::string, CategoricalDist>;
using GuardAtomProbs = std::map<std::string, double>;

/// Weighted model count over the parameters' grid.
double constraint_prob_exact(const ConstraintDef& c, const Distributions& dists);

/// Mass of the k most probable satisfying worlds; ties go to the
/// lexicographically smaller assignment.
double constraint_prob_topk(const ConstraintDef& c, const Distributions& dists, std::size_t k = 1);

/// Atoms treated as independent Bernoullis, summed over satisfying valuations.
double guard_prob_factored(const Guard& g, const GuardAtomProbs& probs);

/// Exact probability over the variables shared by the guard's constraints.
double guard_prob_joint(const Guard& g, const std::vector<ConstraintDef>& constraints, const Distributions& dists);

/// Forward recursion with factored transition weights; mass on accepting
/// states after the last step.
double accept_prob(const Sfa& a, const std::vector<GuardAtomProbs>& steps);

/// Input of the `probe` command.
struct ProbeProblem {
  Distributions dists;
  std::vector<ConstraintDef> constraints;
  std::vector<std::string> atoms;  // sorted constraint names
  std::vector<Guard> guards;
  std::optional<Sfa> automaton;
  std::size_t top_k = 1;
};

ProbeProblem load_probe(std::string_view json_text);

struct GuardRow {
  std::string label;  // guard text, prefixed with "from->to: " for transitions
  double factored_exact = 0;
  double factored_topk = 0;
  double joint = 0;
};

struct ProbeReport {
  std::size_t top_k = 1;
  std::vector<std::string> constraints;
  std::vector<double> exact, topk;  // parallel to constraints
  std::vector<GuardRow> guards;
  std::vector<GuardRow> transitions;
};

ProbeReport run_probe(const ProbeProblem& problem);
std::string format_probe(const ProbeReport& report, bool json = false);

}  // namespace ltlfgen
