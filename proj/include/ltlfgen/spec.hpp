#pragma once

// Task specifications: the declarative description of one generation run,
// its JSON serialization, validation and resolution into solver inputs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltlfgen/constraint.hpp"
#include "ltlfgen/csp.hpp"
#include "ltlfgen/formula.hpp"
#include "ltlfgen/sfa.hpp"

namespace ltlfgen {

struct DomainDef {
  std::string name;
  bool integer = true;
  int lo = 0, hi = 0;               // integer domains
  std::vector<std::string> labels;  // enumerations
  /// split name -> manifest CSV (header `label,image`); empty = synthetic.
  std::map<std::string, std::string> sources;

  friend bool operator==(const DomainDef&, const DomainDef&) = default;
};

struct StreamBinding {
  std::string domain;
  std::string direction;  // "", "in" or "out"; metadata only
  std::string variable;   // fresh variable name; generated when empty

  friend bool operator==(const StreamBinding&, const StreamBinding&) = default;
};

/// Rebinds the parameters of one occurrence of an atom to new variables.
struct StreamMap {
  std::string atom;
  int occurrence = 0;  // 0-based, textual order in the formula
  std::map<std::string, StreamBinding> bindings;  // parameter -> binding

  friend bool operator==(const StreamMap&, const StreamMap&) = default;
};

struct ConstraintSpec {
  std::string name;
  std::vector<std::string> params;
  std::string body;

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

enum class Mode { Sequential, Incremental };
enum class Balance { AllPositive, Balanced };
enum class OrphanCoverage { Off, BestEffort };

struct BiasOptions {
  double self_loop_decay = 0.0;
  double sink_decay = 0.0;
  OrphanCoverage orphan_coverage = OrphanCoverage::Off;

  friend bool operator==(const BiasOptions&, const BiasOptions&) = default;
};

struct LengthRange {
  int min = 1;
  int max = 1;

  friend bool operator==(const LengthRange&, const LengthRange&) = default;
};

struct TaskSpec {
  std::string name;
  Mode mode = Mode::Sequential;
  std::uint64_t seed = 0;
  std::vector<DomainDef> domains;
  std::vector<std::pair<std::string, std::string>> variables;  // name -> domain
  std::vector<ConstraintSpec> constraints;
  std::string formula;
  std::vector<StreamMap> streams;
  LengthRange length;                                 // sequential
  int episodes = 0;                                   // incremental
  std::vector<std::pair<std::string, int>> counts;    // sequential split sizes
  int samples_per_episode = 0;                        // incremental
  std::vector<std::pair<std::string, double>> split_fractions;  // incremental
  Balance balance = Balance::Balanced;
  BiasOptions bias;
  double orphan_positive_ratio = 0.0;
  /// Directory that relative manifest paths resolve against (not serialized).
  std::filesystem::path base_dir;

  /// Split names in declaration order.
  std::vector<std::string> splits() const;

  friend bool operator==(const TaskSpec& a, const TaskSpec& b);
};

/// Parses and validates a JSON specification.
TaskSpec load_spec(std::string_view text, const std::filesystem::path& base_dir = {});
TaskSpec load_spec_file(const std::filesystem::path& path);
/// Canonical pretty-printed JSON; load_spec(serialize_spec(s)) == s.
std::string serialize_spec(const TaskSpec& spec);
/// Throws ValidationError (or ParseError) on the first contract violation.
void validate_spec(const TaskSpec& spec);

/// The six sequential tasks in short and long variants followed by the four
/// class-continual curricula.
std::vector<TaskSpec> bundled_tasks();
std::optional<TaskSpec> bundled_task(std::string_view name);

/// A specification with streams substituted away, domains resolved and the
/// automaton compiled.
struct Problem {
  TaskSpec spec;
  Universe universe;
  std::map<std::string, Domain> domains;
  /// Variable -> source domain name, after stream substitution.
  std::vector<std::pair<std::string, std::string>> variable_domains;
  CspModel model;
  Formula formula;                    // after substitution
  std::vector<std::string> atoms;     // sorted formula atoms = automaton alphabet
  std::vector<std::string> orphans;   // declared constraints absent from the formula
  Sfa automaton;
};

Problem resolve(const TaskSpec& spec, const CompileOptions& options = {});

}  // namespace ltlfgen
