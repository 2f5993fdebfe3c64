#pragma once

// Deterministic, complete symbolic finite automata over constraint atoms.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltlfgen/formula.hpp"
#include "ltlfgen/guard.hpp"

namespace ltlfgen {

struct Transition {
  Guard guard;
  int to = 0;
};

class Sfa {
 public:
  static constexpr std::size_t kMaxAtoms = 16;

  /// Builds from an explicit table `delta[state][letter]`; guards are
  /// condensed per (state, successor) pair.
  static Sfa from_table(std::vector<std::string> atoms, int initial, std::vector<bool> accepting,
                        std::vector<std::vector<int>> delta);
  /// Builds from guard-labelled transitions; throws unless the guards of every
  /// state are pairwise exclusive and jointly exhaustive.
  static Sfa from_transitions(std::vector<std::string> atoms, int initial, std::vector<bool> accepting,
                              const std::vector<std::vector<Transition>>& transitions);

  const std::vector<std::string>& atoms() const noexcept { return atoms_; }
  int num_states() const noexcept { return static_cast<int>(accepting_.size()); }
  int initial() const noexcept { return initial_; }
  bool is_accepting(int state) const { return accepting_.at(state); }
  std::vector<int> accepting_states() const;
  const std::vector<Transition>& transitions(int state) const { return transitions_.at(state); }
  std::size_t num_transitions() const;
  int step(int state, std::uint32_t letter) const { return delta_[state][letter]; }
  const std::vector<std::vector<int>>& table() const noexcept { return delta_; }
  /// Every outgoing transition is a self-loop.
  bool is_sink(int state) const;
  /// Transition index inside transitions(from) leading to `to`, or -1.
  int transition_index(int from, int to) const;

  friend bool operator==(const Sfa& a, const Sfa& b) {
    return a.atoms_ == b.atoms_ && a.initial_ == b.initial_ && a.accepting_ == b.accepting_ &&
           a.delta_ == b.delta_;
  }

 private:
  std::vector<std::string> atoms_;
  int initial_ = 0;
  std::vector<bool> accepting_;
  std::vector<std::vector<int>> delta_;
  std::vector<std::vector<Transition>> transitions_;
};

struct CompileOptions {
  std::size_t max_states = 4096;
  /// Extra atoms to include in the alphabet even if absent from the formula.
  std::vector<std::string> extra_atoms = {};
};

/// Deterministic complete minimal automaton accepting exactly the non-empty
/// traces that satisfy `f`.
Sfa compile(const Formula& f, const CompileOptions& options = {});

struct RunResult {
  std::vector<int> states;  // |trace| + 1 entries
  bool accepted = false;
};

RunResult run(const Sfa& a, const Trace& trace);
RunResult run(const Sfa& a, std::span<const std::uint32_t> letters);

/// Language-equivalent automaton with the minimum number of states, numbered
/// in breadth-first order from the initial state.
Sfa minimize(const Sfa& a);

/// Exhaustively compares acceptance with eval_trace for all traces of length
/// 1..max_len.  Throws DomainError when the enumeration exceeds `max_traces`.
bool check_equiv(const Sfa& a, const Formula& f, int max_len, std::uint64_t max_traces = 50'000'000);

enum class ExportFormat { Dot, Json };

std::string export_sfa(const Sfa& a, ExportFormat format);
/// Inverse of export_sfa(a, ExportFormat::Json).
Sfa import_sfa_json(std::string_view text);

}  // namespace ltlfgen
