#pragma once

// Propositional transition guards over a fixed, sorted atom list, kept in a
// canonical sum-of-products form so that equal guards print identically.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ltlfgen/formula.hpp"

namespace ltlfgen {

/// Conjunction of literals: atom i occurs iff bit i of `care` is set, with
/// polarity given by bit i of `value`.
struct Cube {
  std::uint32_t care = 0;
  std::uint32_t value = 0;

  bool matches(std::uint32_t letter) const noexcept { return (letter & care) == value; }
  friend bool operator==(const Cube&, const Cube&) = default;
};

class Guard {
 public:
  static constexpr std::size_t kMaxAtoms = 20;

  Guard() = default;  // "false" over no atoms

  /// `truth[letter]` for every letter in [0, 2^|atoms|).
  static Guard from_truth_table(std::vector<std::string> atoms, const std::vector<bool>& truth);
  static Guard from_formula(const Formula& f, std::vector<std::string> atoms);
  /// Parses the ASCII propositional syntax; atoms must be a subset of `atoms`.
  static Guard parse(std::string_view text, std::vector<std::string> atoms);
  /// A single cube; literals not listed are unconstrained.
  static Guard cube(std::vector<std::string> atoms, const Valuation& literals);

  const std::vector<std::string>& atoms() const noexcept { return atoms_; }
  const std::vector<Cube>& cubes() const noexcept { return cubes_; }

  bool eval(std::uint32_t letter) const noexcept;
  /// Throws if an atom is missing from the valuation.
  bool eval(const Valuation& v) const;
  std::uint32_t letter_of(const Valuation& v) const;

  std::vector<std::uint32_t> minterms() const;
  bool is_true() const noexcept { return cubes_.size() == 1 && cubes_[0].care == 0; }
  bool is_false() const noexcept { return cubes_.empty(); }

  /// Atoms occurring in at least one cube of the canonical form.
  std::vector<std::string> mentioned_atoms() const;
  bool mentions(std::string_view atom) const;

  /// Canonical text, e.g. "p & !r | q", "true", "false".
  std::string to_string() const;
  Formula to_formula() const;

  /// Conjunction; both guards must range over the same atom list.
  Guard operator&(const Guard& other) const;
  Guard operator!() const;

  /// Re-expresses the guard over a superset atom list.
  Guard widen(const std::vector<std::string>& atoms) const;

  friend bool operator==(const Guard&, const Guard&) = default;

 private:
  Guard(std::vector<std::string> atoms, std::vector<Cube> cubes)
      : atoms_(std::move(atoms)), cubes_(std::move(cubes)) {}
  std::vector<bool> truth_table() const;

  std::vector<std::string> atoms_;
  std::vector<Cube> cubes_;
};

}  // namespace ltlfgen
