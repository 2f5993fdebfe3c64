#pragma once

// LTL over finite traces: abstract syntax, parsing, printing, negation normal
// form and the reference trace semantics.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltlfgen {

enum class Op {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Next,
  WeakNext,
  Globally,
  Finally,
  Until,
  Release,
};

int arity(Op op) noexcept;

/// Immutable formula tree with cheap copies (shared structure).
class Formula {
 public:
  Formula();  // true

  static Formula top();
  static Formula bottom();
  static Formula atom(std::string name);
  static Formula unary(Op op, Formula child);
  static Formula binary(Op op, Formula lhs, Formula rhs);

  Op op() const noexcept { return node_->op; }
  const std::string& name() const noexcept { return node_->name; }
  const Formula& lhs() const noexcept { return *node_->lhs; }
  const Formula& rhs() const noexcept { return *node_->rhs; }
  /// Only child of a unary node.
  const Formula& child() const noexcept { return *node_->lhs; }

  /// Identity of the shared node; equal pointers imply equal formulas.
  const void* id() const noexcept { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  struct Node {
    Op op = Op::True;
    std::string name;
    std::shared_ptr<const Formula> lhs;
    std::shared_ptr<const Formula> rhs;
  };
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// Convenience constructors.
inline Formula operator!(const Formula& f) { return Formula::unary(Op::Not, f); }
inline Formula operator&&(const Formula& a, const Formula& b) { return Formula::binary(Op::And, a, b); }
inline Formula operator||(const Formula& a, const Formula& b) { return Formula::binary(Op::Or, a, b); }

enum class Syntax { Ascii, Unicode };

/// Prints with the minimum parentheses needed for parse(print(f)) == f.
std::string to_string(const Formula& f, Syntax syntax = Syntax::Ascii);

/// Parses the ASCII (or Unicode) surface syntax.  When `known_atoms` is given,
/// every atom must belong to it.
Formula parse_formula(std::string_view text, const std::set<std::string>* known_atoms = nullptr);
Formula parse_formula(std::string_view text, const std::set<std::string>& known_atoms);

/// Sorted, de-duplicated atom names.
std::vector<std::string> atoms_of(const Formula& f);

/// Atom occurrences in textual (pre-order, left to right) order.
std::vector<std::string> atom_occurrences(const Formula& f);

/// Rebuilds the formula renaming every atom occurrence; `rename(name, k)`
/// receives the 0-based occurrence index k of that atom name.
Formula rename_atom_occurrences(const Formula& f,
                                const std::function<std::string(const std::string&, int)>& rename);

bool is_propositional(const Formula& f);
bool is_nnf(const Formula& f);

/// Negation normal form over {!, &, |, X, WX, U, R}; negation only on atoms.
Formula to_nnf(const Formula& f);

using Valuation = std::map<std::string, bool>;
using Trace = std::vector<Valuation>;

/// Satisfaction at the first step. Throws on empty traces or undefined atoms.
bool eval_trace(const Formula& f, const Trace& trace);

/// Reusable evaluator over bit-encoded letters: bit i of a letter is the value
/// of atoms[i].  Uses the inductive definitions directly (quantifier loops),
/// independent of the automaton construction.
class TraceEvaluator {
 public:
  TraceEvaluator(const Formula& f, std::vector<std::string> atoms);

  bool operator()(std::span<const std::uint32_t> letters) const;
  const std::vector<std::string>& atoms() const noexcept { return atoms_; }

 private:
  struct Flat {
    Op op;
    int atom = -1;
    int a = -1;
    int b = -1;
  };
  std::vector<std::string> atoms_;
  std::vector<Flat> nodes_;  // post-order; root is last
};

}  // namespace ltlfgen
