#pragma once

// Finite-domain constraint expressions (a MiniZinc-flavoured subset) and the
// symbolic domains their variables range over.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltlfgen {

/// Every non-integer label of every domain, sorted lexicographically and
/// densely numbered, so enumerations compare across domains.
class Universe {
 public:
  Universe() = default;
  explicit Universe(std::vector<std::string> labels);

  std::optional<int> find(std::string_view label) const;
  const std::string& label(int index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::string> labels_;
};

struct Domain {
  std::string name;
  bool enumerated = false;
  std::vector<int> values;          // ascending
  std::vector<std::string> labels;  // symbolic text, parallel to values

  static Domain range(std::string name, int lo, int hi);
  /// Labels are mapped through the universe, then sorted by index.
  static Domain enumeration(std::string name, const std::vector<std::string>& labels, const Universe& u);

  std::size_t size() const noexcept { return values.size(); }
  bool contains(int v) const;
  std::string label_of(int v) const;
  /// Parses a symbolic label (integer text for ranges, enum name otherwise).
  std::optional<int> value_of(std::string_view label) const;

  friend bool operator==(const Domain&, const Domain&) = default;
};

enum class ExprOp {
  Int,
  Bool,
  Var,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Not,
  And,
  Or,
  Implies,
  Iff,
  In,
  AllDifferent,
  AllEqual,
};

struct Expr {
  ExprOp op = ExprOp::Bool;
  int value = 0;            // Int / Bool literal, Var parameter index
  std::vector<Expr> args;   // operands, list elements
  std::vector<int> set;     // In: sorted members

  bool is_bool() const noexcept;
};

/// Parses `body` against the parameter list; identifiers that are not
/// parameters must be enumeration labels of the universe.
Expr parse_expression(std::string_view body, const std::vector<std::string>& params, const Universe& universe);

/// Division or modulo by zero makes the enclosing comparison false.
bool eval_expression(const Expr& e, std::span<const int> args);

struct ConstraintDef {
  std::string name;
  std::vector<std::string> params;
  std::string body;
  Expr expr;
  std::vector<Domain> param_domains;

  static ConstraintDef make(std::string name, std::vector<std::string> params, std::string body,
                            std::vector<Domain> param_domains, const Universe& universe);
};

using Assignment = std::map<std::string, int>;

/// Truth value of the constraint; throws DomainError if a parameter is missing
/// or assigned outside its domain.
bool eval_constraint(const ConstraintDef& c, const Assignment& a);
bool eval_constraint(const ConstraintDef& c, std::span<const int> args);

}  // namespace ltlfgen
