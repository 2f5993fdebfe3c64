#include "ltlfgen/constraint.hpp"

#include <algorithm>
#include <cctype>

#include "ltlfgen/error.hpp"

namespace ltlfgen {

Universe::Universe(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

std::optional<int> Universe::find(std::string_view label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<int>(it - labels_.begin());
}

Domain Domain::range(std::string name, int lo, int hi) {
  if (lo > hi) throw ValidationError("domain '" + name + "' has an empty range");
  Domain d;
  d.name = std::move(name);
  for (int v = lo; v <= hi; ++v) {
    d.values.push_back(v);
    d.labels.push_back(std::to_string(v));
  }
  return d;
}

Domain Domain::enumeration(std::string name, const std::vector<std::string>& labels, const Universe& u) {
  if (labels.empty()) throw ValidationError("domain '" + name + "' has no labels");
  Domain d;
  d.name = std::move(name);
  d.enumerated = true;
  std::vector<std::pair<int, std::string>> items;
  for (const auto& l : labels) {
    auto idx = u.find(l);
    if (!idx) throw ValidationError("label '" + l + "' missing from the enumeration universe");
    items.emplace_back(*idx, l);
  }
  std::sort(items.begin(), items.end());
  if (std::adjacent_find(items.begin(), items.end()) != items.end())
    throw ValidationError("domain '" + d.name + "' has duplicate labels");
  for (auto& [v, l] : items) {
    d.values.push_back(v);
    d.labels.push_back(std::move(l));
  }
  return d;
}

bool Domain::contains(int v) const { return std::binary_search(values.begin(), values.end(), v); }

std::string Domain::label_of(int v) const {
  auto it = std::lower_bound(values.begin(), values.end(), v);
  if (it == values.end() || *it != v)
    throw DomainError("value " + std::to_string(v) + " is outside domain '" + name + "'");
  return labels[it - values.begin()];
}

std::optional<int> Domain::value_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return values[i];
  return std::nullopt;
}

bool Expr::is_bool() const noexcept {
  switch (op) {
    case ExprOp::Int:
    case ExprOp::Var:
    case ExprOp::Neg:
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Mod:
      return false;
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Tok {
  enum Kind { End, Int, Ident, Sym } kind;
  std::string text;
  std::size_t pos;
  long long number = 0;
};

std::vector<Tok> lex(std::string_view s) {
  static const char* kSyms[] = {"<->", "/\\", "\\/", "->", "!=", "<=", ">=", "==", "..", "+", "-",
                                "*",   "=",   "<",   ">",  "(",  ")",  "[",  "]",  "{",  "}",  ","};
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      Tok t{Tok::Int, std::string(s.substr(i, j - i)), i};
      if (t.text.size() > 9) throw ParseError(i, "integer literal too large");
      t.number = std::stoll(t.text);
      out.push_back(t);
      i = j;
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), i});
      i = j;
      continue;
    }
    bool found = false;
    for (const char* sym : kSyms) {
      std::string_view v(sym);
      if (s.substr(i, v.size()) == v) {
        out.push_back({Tok::Sym, std::string(v), i});
        i += v.size();
        found = true;
        break;
      }
    }
    if (!found) throw ParseError(i, "unexpected character '" + std::string(1, s[i]) + "'");
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class ExprParser {
 public:
  ExprParser(std::string_view text, const std::vector<std::string>& params, const Universe& u)
      : toks_(lex(text)), params_(params), universe_(u) {}

  Expr parse() {
    Expr e = iff();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    need_bool(e, toks_.front().pos);
    return e;
  }

 private:
  const Tok& peek() const { return toks_[pos_]; }
  bool is(const char* sym) const { return peek().kind != Tok::Int && peek().text == sym; }
  Tok take() { return toks_[pos_++]; }
  void expect(const char* sym) {
    if (!is(sym)) fail(std::string("expected '") + sym + "'");
    take();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(peek().pos, peek().kind == Tok::End ? "unexpected end of input" : msg);
  }
  static void need_bool(const Expr& e, std::size_t pos) {
    if (!e.is_bool()) throw ParseError(pos, "expected a Boolean expression");
  }
  static void need_int(const Expr& e, std::size_t pos) {
    if (e.is_bool()) throw ParseError(pos, "expected an integer expression");
  }
  static Expr node(ExprOp op, std::vector<Expr> args) {
    Expr e;
    e.op = op;
    e.args = std::move(args);
    return e;
  }

  Expr iff() {
    const std::size_t at = peek().pos;
    Expr l = implies();
    while (is("<->")) {
      take();
      Expr r = implies();
      need_bool(l, at);
      need_bool(r, at);
      l = node(ExprOp::Iff, {std::move(l), std::move(r)});
    }
    return l;
  }
  Expr implies() {
    const std::size_t at = peek().pos;
    Expr l = disj();
    if (is("->")) {
      take();
      Expr r = implies();
      need_bool(l, at);
      need_bool(r, at);
      return node(ExprOp::Implies, {std::move(l), std::move(r)});
    }
    return l;
  }
  Expr disj() {
    const std::size_t at = peek().pos;
    Expr l = conj();
    while (is("\\/")) {
      take();
      Expr r = conj();
      need_bool(l, at);
      need_bool(r, at);
      l = node(ExprOp::Or, {std::move(l), std::move(r)});
    }
    return l;
  }
  Expr conj() {
    const std::size_t at = peek().pos;
    Expr l = negation();
    while (is("/\\")) {
      take();
      Expr r = negation();
      need_bool(l, at);
      need_bool(r, at);
      l = node(ExprOp::And, {std::move(l), std::move(r)});
    }
    return l;
  }
  Expr negation() {
    if (peek().kind == Tok::Ident && peek().text == "not") {
      const std::size_t at = take().pos;
      Expr e = negation();
      need_bool(e, at);
      return node(ExprOp::Not, {std::move(e)});
    }
    return comparison();
  }
  Expr comparison() {
    const std::size_t at = peek().pos;
    Expr l = additive();
    static const std::pair<const char*, ExprOp> kCmp[] = {{"==", ExprOp::Eq}, {"=", ExprOp::Eq},
                                                          {"!=", ExprOp::Ne}, {"<=", ExprOp::Le},
                                                          {">=", ExprOp::Ge}, {"<", ExprOp::Lt},
                                                          {">", ExprOp::Gt}};
    for (const auto& [sym, op] : kCmp) {
      if (is(sym)) {
        take();
        Expr r = additive();
        if ((op == ExprOp::Eq || op == ExprOp::Ne) && l.is_bool() && r.is_bool()) {
          Expr same = node(ExprOp::Iff, {std::move(l), std::move(r)});
          return op == ExprOp::Eq ? same : node(ExprOp::Not, {std::move(same)});
        }
        need_int(l, at);
        need_int(r, at);
        return node(op, {std::move(l), std::move(r)});
      }
    }
    if (peek().kind == Tok::Ident && peek().text == "in") {
      take();
      need_int(l, at);
      Expr e = node(ExprOp::In, {std::move(l)});
      e.set = set_literal();
      return e;
    }
    return l;
  }
  std::vector<int> set_literal() {
    std::vector<int> members;
    if (is("{")) {
      take();
      if (!is("}")) {
        for (;;) {
          const int lo = constant();
          if (is("..")) {
            take();
            const int hi = constant();
            for (int v = lo; v <= hi; ++v) members.push_back(v);
          } else {
            members.push_back(lo);
          }
          if (!is(",")) break;
          take();
        }
      }
      expect("}");
    } else {
      const int lo = constant();
      expect("..");
      const int hi = constant();
      for (int v = lo; v <= hi; ++v) members.push_back(v);
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    return members;
  }
  int constant() {
    bool neg = false;
    if (is("-")) {
      take();
      neg = true;
    }
    const Tok& t = peek();
    if (t.kind == Tok::Int) {
      take();
      return static_cast<int>(neg ? -t.number : t.number);
    }
    if (t.kind == Tok::Ident && !neg) {
      if (auto idx = universe_.find(t.text)) {
        take();
        return *idx;
      }
      throw ParseError(t.pos, "unknown enumeration label '" + t.text + "'");
    }
    fail("expected a constant");
  }
  Expr additive() {
    const std::size_t at = peek().pos;
    Expr l = multiplicative();
    while (is("+") || is("-")) {
      const ExprOp op = take().text == "+" ? ExprOp::Add : ExprOp::Sub;
      Expr r = multiplicative();
      need_int(l, at);
      need_int(r, at);
      l = node(op, {std::move(l), std::move(r)});
    }
    return l;
  }
  Expr multiplicative() {
    const std::size_t at = peek().pos;
    Expr l = unary();
    for (;;) {
      ExprOp op;
      if (is("*")) op = ExprOp::Mul;
      else if (peek().kind == Tok::Ident && peek().text == "div") op = ExprOp::Div;
      else if (peek().kind == Tok::Ident && peek().text == "mod") op = ExprOp::Mod;
      else break;
      take();
      Expr r = unary();
      need_int(l, at);
      need_int(r, at);
      l = node(op, {std::move(l), std::move(r)});
    }
    return l;
  }
  Expr unary() {
    if (is("-")) {
      const std::size_t at = take().pos;
      Expr e = unary();
      need_int(e, at);
      return node(ExprOp::Neg, {std::move(e)});
    }
    return primary();
  }
  std::vector<Expr> int_list() {
    expect("(");
    expect("[");
    std::vector<Expr> items;
    if (!is("]")) {
      for (;;) {
        const std::size_t at = peek().pos;
        Expr e = additive();
        need_int(e, at);
        items.push_back(std::move(e));
        if (!is(",")) break;
        take();
      }
    }
    expect("]");
    expect(")");
    return items;
  }
  Expr primary() {
    const Tok t = peek();
    if (t.kind == Tok::Int) {
      take();
      Expr e;
      e.op = ExprOp::Int;
      e.value = static_cast<int>(t.number);
      return e;
    }
    if (t.kind == Tok::Ident) {
      take();
      if (t.text == "true" || t.text == "false") {
        Expr e;
        e.op = ExprOp::Bool;
        e.value = t.text == "true";
        return e;
      }
      if (t.text == "all_different" || t.text == "alldifferent")
        return node(ExprOp::AllDifferent, int_list());
      if (t.text == "all_equal") return node(ExprOp::AllEqual, int_list());
      auto it = std::find(params_.begin(), params_.end(), t.text);
      if (it != params_.end()) {
        Expr e;
        e.op = ExprOp::Var;
        e.value = static_cast<int>(it - params_.begin());
        return e;
      }
      if (auto idx = universe_.find(t.text)) {
        Expr e;
        e.op = ExprOp::Int;
        e.value = *idx;
        return e;
      }
      throw ValidationError("unknown variable " + t.text);
    }
    if (is("(")) {
      take();
      Expr e = iff();
      expect(")");
      return e;
    }
    fail("unexpected '" + t.text + "'");
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
  const std::vector<std::string>& params_;
  const Universe& universe_;
};

std::optional<long long> eval_int(const Expr& e, std::span<const int> args) {
  switch (e.op) {
    case ExprOp::Int:
      return e.value;
    case ExprOp::Var:
      return args[e.value];
    case ExprOp::Neg: {
      auto v = eval_int(e.args[0], args);
      return v ? std::optional<long long>(-*v) : std::nullopt;
    }
    default:
      break;
  }
  auto l = eval_int(e.args[0], args);
  auto r = eval_int(e.args[1], args);
  if (!l || !r) return std::nullopt;
  switch (e.op) {
    case ExprOp::Add:
      return *l + *r;
    case ExprOp::Sub:
      return *l - *r;
    case ExprOp::Mul:
      return *l * *r;
    case ExprOp::Div:
      if (*r == 0) return std::nullopt;
      return *l / *r;
    case ExprOp::Mod:
      if (*r == 0) return std::nullopt;
      return *l % *r;
    default:
      return std::nullopt;
  }
}

}  // namespace

Expr parse_expression(std::string_view body, const std::vector<std::string>& params, const Universe& universe) {
  return ExprParser(body, params, universe).parse();
}

bool eval_expression(const Expr& e, std::span<const int> args) {
  switch (e.op) {
    case ExprOp::Bool:
      return e.value != 0;
    case ExprOp::Not:
      return !eval_expression(e.args[0], args);
    case ExprOp::And:
      return eval_expression(e.args[0], args) && eval_expression(e.args[1], args);
    case ExprOp::Or:
      return eval_expression(e.args[0], args) || eval_expression(e.args[1], args);
    case ExprOp::Implies:
      return !eval_expression(e.args[0], args) || eval_expression(e.args[1], args);
    case ExprOp::Iff:
      return eval_expression(e.args[0], args) == eval_expression(e.args[1], args);
    case ExprOp::Eq:
    case ExprOp::Ne:
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge: {
      auto l = eval_int(e.args[0], args);
      auto r = eval_int(e.args[1], args);
      if (!l || !r) return false;
      switch (e.op) {
        case ExprOp::Eq:
          return *l == *r;
        case ExprOp::Ne:
          return *l != *r;
        case ExprOp::Lt:
          return *l < *r;
        case ExprOp::Le:
          return *l <= *r;
        case ExprOp::Gt:
          return *l > *r;
        default:
          return *l >= *r;
      }
    }
    case ExprOp::In: {
      auto v = eval_int(e.args[0], args);
      if (!v || *v < INT32_MIN || *v > INT32_MAX) return false;
      return std::binary_search(e.set.begin(), e.set.end(), static_cast<int>(*v));
    }
    case ExprOp::AllDifferent:
    case ExprOp::AllEqual: {
      std::vector<long long> vals;
      for (const auto& a : e.args) {
        auto v = eval_int(a, args);
        if (!v) return false;
        vals.push_back(*v);
      }
      if (e.op == ExprOp::AllEqual)
        return std::adjacent_find(vals.begin(), vals.end(), std::not_equal_to<>()) == vals.end();
      std::sort(vals.begin(), vals.end());
      return std::adjacent_find(vals.begin(), vals.end()) == vals.end();
    }
    default:
      throw ValidationError("integer expression used as a constraint");
  }
}

ConstraintDef ConstraintDef::make(std::string name, std::vector<std::string> params, std::string body,
                                  std::vector<Domain> param_domains, const Universe& universe) {
  if (params.size() != param_domains.size())
    throw ValidationError("constraint '" + name + "' needs one domain per parameter");
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = i + 1; j < params.size(); ++j)
      if (params[i] == params[j]) throw ValidationError("constraint '" + name + "' repeats parameter " + params[i]);
  ConstraintDef c;
  c.expr = parse_expression(body, params, universe);
  c.name = std::move(name);
  c.params = std::move(params);
  c.body = std::move(body);
  c.param_domains = std::move(param_domains);
  return c;
}

bool eval_constraint(const ConstraintDef& c, std::span<const int> args) {
  if (args.size() != c.params.size())
    throw DomainError("constraint '" + c.name + "' expects " + std::to_string(c.params.size()) + " arguments");
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!c.param_domains[i].contains(args[i]))
      throw DomainError("value " + std::to_string(args[i]) + " for " + c.params[i] + " is outside domain '" +
                        c.param_domains[i].name + "'");
  return eval_expression(c.expr, args);
}

bool eval_constraint(const ConstraintDef& c, const Assignment& a) {
  std::vector<int> args;
  args.reserve(c.params.size());
  for (const auto& p : c.params) {
    auto it = a.find(p);
    if (it == a.end()) throw DomainError("assignment does not cover parameter " + p + " of '" + c.name + "'");
    args.push_back(it->second);
  }
  return eval_constraint(c, args);
}

}  // namespace ltlfgen
