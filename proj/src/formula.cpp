#include "ltlfgen/formula.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "ltlfgen/error.hpp"

namespace ltlfgen {

int arity(Op op) noexcept {
  switch (op) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return 0;
    case Op::Not:
    case Op::Next:
    case Op::WeakNext:
    case Op::Globally:
    case Op::Finally:
      return 1;
    default:
      return 2;
  }
}

Formula::Formula() : node_(std::make_shared<const Node>()) {}

Formula Formula::top() { return Formula(); }

Formula Formula::bottom() {
  Node n;
  n.op = Op::False;
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::atom(std::string name) {
  Node n;
  n.op = Op::Atom;
  n.name = std::move(name);
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::unary(Op op, Formula child) {
  Node n;
  n.op = op;
  n.lhs = std::make_shared<const Formula>(std::move(child));
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::binary(Op op, Formula lhs, Formula rhs) {
  Node n;
  n.op = op;
  n.lhs = std::make_shared<const Formula>(std::move(lhs));
  n.rhs = std::make_shared<const Formula>(std::move(rhs));
  return Formula(std::make_shared<const Node>(std::move(n)));
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (arity(a.op())) {
    case 0:
      return a.name() == b.name();
    case 1:
      return a.child() == b.child();
    default:
      return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Iff:
      return 1;
    case Op::Implies:
      return 2;
    case Op::Or:
      return 3;
    case Op::And:
      return 4;
    case Op::Until:
    case Op::Release:
      return 5;
    case Op::Not:
    case Op::Next:
    case Op::WeakNext:
    case Op::Globally:
    case Op::Finally:
      return 6;
    default:
      return 7;
  }
}

bool right_assoc(Op op) {
  return op == Op::Iff || op == Op::Implies || op == Op::Until || op == Op::Release;
}

struct Symbols {
  const char* top;
  const char* bottom;
  const char* neg;
  const char* conj;
  const char* disj;
  const char* impl;
  const char* iff;
  const char* next;
  const char* wnext;
  const char* glob;
  const char* fin;
};

constexpr Symbols kAscii{"true", "false", "!", " & ", " | ", " -> ", " <-> ", "X ", "WX ", "G ", "F "};
constexpr Symbols kUnicode{"⊤", "⊥", "¬", " ∧ ", " ∨ ", " → ", " ↔ ", "◯", "●", "□", "◊"};

void print(const Formula& f, const Symbols& sym, std::string& out) {
  auto wrap = [&](const Formula& c, bool parens) {
    if (parens) out += '(';
    print(c, sym, out);
    if (parens) out += ')';
  };
  const int prec = precedence(f.op());
  switch (f.op()) {
    case Op::True:
      out += sym.top;
      return;
    case Op::False:
      out += sym.bottom;
      return;
    case Op::Atom:
      out += f.name();
      return;
    case Op::Not:
    case Op::Next:
    case Op::WeakNext:
    case Op::Globally:
    case Op::Finally: {
      const char* s = f.op() == Op::Not        ? sym.neg
                      : f.op() == Op::Next     ? sym.next
                      : f.op() == Op::WeakNext ? sym.wnext
                      : f.op() == Op::Globally ? sym.glob
                                               : sym.fin;
      out += s;
      wrap(f.child(), precedence(f.child().op()) < prec);
      return;
    }
    default: {
      const char* s = f.op() == Op::And       ? sym.conj
                      : f.op() == Op::Or      ? sym.disj
                      : f.op() == Op::Implies ? sym.impl
                      : f.op() == Op::Iff     ? sym.iff
                      : f.op() == Op::Until   ? " U "
                                              : " R ";
      const int pl = precedence(f.lhs().op());
      const int pr = precedence(f.rhs().op());
      // U and R share a level, so a mixed chain needs explicit grouping.
      const bool same_level_l = pl == prec && f.lhs().op() != f.op();
      const bool same_level_r = pr == prec && f.rhs().op() != f.op();
      if (right_assoc(f.op())) {
        wrap(f.lhs(), pl <= prec);
        out += s;
        wrap(f.rhs(), pr < prec || same_level_r);
      } else {
        wrap(f.lhs(), pl < prec || same_level_l);
        out += s;
        wrap(f.rhs(), pr <= prec);
      }
      return;
    }
  }
}

}  // namespace

std::string to_string(const Formula& f, Syntax syntax) {
  std::string out;
  print(f, syntax == Syntax::Ascii ? kAscii : kUnicode, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok {
  End,
  LParen,
  RParen,
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
  True,
  False,
  Ident,
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  static const std::vector<std::pair<std::string_view, Tok>> kSymbols = {
      {"<->", Tok::Iff}, {"->", Tok::Implies}, {"(", Tok::LParen}, {")", Tok::RParen},
      {"!", Tok::Not},   {"&", Tok::And},      {"|", Tok::Or},     {"¬", Tok::Not},
      {"∧", Tok::And},   {"∨", Tok::Or},       {"→", Tok::Implies}, {"↔", Tok::Iff},
      {"◯", Tok::Next},  {"●", Tok::WeakNext}, {"□", Tok::Globally}, {"◊", Tok::Finally},
      {"⊤", Tok::True},  {"⊥", Tok::False},
  };
  static const std::unordered_map<std::string, Tok> kKeywords = {
      {"X", Tok::Next},    {"WX", Tok::WeakNext}, {"G", Tok::Globally}, {"F", Tok::Finally},
      {"U", Tok::Until},   {"R", Tok::Release},   {"true", Tok::True},  {"false", Tok::False},
  };
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      std::string word(s.substr(i, j - i));
      auto kw = kKeywords.find(word);
      out.push_back({kw == kKeywords.end() ? Tok::Ident : kw->second, i, word});
      i = j;
      continue;
    }
    bool matched = false;
    for (const auto& [text, kind] : kSymbols) {
      if (s.substr(i, text.size()) == text) {
        out.push_back({kind, i, std::string(text)});
        i += text.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(i, "unexpected character '" + std::string(1, s[i]) + "'");
  }
  out.push_back({Tok::End, s.size(), ""});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>* known)
      : tokens_(tokenize(text)), known_(known) {}

  Formula parse() {
    Formula f = iff();
    if (peek().kind != Tok::End) fail("unexpected token '" + peek().text + "'");
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  Token next() { return tokens_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(t.pos, t.kind == Tok::End ? "unexpected end of input" : msg);
  }

  Formula iff() {
    Formula lhs = implies();
    if (peek().kind == Tok::Iff) {
      next();
      return Formula::binary(Op::Iff, lhs, iff());
    }
    return lhs;
  }
  Formula implies() {
    Formula lhs = disj();
    if (peek().kind == Tok::Implies) {
      next();
      return Formula::binary(Op::Implies, lhs, implies());
    }
    return lhs;
  }
  Formula disj() {
    Formula f = conj();
    while (peek().kind == Tok::Or) {
      next();
      f = Formula::binary(Op::Or, f, conj());
    }
    return f;
  }
  Formula conj() {
    Formula f = until();
    while (peek().kind == Tok::And) {
      next();
      f = Formula::binary(Op::And, f, until());
    }
    return f;
  }
  Formula until() {
    Formula lhs = unary();
    if (peek().kind == Tok::Until || peek().kind == Tok::Release) {
      Op op = next().kind == Tok::Until ? Op::Until : Op::Release;
      return Formula::binary(op, lhs, until());
    }
    return lhs;
  }
  Formula unary() {
    switch (peek().kind) {
      case Tok::Not:
        next();
        return Formula::unary(Op::Not, unary());
      case Tok::Next:
        next();
        return Formula::unary(Op::Next, unary());
      case Tok::WeakNext:
        next();
        return Formula::unary(Op::WeakNext, unary());
      case Tok::Globally:
        next();
        return Formula::unary(Op::Globally, unary());
      case Tok::Finally:
        next();
        return Formula::unary(Op::Finally, unary());
      default:
        return primary();
    }
  }
  Formula primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::True:
        next();
        return Formula::top();
      case Tok::False:
        next();
        return Formula::bottom();
      case Tok::Ident: {
        if (known_ && !known_->count(t.text))
          throw ParseError(t.pos, "unknown atom '" + t.text + "'");
        next();
        return Formula::atom(t.text);
      }
      case Tok::LParen: {
        next();
        Formula f = iff();
        if (peek().kind != Tok::RParen) fail("expected ')' but found '" + peek().text + "'");
        next();
        return f;
      }
      default:
        fail("unexpected token '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const std::set<std::string>* known_;
};

}  // namespace

Formula parse_formula(std::string_view text, const std::set<std::string>* known_atoms) {
  return Parser(text, known_atoms).parse();
}

Formula parse_formula(std::string_view text, const std::set<std::string>& known_atoms) {
  return Parser(text, &known_atoms).parse();
}

// ---------------------------------------------------------------------------
// Structural queries

namespace {

void collect_occurrences(const Formula& f, std::vector<std::string>& out) {
  switch (arity(f.op())) {
    case 0:
      if (f.op() == Op::Atom) out.push_back(f.name());
      return;
    case 1:
      collect_occurrences(f.child(), out);
      return;
    default:
      collect_occurrences(f.lhs(), out);
      collect_occurrences(f.rhs(), out);
  }
}

Formula rename_impl(const Formula& f, const std::function<std::string(const std::string&, int)>& rename,
                    std::map<std::string, int>& seen) {
  switch (arity(f.op())) {
    case 0:
      if (f.op() != Op::Atom) return f;
      return Formula::atom(rename(f.name(), seen[f.name()]++));
    case 1:
      return Formula::unary(f.op(), rename_impl(f.child(), rename, seen));
    default: {
      Formula l = rename_impl(f.lhs(), rename, seen);
      Formula r = rename_impl(f.rhs(), rename, seen);
      return Formula::binary(f.op(), std::move(l), std::move(r));
    }
  }
}

}  // namespace

std::vector<std::string> atom_occurrences(const Formula& f) {
  std::vector<std::string> out;
  collect_occurrences(f, out);
  return out;
}

std::vector<std::string> atoms_of(const Formula& f) {
  std::vector<std::string> out = atom_occurrences(f);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Formula rename_atom_occurrences(const Formula& f,
                                const std::function<std::string(const std::string&, int)>& rename) {
  std::map<std::string, int> seen;
  return rename_impl(f, rename, seen);
}

bool is_propositional(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return true;
    case Op::Not:
      return is_propositional(f.child());
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff:
      return is_propositional(f.lhs()) && is_propositional(f.rhs());
    default:
      return false;
  }
}

bool is_nnf(const Formula& f) {
  switch (f.op()) {
    case Op::True:
    case Op::False:
    case Op::Atom:
      return true;
    case Op::Not:
      return f.child().op() == Op::Atom;
    case Op::Implies:
    case Op::Iff:
    case Op::Globally:
    case Op::Finally:
      return false;
    case Op::Next:
    case Op::WeakNext:
      return is_nnf(f.child());
    default:
      return is_nnf(f.lhs()) && is_nnf(f.rhs());
  }
}

// ---------------------------------------------------------------------------
// Negation normal form

namespace {

Formula nnf(const Formula& f, bool negated) {
  using F = Formula;
  switch (f.op()) {
    case Op::True:
      return negated ? F::bottom() : f;
    case Op::False:
      return negated ? F::top() : f;
    case Op::Atom:
      return negated ? F::unary(Op::Not, f) : f;
    case Op::Not:
      return nnf(f.child(), !negated);
    case Op::And:
      return F::binary(negated ? Op::Or : Op::And, nnf(f.lhs(), negated), nnf(f.rhs(), negated));
    case Op::Or:
      return F::binary(negated ? Op::And : Op::Or, nnf(f.lhs(), negated), nnf(f.rhs(), negated));
    case Op::Implies:
      if (negated) return F::binary(Op::And, nnf(f.lhs(), false), nnf(f.rhs(), true));
      return F::binary(Op::Or, nnf(f.lhs(), true), nnf(f.rhs(), false));
    case Op::Iff: {
      F lp = nnf(f.lhs(), false), ln = nnf(f.lhs(), true);
      F rp = nnf(f.rhs(), false), rn = nnf(f.rhs(), true);
      if (negated) return F::binary(Op::Or, F::binary(Op::And, lp, rn), F::binary(Op::And, ln, rp));
      return F::binary(Op::Or, F::binary(Op::And, lp, rp), F::binary(Op::And, ln, rn));
    }
    case Op::Next:
      return F::unary(negated ? Op::WeakNext : Op::Next, nnf(f.child(), negated));
    case Op::WeakNext:
      return F::unary(negated ? Op::Next : Op::WeakNext, nnf(f.child(), negated));
    case Op::Globally:
      // G a == false R a ; !G a == true U !a
      if (negated) return F::binary(Op::Until, F::top(), nnf(f.child(), true));
      return F::binary(Op::Release, F::bottom(), nnf(f.child(), false));
    case Op::Finally:
      if (negated) return F::binary(Op::Release, F::bottom(), nnf(f.child(), true));
      return F::binary(Op::Until, F::top(), nnf(f.child(), false));
    case Op::Until:
      return F::binary(negated ? Op::Release : Op::Until, nnf(f.lhs(), negated), nnf(f.rhs(), negated));
    case Op::Release:
      return F::binary(negated ? Op::Until : Op::Release, nnf(f.lhs(), negated), nnf(f.rhs(), negated));
  }
  return f;
}

}  // namespace

Formula to_nnf(const Formula& f) {
  if (is_nnf(f)) return f;
  return nnf(f, false);
}

// ---------------------------------------------------------------------------
// Trace semantics

TraceEvaluator::TraceEvaluator(const Formula& f, std::vector<std::string> atoms)
    : atoms_(std::move(atoms)) {
  std::unordered_map<const void*, int> index;
  std::function<int(const Formula&)> flatten = [&](const Formula& g) -> int {
    if (auto it = index.find(g.id()); it != index.end()) return it->second;
    Flat node{g.op()};
    switch (arity(g.op())) {
      case 0:
        if (g.op() == Op::Atom) {
          auto it = std::find(atoms_.begin(), atoms_.end(), g.name());
          if (it == atoms_.end()) throw ValidationError("atom '" + g.name() + "' is not defined by the trace");
          node.atom = static_cast<int>(it - atoms_.begin());
        }
        break;
      case 1:
        node.a = flatten(g.child());
        break;
      default:
        node.a = flatten(g.lhs());
        node.b = flatten(g.rhs());
    }
    nodes_.push_back(node);
    const int id = static_cast<int>(nodes_.size()) - 1;
    index.emplace(g.id(), id);
    return id;
  };
  flatten(f);
}

bool TraceEvaluator::operator()(std::span<const std::uint32_t> letters) const {
  const int n = static_cast<int>(letters.size());
  if (n == 0) throw ValidationError("traces must contain at least one step");
  std::vector<std::uint8_t> sat(nodes_.size() * static_cast<std::size_t>(n));
  auto at = [&](int node, int t) -> std::uint8_t& { return sat[static_cast<std::size_t>(node) * n + t]; };

  // Children always precede parents in nodes_, so one pass per node suffices;
  // each clause quantifies over positions exactly as in the inductive definition.
  for (int k = 0; k < static_cast<int>(nodes_.size()); ++k) {
    const Flat& nd = nodes_[k];
    for (int t = 0; t < n; ++t) {
      bool v = false;
      switch (nd.op) {
        case Op::True:
          v = true;
          break;
        case Op::False:
          v = false;
          break;
        case Op::Atom:
          v = (letters[t] >> nd.atom) & 1u;
          break;
        case Op::Not:
          v = !at(nd.a, t);
          break;
        case Op::And:
          v = at(nd.a, t) && at(nd.b, t);
          break;
        case Op::Or:
          v = at(nd.a, t) || at(nd.b, t);
          break;
        case Op::Implies:
          v = !at(nd.a, t) || at(nd.b, t);
          break;
        case Op::Iff:
          v = at(nd.a, t) == at(nd.b, t);
          break;
        case Op::Next:
          v = t + 1 < n && at(nd.a, t + 1);
          break;
        case Op::WeakNext:
          v = t + 1 == n || at(nd.a, t + 1);
          break;
        case Op::Globally:
          v = true;
          for (int u = t; u < n && v; ++u) v = at(nd.a, u);
          break;
        case Op::Finally:
          for (int u = t; u < n && !v; ++u) v = at(nd.a, u);
          break;
        case Op::Until:
          // exists u >= t with b at u and a at every t <= w < u
          for (int u = t; u < n && !v; ++u) {
            if (!at(nd.b, u)) continue;
            bool guard = true;
            for (int w = t; w < u && guard; ++w) guard = at(nd.a, w);
            v = guard;
          }
          break;
        case Op::Release:
          // b holds up to and including the first a; forever if a never holds
          v = true;
          for (int u = t; u < n && v; ++u) {
            if (at(nd.b, u)) continue;
            bool released = false;
            for (int w = t; w < u && !released; ++w) released = at(nd.a, w);
            v = released;
          }
          break;
      }
      at(k, t) = v ? 1 : 0;
    }
  }
  return at(static_cast<int>(nodes_.size()) - 1, 0) != 0;
}

bool eval_trace(const Formula& f, const Trace& trace) {
  if (trace.empty()) throw ValidationError("traces must contain at least one step");
  std::vector<std::string> atoms = atoms_of(f);
  if (atoms.size() > 32) throw DomainError("too many atoms for trace evaluation");
  std::vector<std::uint32_t> letters(trace.size(), 0);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      auto it = trace[t].find(atoms[i]);
      if (it == trace[t].end())
        throw ValidationError("atom '" + atoms[i] + "' undefined at step " + std::to_string(t));
      if (it->second) letters[t] |= 1u << i;
    }
  }
  return TraceEvaluator(f, atoms)(letters);
}

}  // namespace ltlfgen
