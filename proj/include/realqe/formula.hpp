#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/polynomial.hpp"
#include "realqe/rational.hpp"

namespace realqe {

enum class Kind : std::uint8_t {
  zero,
  one,
  variable,
  add,
  sub,
  mul,
  atom,
  conj,
  disj,
  neg,
  iff,
  exists,
  forall,
};

enum class Rel : std::uint8_t { lt, le, gt, ge, eq, ne };

inline const char* rel_symbol(Rel r) {
  switch (r) {
    case Rel::lt: return "<";
    case Rel::le: return "<=";
    case Rel::gt: return ">";
    case Rel::ge: return ">=";
    case Rel::eq: return "=";
    case Rel::ne: return "!=";
  }
  return "?";
}

/// Truth of `s rel 0` for a sign s in {-1, 0, 1}.
inline bool rel_holds(Rel r, int s) {
  switch (r) {
    case Rel::lt: return s < 0;
    case Rel::le: return s <= 0;
    case Rel::gt: return s > 0;
    case Rel::ge: return s >= 0;
    case Rel::eq: return s == 0;
    case Rel::ne: return s != 0;
  }
  return false;
}

/// Relation r' with (-p) r' 0 equivalent to p r 0.
inline Rel rel_flip(Rel r) {
  switch (r) {
    case Rel::lt: return Rel::gt;
    case Rel::le: return Rel::ge;
    case Rel::gt: return Rel::lt;
    case Rel::ge: return Rel::le;
    default: return r;
  }
}

inline Rel rel_negate(Rel r) {
  switch (r) {
    case Rel::lt: return Rel::ge;
    case Rel::le: return Rel::gt;
    case Rel::gt: return Rel::le;
    case Rel::ge: return Rel::lt;
    case Rel::eq: return Rel::ne;
    case Rel::ne: return Rel::eq;
  }
  return r;
}

/// Immutable first-order formula over the reals.
///
/// Arithmetic terms (constants 0 and 1, variables, binary + - *) and logical
/// formulas share one node type. Arithmetic nodes only occur below atoms.
/// Conjunction and disjunction are n-ary with at least two children; the
/// remaining connectives are unary or binary. Nodes are shared, so copying a
/// Formula is cheap and safe across threads.
class Formula {
public:
  Formula() = default;
  Formula(const Formula&) = default;
  Formula(Formula&&) noexcept = default;
  Formula& operator=(const Formula&) = default;
  Formula& operator=(Formula&&) noexcept = default;
  /// Releases uniquely owned subtrees iteratively, so very deep terms (long
  /// sums) do not exhaust the stack.
  ~Formula() {
    if (!node_ || node_->kids.empty() || node_.use_count() != 1) return;
    std::vector<std::shared_ptr<Node>> stack;
    stack.push_back(std::move(node_));
    while (!stack.empty()) {
      std::shared_ptr<Node> n = std::move(stack.back());
      stack.pop_back();
      for (auto& k : n->kids) {
        if (k.node_ && !k.node_->kids.empty() && k.node_.use_count() == 1) stack.push_back(std::move(k.node_));
      }
      n->kids.clear();
    }
  }

  Kind kind() const { return node_->kind; }
  Rel rel() const { return node_->rel; }
  const std::string& name() const { return node_->name; }
  const std::vector<std::string>& bound() const { return node_->bound; }
  const std::vector<Formula>& children() const { return node_->kids; }
  const Formula& child(std::size_t i) const { return node_->kids.at(i); }
  const Formula& lhs() const { return node_->kids.at(0); }
  const Formula& rhs() const { return node_->kids.at(1); }
  const Formula& body() const { return node_->kids.at(0); }
  bool valid() const { return node_ != nullptr; }
  const void* identity() const { return node_.get(); }

  bool is_term() const {
    auto k = kind();
    return k == Kind::zero || k == Kind::one || k == Kind::variable || k == Kind::add || k == Kind::sub || k == Kind::mul;
  }
  bool is_quantifier() const { return kind() == Kind::exists || kind() == Kind::forall; }

  // --- arithmetic builders ---
  static Formula zero() { return make(Kind::zero); }
  static Formula one() { return make(Kind::one); }
  static Formula var(std::string name) {
    if (name.empty()) throw DomainError("empty variable name");
    Node n{Kind::variable};
    n.name = std::move(name);
    return Formula(std::make_shared<Node>(std::move(n)));
  }
  static Formula add(Formula a, Formula b) { return binary(Kind::add, std::move(a), std::move(b), true); }
  static Formula sub(Formula a, Formula b) { return binary(Kind::sub, std::move(a), std::move(b), true); }
  static Formula mul(Formula a, Formula b) { return binary(Kind::mul, std::move(a), std::move(b), true); }

  /// Non-negative integer as a binary-expansion tree over 0 and 1, e.g.
  /// 13 = (((1+1)+1)*(1+1))*(1+1)+1. The tree has O(log k) nodes.
  static Formula integer(const Integer& k) {
    if (k < 0) throw DomainError("negative integer constant");
    if (k == 0) return zero();
    if (k == 1) return one();
    if (k == 2) return add(one(), one());
    if (k % 2 == 1) return add(integer(Integer(k - 1)), one());
    return mul(integer(Integer(k / 2)), add(one(), one()));
  }

  // --- logical builders ---
  static Formula atom(Rel r, Formula lhs, Formula rhs) {
    if (!lhs.is_term() || !rhs.is_term()) throw DomainError("atom operands must be arithmetic terms");
    Node n{Kind::atom};
    n.rel = r;
    n.kids = {std::move(lhs), std::move(rhs)};
    return Formula(std::make_shared<Node>(std::move(n)));
  }
  /// The canonical true sentence 0 = 0.
  static Formula truth() { return atom(Rel::eq, zero(), zero()); }
  /// The canonical false sentence 0 = 1.
  static Formula falsity() { return atom(Rel::eq, zero(), one()); }

  /// Conjunction; zero children give truth(), one child is returned as is.
  static Formula conj(std::vector<Formula> kids) { return nary(Kind::conj, std::move(kids)); }
  /// Disjunction; zero children give falsity(), one child is returned as is.
  static Formula disj(std::vector<Formula> kids) { return nary(Kind::disj, std::move(kids)); }
  static Formula neg(Formula f) {
    check_logical(f);
    Node n{Kind::neg};
    n.kids = {std::move(f)};
    return Formula(std::make_shared<Node>(std::move(n)));
  }
  static Formula iff(Formula a, Formula b) { return binary(Kind::iff, std::move(a), std::move(b), false); }
  static Formula implies(Formula a, Formula b) { return disj({neg(std::move(a)), std::move(b)}); }
  static Formula exists(std::vector<std::string> vars, Formula body) { return quant(Kind::exists, std::move(vars), std::move(body)); }
  static Formula forall(std::vector<std::string> vars, Formula body) { return quant(Kind::forall, std::move(vars), std::move(body)); }

  /// Same node kind and payload with replaced children.
  Formula with_children(std::vector<Formula> kids) const {
    Node n = *node_;
    n.kids = std::move(kids);
    return Formula(std::make_shared<Node>(std::move(n)));
  }

  friend bool operator==(const Formula& a, const Formula& b) { return equal(a, b); }
  friend bool operator!=(const Formula& a, const Formula& b) { return !equal(a, b); }

private:
  struct Node {
    Kind kind;
    Rel rel = Rel::eq;
    std::string name{};
    std::vector<std::string> bound{};
    std::vector<Formula> kids{};
  };

  explicit Formula(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Formula make(Kind k) { return Formula(std::make_shared<Node>(Node{k})); }

  static void check_logical(const Formula& f) {
    if (!f.valid() || f.is_term()) throw DomainError("expected a logical formula, got an arithmetic term");
  }

  static Formula binary(Kind k, Formula a, Formula b, bool arithmetic) {
    if (arithmetic) {
      if (!a.is_term() || !b.is_term()) throw DomainError("arithmetic operands must be terms");
    } else {
      check_logical(a);
      check_logical(b);
    }
    Node n{k};
    n.kids = {std::move(a), std::move(b)};
    return Formula(std::make_shared<Node>(std::move(n)));
  }

  static Formula nary(Kind k, std::vector<Formula> kids) {
    for (const auto& c : kids) check_logical(c);
    if (kids.empty()) return k == Kind::conj ? truth() : falsity();
    if (kids.size() == 1) return std::move(kids.front());
    Node n{k};
    n.kids = std::move(kids);
    return Formula(std::make_shared<Node>(std::move(n)));
  }

  static Formula quant(Kind k, std::vector<std::string> vars, Formula body) {
    if (vars.empty()) throw DomainError("quantifier must bind at least one variable");
    check_logical(body);
    Node n{k};
    n.bound = std::move(vars);
    n.kids = {std::move(body)};
    return Formula(std::make_shared<Node>(std::move(n)));
  }

  static bool equal(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    const Node& x = *a.node_;
    const Node& y = *b.node_;
    if (x.kind != y.kind || x.rel != y.rel || x.name != y.name || x.bound != y.bound || x.kids.size() != y.kids.size()) return false;
    for (std::size_t i = 0; i < x.kids.size(); ++i) {
      if (!equal(x.kids[i], y.kids[i])) return false;
    }
    return true;
  }

  std::shared_ptr<Node> node_;
};

/// Integer value of a subtree built only from 0, 1, +, -, *.
inline std::optional<Integer> constant_value(const Formula& t) {
  switch (t.kind()) {
    case Kind::zero: return Integer(0);
    case Kind::one: return Integer(1);
    case Kind::add:
    case Kind::sub:
    case Kind::mul: {
      auto a = constant_value(t.lhs());
      if (!a) return std::nullopt;
      auto b = constant_value(t.rhs());
      if (!b) return std::nullopt;
      if (t.kind() == Kind::add) return Integer(*a + *b);
      if (t.kind() == Kind::sub) return Integer(*a - *b);
      return Integer(*a * *b);
    }
    default: return std::nullopt;
  }
}

/// Number of symbols: every constant, variable, operator, relation,
/// connective, quantifier and bound variable counts once; parentheses do
/// not count. Integer literals count through their binary expansion.
inline std::size_t formula_length(const Formula& f) {
  switch (f.kind()) {
    case Kind::zero:
    case Kind::one:
    case Kind::variable: return 1;
    case Kind::conj:
    case Kind::disj: {
      std::size_t n = f.children().size() - 1;
      for (const auto& c : f.children()) n += formula_length(c);
      return n;
    }
    case Kind::exists:
    case Kind::forall: return 1 + f.bound().size() + formula_length(f.body());
    default: {
      std::size_t n = 1;
      for (const auto& c : f.children()) n += formula_length(c);
      return n;
    }
  }
}

inline void collect_free_vars(const Formula& f, std::multiset<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case Kind::variable:
      if (bound.find(f.name()) == bound.end()) out.insert(f.name());
      return;
    case Kind::exists:
    case Kind::forall: {
      for (const auto& v : f.bound()) bound.insert(v);
      collect_free_vars(f.body(), bound, out);
      for (const auto& v : f.bound()) bound.erase(bound.find(v));
      return;
    }
    default:
      for (const auto& c : f.children()) collect_free_vars(c, bound, out);
  }
}

inline std::set<std::string> free_vars(const Formula& f) {
  std::multiset<std::string> bound;
  std::set<std::string> out;
  collect_free_vars(f, bound, out);
  return out;
}

/// Every variable name occurring anywhere, bound or free.
inline void collect_all_names(const Formula& f, std::set<std::string>& out) {
  if (f.kind() == Kind::variable) out.insert(f.name());
  for (const auto& v : (f.is_quantifier() ? f.bound() : std::vector<std::string>{})) out.insert(v);
  for (const auto& c : f.children()) collect_all_names(c, out);
}

inline bool is_quantifier_free(const Formula& f) {
  if (f.is_quantifier()) return false;
  for (const auto& c : f.children()) {
    if (!is_quantifier_free(c)) return false;
  }
  return true;
}

/// Visits every atom of a quantifier-free formula.
template <class Fn>
void for_each_atom(const Formula& f, Fn&& fn) {
  if (f.kind() == Kind::atom) {
    fn(f);
    return;
  }
  if (f.is_term()) return;
  for (const auto& c : f.children()) for_each_atom(c, fn);
}

// --- printing ---

namespace detail {

inline int term_prec(const Formula& t) {
  switch (t.kind()) {
    case Kind::add:
    case Kind::sub: return 1;
    case Kind::mul: return 2;
    default: return 3;
  }
}

inline bool is_canonical_integer(const Formula& t, Integer& value) {
  auto v = constant_value(t);
  if (!v || *v < 0) return false;
  if (t.kind() == Kind::zero || t.kind() == Kind::one) return false;
  if (Formula::integer(*v) != t) return false;
  value = *v;
  return true;
}

inline void print_term(const Formula& t, int min_prec, std::string& out) {
  Integer lit;
  if (is_canonical_integer(t, lit)) {
    out += lit.get_str();
    return;
  }
  int p = term_prec(t);
  bool parens = p < min_prec;
  if (parens) out += "(";
  switch (t.kind()) {
    case Kind::zero: out += "0"; break;
    case Kind::one: out += "1"; break;
    case Kind::variable: out += t.name(); break;
    case Kind::add:
    case Kind::sub:
      print_term(t.lhs(), 1, out);
      out += t.kind() == Kind::add ? " + " : " - ";
      print_term(t.rhs(), 2, out);
      break;
    case Kind::mul:
      print_term(t.lhs(), 2, out);
      out += "*";
      print_term(t.rhs(), 3, out);
      break;
    default: throw DomainError("not an arithmetic term");
  }
  if (parens) out += ")";
}

// Logical precedence: iff 1, disj 2, conj 3, unary/atom 4, quantifier 0.
inline int logic_prec(const Formula& f) {
  switch (f.kind()) {
    case Kind::iff: return 1;
    case Kind::disj: return 2;
    case Kind::conj: return 3;
    case Kind::exists:
    case Kind::forall: return 0;
    default: return 4;
  }
}

inline void print_logic(const Formula& f, int min_prec, std::string& out);

inline void print_quantifier(const Formula& f, std::string& out) {
  out += f.kind() == Kind::exists ? "(E" : "(A";
  for (const auto& v : f.bound()) out += " " + v;
  out += ")";
  if (f.body().is_quantifier()) {
    print_quantifier(f.body(), out);
  } else {
    out += "(";
    print_logic(f.body(), 0, out);
    out += ")";
  }
}

inline void print_logic(const Formula& f, int min_prec, std::string& out) {
  int p = logic_prec(f);
  bool parens = p < min_prec || (p == 0 && min_prec > 0);
  if (parens) out += "(";
  switch (f.kind()) {
    case Kind::atom:
      print_term(f.lhs(), 1, out);
      out += " ";
      out += rel_symbol(f.rel());
      out += " ";
      print_term(f.rhs(), 1, out);
      break;
    case Kind::neg:
      out += "~";
      if (f.body().kind() == Kind::atom) {
        out += "(";
        print_logic(f.body(), 0, out);
        out += ")";
      } else {
        print_logic(f.body(), 4, out);
      }
      break;
    case Kind::conj:
    case Kind::disj: {
      const char* sep = f.kind() == Kind::conj ? " /\\ " : " \\/ ";
      int need = f.kind() == Kind::conj ? 4 : 3;
      bool first = true;
      for (const auto& c : f.children()) {
        if (!first) out += sep;
        first = false;
        print_logic(c, need, out);
      }
      break;
    }
    case Kind::iff:
      print_logic(f.lhs(), 1, out);
      out += " <=> ";
      print_logic(f.rhs(), 2, out);
      break;
    case Kind::exists:
    case Kind::forall: print_quantifier(f, out); break;
    default: throw DomainError("not a logical formula");
  }
  if (parens) out += ")";
}

}  // namespace detail

/// Text in the formula grammar; deterministic and reparses to an equal AST.
inline std::string print(const Formula& f) {
  std::string out;
  if (f.is_term()) {
    detail::print_term(f, 0, out);
  } else {
    detail::print_logic(f, 0, out);
  }
  return out;
}

// --- polynomial bridge ---

/// Fully expanded standard form of an arithmetic term.
inline Polynomial poly_from_term(const Formula& t, std::size_t max_monomials = kDefaultMaxMonomials) {
  switch (t.kind()) {
    case Kind::zero: return {};
    case Kind::one: return Polynomial(1);
    case Kind::variable: return Polynomial::variable(t.name());
    case Kind::add: return poly_from_term(t.lhs(), max_monomials) + poly_from_term(t.rhs(), max_monomials);
    case Kind::sub: return poly_from_term(t.lhs(), max_monomials) - poly_from_term(t.rhs(), max_monomials);
    case Kind::mul:
      return Polynomial::multiply(poly_from_term(t.lhs(), max_monomials), poly_from_term(t.rhs(), max_monomials), max_monomials);
    default: throw DomainError("poly_from_term expects an arithmetic term");
  }
}

/// lhs - rhs of an atom, expanded.
inline Polynomial atom_polynomial(const Formula& atom, std::size_t max_monomials = kDefaultMaxMonomials) {
  if (atom.kind() != Kind::atom) throw DomainError("atom_polynomial expects an atom");
  return poly_from_term(atom.lhs(), max_monomials) - poly_from_term(atom.rhs(), max_monomials);
}

/// Positive integer multiple of p with integer coefficients (p / content).
inline Polynomial clear_denominators(const Polynomial& p) { return p.content_and_primitive().second; }

namespace detail {

inline Formula monomial_term(const Exponents& e, const std::vector<std::string>& vars, const Integer& coeff) {
  std::optional<Formula> acc;
  if (coeff != 1) acc = Formula::integer(coeff);
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::uint32_t k = 0; k < e[i]; ++k) {
      Formula x = Formula::var(vars[i]);
      acc = acc ? Formula::mul(*acc, x) : x;
    }
  }
  return acc ? *acc : Formula::integer(coeff);
}

inline Formula sum_term(const std::vector<Formula>& parts) {
  if (parts.empty()) return Formula::zero();
  Formula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::add(acc, parts[i]);
  return acc;
}

}  // namespace detail

/// Term for a polynomial with integer coefficients; powers become repeated
/// products. Negative monomials are subtracted from the running sum.
inline Formula term_from_polynomial(const Polynomial& p) {
  if (p.is_zero()) return Formula::zero();
  std::optional<Formula> acc;
  for (const auto& [e, c] : p.terms()) {
    if (c.get_den() != 1) throw DomainError("term_from_polynomial requires integer coefficients");
    Integer mag = abs(c.get_num());
    Formula m = detail::monomial_term(e, p.vars(), mag);
    if (!acc) {
      acc = c < 0 ? Formula::sub(Formula::zero(), m) : m;
    } else {
      acc = c < 0 ? Formula::sub(*acc, m) : Formula::add(*acc, m);
    }
  }
  return *acc;
}

/// Atom equivalent to `p rel 0`: denominators are cleared by a positive
/// factor, positive monomials go left and negated negative ones go right,
/// so `B^2 - 4*A*C >= 0` prints as `B*B >= 4*A*C`.
inline Formula atom_from_polynomial(const Polynomial& p, Rel r) {
  Polynomial q = clear_denominators(p);
  std::vector<Formula> pos;
  std::vector<Formula> negs;
  for (const auto& [e, c] : q.terms()) {
    Integer mag = abs(c.get_num());
    (c > 0 ? pos : negs).push_back(detail::monomial_term(e, q.vars(), mag));
  }
  return Formula::atom(r, detail::sum_term(pos), detail::sum_term(negs));
}

/// Symbol count of `atom_from_polynomial(p, rel)` without building it.
inline std::size_t polynomial_atom_length(const Polynomial& p) {
  Polynomial q = clear_denominators(p);
  auto int_len = [](const Integer& k) { return formula_length(Formula::integer(k)); };
  std::size_t pos = 0;
  std::size_t neg = 0;
  std::size_t total = 1;  // the relation
  for (const auto& [e, c] : q.terms()) {
    Integer mag = abs(c.get_num());
    std::size_t factors = 0;
    for (auto x : e) factors += x;
    std::size_t len;
    if (factors == 0) {
      len = int_len(mag);
    } else {
      len = factors + (factors - 1);  // variables and the products joining them
      if (mag != 1) len += int_len(mag) + 1;
    }
    total += len;
    (c > 0 ? pos : neg) += 1;
  }
  total += pos > 0 ? pos - 1 : 1;
  total += neg > 0 ? neg - 1 : 1;
  return total;
}

}  // namespace realqe
