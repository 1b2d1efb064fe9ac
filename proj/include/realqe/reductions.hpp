#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/formula.hpp"
#include "realqe/formula_ops.hpp"
#include "realqe/polynomial.hpp"

namespace realqe {

/// Role of a variable introduced by to_feasible.
enum class AuxRole {
  value,     // V: value of an arithmetic subterm
  truth,     // W: 0/1 truth value of a Boolean subformula
  positive,  // S: base * S^2 = 1 certifies base > 0
  nonpos,    // T: base + T^2 = 0 certifies base <= 0
};

struct AuxVar {
  std::string name;
  AuxRole role = AuxRole::value;
  /// The subterm (value), subformula (truth) or atom (S, T) it belongs to.
  Formula source;
  /// For S and T: the polynomial, over the original and value variables,
  /// whose sign the variable certifies.
  Polynomial base;
};

/// Instance (E vars) poly = 0.
struct FeasibleInstance {
  std::vector<std::string> vars;
  Polynomial poly;
  std::vector<AuxVar> aux;

  Formula as_formula() const {
    Formula a = atom_from_polynomial(poly, Rel::eq);
    return vars.empty() ? a : Formula::exists(vars, a);
  }
  std::size_t length() const { return (vars.empty() ? 0 : 1 + vars.size()) + polynomial_atom_length(poly); }
};

/// Instance (E vars) q1 > 0 /\ ... /\ qt > 0.
struct StrictIneqInstance {
  std::vector<std::string> vars;
  std::vector<Polynomial> polys;

  Formula as_formula() const {
    std::vector<Formula> atoms;
    for (const auto& q : polys) atoms.push_back(atom_from_polynomial(q, Rel::gt));
    Formula m = Formula::conj(std::move(atoms));
    return vars.empty() ? m : Formula::exists(vars, m);
  }
};

struct TseitinOptions {
  /// A matrix that is a conjunction of atoms compiles to one equation per
  /// atom instead of the full truth-variable scaffolding.
  bool peephole = true;
  std::size_t max_monomials = kDefaultMaxMonomials;
};

namespace detail {

class TseitinCompiler {
public:
  TseitinCompiler(const Formula& matrix, const std::vector<std::string>& outer, const TseitinOptions& opt) : opt_(opt) {
    collect_all_names(matrix, taken_);
    taken_.insert(outer.begin(), outer.end());
  }

  FeasibleInstance run(const Formula& matrix, std::vector<std::string> vars) {
    FeasibleInstance out;
    out.vars = std::move(vars);
    bool done = false;
    if (opt_.peephole) {
      if (auto p = try_peephole(matrix)) {
        out.poly = *p;
        done = true;
      } else {
        aux_.clear();
      }
    }
    if (!done) {
      Polynomial w = boolean(matrix);
      equations_.push_back(w - Polynomial(1));
      Polynomial sum;
      for (const auto& e : equations_) sum = sum + e.pow(2, opt_.max_monomials);
      out.poly = sum;
    }
    for (const auto& a : aux_) out.vars.push_back(a.name);
    out.aux = std::move(aux_);
    return out;
  }

private:
  std::string fresh(const char* base) {
    for (;;) {
      std::string name = std::string(base) + "#" + std::to_string(++counter_);
      if (taken_.insert(name).second) return name;
    }
  }

  Polynomial new_aux(const char* base, AuxRole role, const Formula& source, Polynomial b = {}) {
    AuxVar a;
    a.name = fresh(base);
    a.role = role;
    a.source = source;
    a.base = std::move(b);
    aux_.push_back(a);
    return Polynomial::variable(a.name);
  }

  Polynomial mul(const Polynomial& a, const Polynomial& b) const { return Polynomial::multiply(a, b, opt_.max_monomials); }
  Polynomial sq(const Polynomial& a) const { return mul(a, a); }

  /// Leaf polynomial (variable or integer) or a fresh value variable.
  Polynomial term(const Formula& t) {
    if (auto k = constant_value(t)) return Polynomial(Rational(*k));
    switch (t.kind()) {
      case Kind::variable: return Polynomial::variable(t.name());
      case Kind::add:
      case Kind::sub:
      case Kind::mul: {
        Polynomial a = term(t.lhs());
        Polynomial b = term(t.rhs());
        Polynomial v = new_aux("V", AuxRole::value, t);
        Polynomial rhs = t.kind() == Kind::add ? a + b : (t.kind() == Kind::sub ? a - b : mul(a, b));
        equations_.push_back(v - rhs);
        return v;
      }
      default: throw DomainError("expected an arithmetic term");
    }
  }

  /// Gadget forcing W to the truth of `base > 0` (or of `base <= 0` when
  /// `invert`): ((base*S^2 - 1)^2 + (W - 1)^2) * ((base + T^2)^2 + W^2).
  Polynomial strict_gadget(const Formula& atom, const Polynomial& base, bool invert) {
    Polynomial w = new_aux("W", AuxRole::truth, atom);
    Polynomial s = new_aux("S", AuxRole::positive, atom, base);
    Polynomial t = new_aux("T", AuxRole::nonpos, atom, base);
    Polynomial one(1);
    Polynomial pos_flag = invert ? sq(w) : sq(w - one);
    Polynomial neg_flag = invert ? sq(w - one) : sq(w);
    Polynomial pos = sq(mul(base, sq(s)) - one) + pos_flag;
    Polynomial neg = sq(base + sq(t)) + neg_flag;
    equations_.push_back(mul(pos, neg));
    return w;
  }

  /// Gadget forcing W to the truth of `e = 0` (or `e != 0` when `invert`):
  /// (e^2 + (W - 1)^2) * ((e^2*S^2 - 1)^2 + W^2).
  Polynomial zero_gadget(const Formula& atom, const Polynomial& e, bool invert) {
    Polynomial w = new_aux("W", AuxRole::truth, atom);
    Polynomial e2 = sq(e);
    Polynomial s = new_aux("S", AuxRole::positive, atom, e2);
    Polynomial one(1);
    Polynomial zero_flag = invert ? sq(w) : sq(w - one);
    Polynomial nonzero_flag = invert ? sq(w - one) : sq(w);
    equations_.push_back(mul(e2 + zero_flag, sq(mul(e2, sq(s)) - one) + nonzero_flag));
    return w;
  }

  Polynomial boolean(const Formula& f) {
    switch (f.kind()) {
      case Kind::atom: {
        Polynomial e = term(f.lhs()) - term(f.rhs());
        if (e.monomial_count() > 1) {
          Polynomial v = new_aux("V", AuxRole::value, Formula::sub(f.lhs(), f.rhs()));
          equations_.push_back(v - e);
          e = v;
        }
        switch (f.rel()) {
          case Rel::gt: return strict_gadget(f, e, false);
          case Rel::le: return strict_gadget(f, e, true);
          case Rel::lt: return strict_gadget(f, -e, false);
          case Rel::ge: return strict_gadget(f, -e, true);
          case Rel::eq: return zero_gadget(f, e, false);
          case Rel::ne: return zero_gadget(f, e, true);
        }
        throw DomainError("unknown relation");
      }
      case Kind::neg: {
        Polynomial a = boolean(f.body());
        Polynomial w = new_aux("W", AuxRole::truth, f);
        equations_.push_back(w - (Polynomial(1) - a));
        return w;
      }
      case Kind::conj:
      case Kind::disj: {
        const bool is_conj = f.kind() == Kind::conj;
        Polynomial acc = boolean(f.children().front());
        std::vector<Formula> prefix{f.children().front()};
        for (std::size_t i = 1; i < f.children().size(); ++i) {
          Polynomial b = boolean(f.children()[i]);
          prefix.push_back(f.children()[i]);
          Formula src = is_conj ? Formula::conj(prefix) : Formula::disj(prefix);
          Polynomial w = new_aux("W", AuxRole::truth, src);
          if (is_conj) {
            equations_.push_back(w - mul(acc, b));
          } else {
            // (W = 1 and (a = 1 or b = 1)) or (W = 0 and a = 0 and b = 0)
            Polynomial one(1);
            Polynomial on = sq(w - one) + sq(mul(acc - one, b - one));
            Polynomial off = sq(w) + sq(acc) + sq(b);
            equations_.push_back(mul(on, off));
          }
          acc = w;
        }
        return acc;
      }
      case Kind::iff: {
        Polynomial a = boolean(f.lhs());
        Polynomial b = boolean(f.rhs());
        Polynomial w = new_aux("W", AuxRole::truth, f);
        equations_.push_back(w - (Polynomial(1) - sq(a - b)));
        return w;
      }
      default: throw DomainError("to_feasible expects a quantifier-free matrix");
    }
  }

  /// One equation per atom of a conjunction of atoms, combined as a sum of
  /// squares (a single atom needs no squaring).
  std::optional<Polynomial> try_peephole(const Formula& m) {
    std::vector<Formula> atoms;
    if (m.kind() == Kind::atom) {
      atoms.push_back(m);
    } else if (m.kind() == Kind::conj) {
      for (const auto& c : m.children()) {
        if (c.kind() != Kind::atom) return std::nullopt;
        atoms.push_back(c);
      }
    } else {
      return std::nullopt;
    }
    std::vector<Polynomial> eqs;
    for (const auto& a : atoms) {
      Polynomial e;
      try {
        e = atom_polynomial(a, opt_.max_monomials);
      } catch (const BudgetExceeded&) {
        return std::nullopt;
      }
      // Keep the output linear in the input: no expansion blow-up.
      if (polynomial_atom_length(e) > 2 * formula_length(a)) return std::nullopt;
      Polynomial one(1);
      switch (a.rel()) {
        case Rel::gt: eqs.push_back(mul(e, sq(new_aux("S", AuxRole::positive, a, e))) - one); break;
        case Rel::lt: eqs.push_back(mul(e, sq(new_aux("S", AuxRole::positive, a, -e))) + one); break;
        case Rel::ge: eqs.push_back(e - sq(new_aux("T", AuxRole::nonpos, a, -e))); break;
        case Rel::le: eqs.push_back(e + sq(new_aux("T", AuxRole::nonpos, a, e))); break;
        case Rel::eq: eqs.push_back(e); break;
        case Rel::ne: {
          Polynomial e2 = sq(e);
          eqs.push_back(mul(e2, sq(new_aux("S", AuxRole::positive, a, e2))) - one);
          break;
        }
      }
    }
    if (eqs.size() == 1) return clear_denominators(eqs.front());
    Polynomial sum;
    for (const auto& q : eqs) sum = sum + sq(clear_denominators(q));
    return sum;
  }

  TseitinOptions opt_;
  std::set<std::string> taken_;
  unsigned counter_ = 0;
  std::vector<Polynomial> equations_;
  std::vector<AuxVar> aux_;
};

}  // namespace detail

/// Single polynomial equation satisfiable iff the existential formula is.
/// Free variables of the input are treated as existentially quantified.
inline FeasibleInstance to_feasible(const Formula& f, const TseitinOptions& opt = {}) {
  Formula g = to_prenex(f);
  auto parts = split_prenex(g);
  std::vector<std::string> vars;
  for (const auto& v : free_vars(g)) vars.push_back(v);
  for (const auto& [kind, v] : parts.prefix) {
    if (kind != Kind::exists) throw DomainError("to_feasible expects an existential formula");
    vars.push_back(v);
  }
  detail::TseitinCompiler c(parts.matrix, vars, opt);
  return c.run(parts.matrix, vars);
}

/// Default chain lengths k = ceil(C L log2 L), l = ceil(C1 L (log2 L)^2),
/// at least 1.
inline std::size_t default_strict_k(std::size_t length, double c = 1.0) {
  double l = static_cast<double>(std::max<std::size_t>(length, 2));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c * l * std::log2(l))));
}

inline std::size_t default_strict_l(std::size_t length, double c1 = 1.0) {
  double l = static_cast<double>(std::max<std::size_t>(length, 2));
  double lg = std::log2(l);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c1 * l * lg * lg)));
}

/// Strict-inequality system bounding the solutions by Y_k^2 and forcing
/// |p| < 1/Z_l:
///   Y_i > 0;  4 - Y_1 > 0;  Y_i^2 - Y_{i+1} > 0;  Y_k^2 - sum X_j^2 > 0;
///   Z_1 - 4 > 0;  Z_{i+1} - Z_i^2 > 0;  1 - Z_l^2 p^2 > 0.
inline StrictIneqInstance to_strictineq(const FeasibleInstance& inst, std::size_t k, std::size_t l,
                                        std::size_t max_monomials = kDefaultMaxMonomials) {
  if (k < 1 || l < 1) throw DomainError("to_strictineq needs k >= 1 and l >= 1");
  std::set<std::string> taken(inst.vars.begin(), inst.vars.end());
  for (const auto& v : inst.poly.vars()) taken.insert(v);
  auto chain = [&](const std::string& base, std::size_t n) {
    std::string sep;
    for (;;) {
      bool clash = false;
      for (std::size_t i = 1; i <= n && !clash; ++i) clash = taken.count(base + sep + std::to_string(i)) > 0;
      if (!clash) break;
      sep += "#";
    }
    std::vector<Polynomial> out;
    for (std::size_t i = 1; i <= n; ++i) out.push_back(Polynomial::variable(base + sep + std::to_string(i)));
    return out;
  };
  std::vector<Polynomial> y = chain("Y", k);
  std::vector<Polynomial> z = chain("Z", l);
  StrictIneqInstance out;
  out.vars = inst.vars;
  for (const auto& v : y) out.vars.push_back(v.vars().front());
  for (const auto& v : z) out.vars.push_back(v.vars().front());
  auto sq = [&](const Polynomial& a) { return Polynomial::multiply(a, a, max_monomials); };
  for (const auto& v : y) out.polys.push_back(v);
  out.polys.push_back(Polynomial(4) - y[0]);
  for (std::size_t i = 0; i + 1 < k; ++i) out.polys.push_back(sq(y[i]) - y[i + 1]);
  Polynomial norm;
  for (const auto& x : inst.vars) norm = norm + sq(Polynomial::variable(x));
  out.polys.push_back(sq(y[k - 1]) - norm);
  out.polys.push_back(z[0] - Polynomial(4));
  for (std::size_t i = 0; i + 1 < l; ++i) out.polys.push_back(z[i + 1] - sq(z[i]));
  out.polys.push_back(Polynomial(1) - Polynomial::multiply(sq(z[l - 1]), sq(inst.poly), max_monomials));
  return out;
}

/// Simple undirected graph on vertices 1..n.
struct Graph {
  std::size_t n = 0;
  std::set<std::pair<std::size_t, std::size_t>> edges;  // (i, j) with i < j

  void add_edge(std::size_t i, std::size_t j) {
    if (i == j) throw DomainError("loops are not allowed");
    if (i < 1 || j < 1 || i > n || j > n) throw DomainError("vertex index out of range");
    edges.emplace(std::min(i, j), std::max(i, j));
  }
  bool has_edge(std::size_t i, std::size_t j) const { return edges.count({std::min(i, j), std::max(i, j)}) > 0; }

  /// `n m` followed by m lines `i j`, 1-based.
  static Graph parse(const std::string& text) {
    std::istringstream in(text);
    Graph g;
    std::size_t m = 0;
    if (!(in >> g.n >> m)) throw SyntaxError("expected 'n m' header", 1, 1);
    for (std::size_t e = 0; e < m; ++e) {
      long long i = 0;
      long long j = 0;
      if (!(in >> i >> j)) throw SyntaxError("expected edge " + std::to_string(e + 1), e + 2, 1);
      if (i < 1 || j < 1) throw SyntaxError("vertex indices are 1-based", e + 2, 1);
      try {
        g.add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      } catch (const DomainError& err) {
        throw SyntaxError(err.what(), e + 2, 1);
      }
    }
    std::string rest;
    if (in >> rest) throw SyntaxError("trailing input after the edge list", m + 2, 1);
    return g;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << n << ' ' << edges.size() << '\n';
    for (const auto& [i, j] : edges) os << i << ' ' << j << '\n';
    return os.str();
  }
};

namespace detail {

inline Formula seg_var(char kind, std::size_t i) { return Formula::var(std::string(1, kind) + std::to_string(i)); }

}  // namespace detail

/// Segments i and j (on lines y = A x + B over x in [C, D]) intersect.
/// Only meaningful together with C <= D for both segments.
inline Formula ints_predicate(std::size_t i, std::size_t j) {
  if (i == j) throw DomainError("ints_predicate needs two distinct indices");
  using detail::seg_var;
  const Formula ai = seg_var('A', i), bi = seg_var('B', i), ci = seg_var('C', i), di = seg_var('D', i);
  const Formula aj = seg_var('A', j), bj = seg_var('B', j), cj = seg_var('C', j), dj = seg_var('D', j);
  const Formula da = Formula::sub(ai, aj);
  const Formula db = Formula::sub(bj, bi);
  auto at = [](Rel r, const Formula& l, const Formula& rr) { return Formula::atom(r, l, rr); };
  Formula same_line = Formula::conj({at(Rel::eq, ai, aj), at(Rel::eq, bi, bj),
                                     Formula::neg(Formula::disj({at(Rel::lt, di, cj), at(Rel::lt, dj, ci)}))});
  Formula steeper = Formula::conj({at(Rel::gt, ai, aj), at(Rel::le, Formula::mul(ci, da), db), at(Rel::le, db, Formula::mul(di, da)),
                                   at(Rel::le, Formula::mul(cj, da), db), at(Rel::le, db, Formula::mul(dj, da))});
  Formula flatter = Formula::conj({at(Rel::lt, ai, aj), at(Rel::ge, Formula::mul(ci, da), db), at(Rel::ge, db, Formula::mul(di, da)),
                                   at(Rel::ge, Formula::mul(cj, da), db), at(Rel::ge, db, Formula::mul(dj, da))});
  return Formula::disj({same_line, steeper, flatter});
}

/// Existential sentence stating that g is the intersection graph of n
/// segments.
inline Formula encode_seg(const Graph& g) {
  std::vector<std::string> vars;
  std::vector<Formula> parts;
  for (std::size_t i = 1; i <= g.n; ++i) {
    for (char c : {'A', 'B', 'C', 'D'}) vars.push_back(std::string(1, c) + std::to_string(i));
    parts.push_back(Formula::atom(Rel::le, detail::seg_var('C', i), detail::seg_var('D', i)));
  }
  for (std::size_t i = 1; i <= g.n; ++i) {
    for (std::size_t j = i + 1; j <= g.n; ++j) {
      Formula p = ints_predicate(i, j);
      parts.push_back(g.has_edge(i, j) ? p : Formula::neg(p));
    }
  }
  Formula m = Formula::conj(std::move(parts));
  return vars.empty() ? m : Formula::exists(std::move(vars), m);
}

}  // namespace realqe
