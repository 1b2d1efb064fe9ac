#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/formula.hpp"
#include "realqe/polynomial.hpp"

namespace realqe {

/// Renames free occurrences of variables according to `ren`.
inline Formula rename_free(const Formula& f, const std::map<std::string, std::string>& ren) {
  if (ren.empty()) return f;
  switch (f.kind()) {
    case Kind::variable: {
      auto it = ren.find(f.name());
      return it == ren.end() ? f : Formula::var(it->second);
    }
    case Kind::zero:
    case Kind::one: return f;
    case Kind::exists:
    case Kind::forall: {
      auto inner = ren;
      for (const auto& v : f.bound()) inner.erase(v);
      return f.with_children({rename_free(f.body(), inner)});
    }
    default: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& c : f.children()) kids.push_back(rename_free(c, ren));
      return f.with_children(std::move(kids));
    }
  }
}

/// Replaces free occurrences of variables by terms (no capture checks;
/// callers substitute closed or fresh-variable terms).
inline Formula substitute_terms(const Formula& f, const std::map<std::string, Formula>& sub) {
  switch (f.kind()) {
    case Kind::variable: {
      auto it = sub.find(f.name());
      return it == sub.end() ? f : it->second;
    }
    case Kind::zero:
    case Kind::one: return f;
    case Kind::exists:
    case Kind::forall: {
      auto inner = sub;
      for (const auto& v : f.bound()) inner.erase(v);
      return f.with_children({substitute_terms(f.body(), inner)});
    }
    default: {
      std::vector<Formula> kids;
      kids.reserve(f.children().size());
      for (const auto& c : f.children()) kids.push_back(substitute_terms(c, sub));
      return f.with_children(std::move(kids));
    }
  }
}

namespace detail {

struct PrenexParts {
  std::vector<std::pair<Kind, std::string>> prefix;  // outermost first
  Formula matrix;
};

/// Expands every <=> whose operands contain a quantifier into
/// (~A \/ B) /\ (~B \/ A).
inline Formula expand_quantified_iff(const Formula& f) {
  if (f.is_term() || f.kind() == Kind::atom) return f;
  std::vector<Formula> kids;
  for (const auto& c : f.children()) kids.push_back(expand_quantified_iff(c));
  if (f.kind() == Kind::iff && (!is_quantifier_free(kids[0]) || !is_quantifier_free(kids[1]))) {
    return Formula::conj({Formula::disj({Formula::neg(kids[0]), kids[1]}), Formula::disj({Formula::neg(kids[1]), kids[0]})});
  }
  return f.with_children(std::move(kids));
}

class Prenexer {
public:
  explicit Prenexer(const Formula& f) {
    collect_all_names(f, taken_);
    auto fv = free_vars(f);
    free_.insert(fv.begin(), fv.end());
  }

  PrenexParts run(const Formula& f) {
    switch (f.kind()) {
      case Kind::atom: return {{}, f};
      case Kind::neg: {
        PrenexParts p = run(f.body());
        for (auto& q : p.prefix) q.first = q.first == Kind::exists ? Kind::forall : Kind::exists;
        p.matrix = Formula::neg(p.matrix);
        return p;
      }
      case Kind::conj:
      case Kind::disj:
      case Kind::iff: {
        PrenexParts out;
        std::vector<Formula> kids;
        for (const auto& c : f.children()) {
          PrenexParts p = run(c);
          out.prefix.insert(out.prefix.end(), p.prefix.begin(), p.prefix.end());
          kids.push_back(p.matrix);
        }
        out.matrix = f.with_children(std::move(kids));
        return out;
      }
      case Kind::exists:
      case Kind::forall: {
        std::map<std::string, std::string> ren;
        std::vector<std::string> names;
        for (const auto& v : f.bound()) {
          std::string use = v;
          if (free_.count(v) > 0 || used_bound_.count(v) > 0) use = fresh(v);
          used_bound_.insert(use);
          if (use != v) ren[v] = use;
          names.push_back(use);
        }
        PrenexParts p = run(rename_free(f.body(), ren));
        PrenexParts out;
        for (const auto& n : names) out.prefix.emplace_back(f.kind(), n);
        out.prefix.insert(out.prefix.end(), p.prefix.begin(), p.prefix.end());
        out.matrix = p.matrix;
        return out;
      }
      default: throw DomainError("to_prenex expects a logical formula");
    }
  }

private:
  std::string fresh(const std::string& base) {
    for (;;) {
      std::string cand = base + "#" + std::to_string(++counter_);
      if (taken_.insert(cand).second) return cand;
    }
  }

  std::set<std::string> taken_;
  std::set<std::string> free_;
  std::set<std::string> used_bound_;
  unsigned counter_ = 0;
};

}  // namespace detail

/// Rebuilds a prefix of (kind, variable) pairs around a matrix, merging
/// runs of the same quantifier into one node.
inline Formula build_prefix(const std::vector<std::pair<Kind, std::string>>& prefix, Formula matrix) {
  Formula out = std::move(matrix);
  std::size_t i = prefix.size();
  while (i > 0) {
    std::size_t j = i;
    Kind k = prefix[i - 1].first;
    while (j > 0 && prefix[j - 1].first == k) --j;
    std::vector<std::string> vars;
    for (std::size_t t = j; t < i; ++t) vars.push_back(prefix[t].second);
    out = k == Kind::exists ? Formula::exists(std::move(vars), out) : Formula::forall(std::move(vars), out);
    i = j;
  }
  return out;
}

/// Equivalent formula (Q1 X1)...(Qk Xk) M with M quantifier-free.
///
/// A bound variable is renamed to a fresh `name#n` only when it collides
/// with a free variable or another bound occurrence, so every bound name in
/// the output is distinct from every free name.
inline Formula to_prenex(const Formula& f) {
  if (is_quantifier_free(f)) return f;
  Formula g = detail::expand_quantified_iff(f);
  detail::Prenexer pr(g);
  detail::PrenexParts parts = pr.run(g);
  return build_prefix(parts.prefix, parts.matrix);
}

/// Splits a prenex formula into its prefix and matrix.
inline detail::PrenexParts split_prenex(const Formula& f) {
  detail::PrenexParts out;
  Formula cur = f;
  while (cur.is_quantifier()) {
    for (const auto& v : cur.bound()) out.prefix.emplace_back(cur.kind(), v);
    cur = cur.body();
  }
  if (!is_quantifier_free(cur)) throw DomainError("formula is not in prenex form");
  out.matrix = cur;
  return out;
}

inline Rational eval_term(const Formula& t, const Assignment& a) {
  switch (t.kind()) {
    case Kind::zero: return 0;
    case Kind::one: return 1;
    case Kind::variable: {
      auto it = a.find(t.name());
      if (it == a.end()) throw DomainError("variable '" + t.name() + "' is not assigned");
      return it->second;
    }
    case Kind::add: return eval_term(t.lhs(), a) + eval_term(t.rhs(), a);
    case Kind::sub: return eval_term(t.lhs(), a) - eval_term(t.rhs(), a);
    case Kind::mul: return eval_term(t.lhs(), a) * eval_term(t.rhs(), a);
    default: throw DomainError("eval_term expects an arithmetic term");
  }
}

/// Exact truth value of a quantifier-free formula under an assignment.
inline bool eval_qfree(const Formula& f, const Assignment& a) {
  switch (f.kind()) {
    case Kind::atom: {
      Rational d = eval_term(f.lhs(), a) - eval_term(f.rhs(), a);
      return rel_holds(f.rel(), sign(d));
    }
    case Kind::neg: return !eval_qfree(f.body(), a);
    case Kind::conj:
      for (const auto& c : f.children()) {
        if (!eval_qfree(c, a)) return false;
      }
      return true;
    case Kind::disj:
      for (const auto& c : f.children()) {
        if (eval_qfree(c, a)) return true;
      }
      return false;
    case Kind::iff: return eval_qfree(f.lhs(), a) == eval_qfree(f.rhs(), a);
    case Kind::exists:
    case Kind::forall: throw DomainError("eval_qfree expects a quantifier-free formula");
    default: throw DomainError("eval_qfree expects a logical formula");
  }
}

/// Result of a sampling comparison; `witness` is set on disagreement.
struct SampleVerdict {
  bool counterexample = false;
  Assignment witness;
};

struct SampleOptions {
  /// Grid values are k/denominator for |k| <= grid_radius * denominator.
  int grid_radius = 3;
  int grid_denominator = 2;
  /// Fraction of trials that snap one variable to a rational root of an
  /// atom polynomial restricted to that variable.
  double boundary_fraction = 0.3;
};

namespace detail {

inline std::optional<Rational> rational_sqrt(const Rational& q) {
  if (q < 0) return std::nullopt;
  Integer n = q.get_num();
  Integer d = q.get_den();
  Integer rn = sqrt(n);
  Integer rd = sqrt(d);
  if (rn * rn != n || rd * rd != d) return std::nullopt;
  return Rational(rn, rd);
}

/// Rational roots of a polynomial of degree <= 2 in `v` after the other
/// variables are fixed.
inline std::vector<Rational> cheap_roots(const Polynomial& p, const std::string& v, const Assignment& others) {
  Assignment rest = others;
  rest.erase(v);
  Polynomial q = p.eval_partial(rest);
  if (q.vars().size() != 1 || q.vars().front() != v) return {};
  auto c = q.coefficients(v);
  std::vector<Rational> out;
  if (c.size() == 2) {
    out.push_back(-c[0].constant_term() / c[1].constant_term());
  } else if (c.size() == 3) {
    Rational a = c[2].constant_term();
    Rational b = c[1].constant_term();
    Rational cc = c[0].constant_term();
    auto s = rational_sqrt(b * b - 4 * a * cc);
    if (s) {
      out.push_back((-b + *s) / (2 * a));
      out.push_back((-b - *s) / (2 * a));
    }
  }
  return out;
}

}  // namespace detail

/// Compares two quantifier-free formulas at `trials` pseudorandom rational
/// points (deterministic in `seed`). Points come from a grid plus
/// boundary-biased values: roots of atom polynomials restricted to one
/// variable when those roots are rational and cheap to find.
inline SampleVerdict sample_equiv(const Formula& f, const Formula& g, const std::vector<std::string>& vars, std::size_t trials,
                                  std::uint64_t seed, const SampleOptions& opt = {}) {
  SampleVerdict v;
  if (f == g) return v;
  std::vector<Polynomial> polys;
  auto grab = [&](const Formula& a) { polys.push_back(atom_polynomial(a)); };
  for_each_atom(f, grab);
  for_each_atom(g, grab);
  std::mt19937_64 rng(seed);
  const int span = opt.grid_radius * opt.grid_denominator;
  std::uniform_int_distribution<int> grid(-span, span);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t t = 0; t < trials; ++t) {
    Assignment a;
    for (const auto& x : vars) a[x] = Rational(grid(rng), opt.grid_denominator);
    for (auto& [k, q] : a) q.canonicalize();
    if (!vars.empty() && !polys.empty() && coin(rng) < opt.boundary_fraction) {
      const std::string& x = vars[rng() % vars.size()];
      const Polynomial& p = polys[rng() % polys.size()];
      auto roots = detail::cheap_roots(p, x, a);
      if (!roots.empty()) a[x] = roots[rng() % roots.size()];
    }
    if (eval_qfree(f, a) != eval_qfree(g, a)) {
      v.counterexample = true;
      v.witness = a;
      return v;
    }
  }
  return v;
}

}  // namespace realqe
