#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <future>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/formula.hpp"
#include "realqe/formula_ops.hpp"
#include "realqe/polynomial.hpp"
#include "realqe/sign_table.hpp"

namespace realqe {

struct QeOptions {
  std::size_t max_nodes = Limits{}.max_nodes;
  std::size_t max_monomials = kDefaultMaxMonomials;
  /// Cap on the rows of any one sign table built along a branch.
  std::size_t max_table_rows = Limits{}.max_table_rows;
  /// Sibling subtrees near the root are explored on up to this many threads.
  unsigned threads = 1;
  /// After a test answered 0 on a polynomial linear in some variable W with
  /// a constant coefficient, W is replaced in later tests.
  bool substitute_linear = true;
  /// Before branching: split (E x) over disjuncts, drop repeated factors
  /// of atoms in x alone, and replace x^2 by x (with x >= 0) when x occurs
  /// only with even exponents.
  bool reduce_matrix = true;
};

/// Sign assumptions accumulated along one branch, in test order.
struct ConditionPath {
  std::vector<std::pair<RationalFunction, int>> conditions;
};

struct BranchOutcome {
  ConditionPath path;
  bool verdict = false;
};

/// `sign(u/v) = s` written with polynomial atoms only:
/// (v > 0 and u rel 0) or (v < 0 and u rel' 0).
inline Formula rational_sign_condition(const RationalFunction& f, int s) {
  const Rel r = s < 0 ? Rel::lt : (s > 0 ? Rel::gt : Rel::eq);
  const Polynomial& v = f.denominator;
  if (v.is_constant()) {
    Rel use = v.constant_term() > 0 ? r : rel_flip(r);
    return f.numerator.is_constant() ? (rel_holds(use, sign(f.numerator.constant_term())) ? Formula::truth() : Formula::falsity())
                                     : atom_from_polynomial(f.numerator, use);
  }
  return Formula::disj({Formula::conj({atom_from_polynomial(v, Rel::gt), atom_from_polynomial(f.numerator, r)}),
                        Formula::conj({atom_from_polynomial(v, Rel::lt), atom_from_polynomial(f.numerator, rel_flip(r))})});
}

namespace detail {

struct NeedBranch {
  Polynomial test;
};

struct InconsistentPath {};

/// Answers sign queries on polynomials in the free variables from a fixed
/// list of pre-chosen answers; the first query beyond the list throws
/// NeedBranch. Identical tests (up to a constant factor) reuse answers.
class SignOracle {
public:
  SignOracle(const std::vector<int>& answers, bool substitute_linear) : answers_(answers), substitute_(substitute_linear) {}

  void reduce(Polynomial& c) const {
    for (const auto& [w, value] : subst_) {
      if (c.has_var(w)) c = c.substitute(w, value);
    }
  }

  int sign(const Polynomial& raw) {
    Polynomial c = raw;
    reduce(c);
    if (c.is_constant()) return realqe::sign(c.constant_term());
    auto [scale, canon] = c.sign_canonical();
    const int ss = realqe::sign(scale);
    auto it = known_.find(canon);
    if (it != known_.end()) return ss * it->second;
    if (next_ >= answers_.size()) throw NeedBranch{canon};
    const int s = answers_[next_++];
    known_.emplace(canon, s);
    path_.emplace_back(canon, s);
    if (s == 0 && substitute_) record_substitution(canon);
    return ss * s;
  }

  const std::vector<std::pair<Polynomial, int>>& path() const { return path_; }

private:
  void record_substitution(const Polynomial& p) {
    for (const auto& w : p.vars()) {
      if (p.degree(w) != 1) continue;
      auto cs = p.coefficients(w);
      if (!cs[1].is_constant()) continue;
      Polynomial value = cs[0].scaled(Rational(-1) / cs[1].constant_term());
      for (auto& [u, prev] : subst_) {
        if (prev.has_var(w)) prev = prev.substitute(w, value);
      }
      subst_.emplace_back(w, value);
      return;
    }
  }

  const std::vector<int>& answers_;
  bool substitute_;
  std::size_t next_ = 0;
  std::map<Polynomial, int> known_;
  std::vector<std::pair<Polynomial, int>> path_;
  std::vector<std::pair<std::string, Polynomial>> subst_;
};

/// Coefficients are polynomials in the free variables; signs come from
/// the oracle of the current branch.
struct SymbolicDomain {
  using Coeff = Polynomial;
  SignOracle* oracle;
  std::size_t max_monomials;

  int sign(const Polynomial& c) const { return oracle->sign(c); }
  Polynomial mul(const Polynomial& a, const Polynomial& b) const { return Polynomial::multiply(a, b, max_monomials); }
  static Polynomial scale(const Polynomial& c, const Rational& s) { return c.scaled(s); }
  static Rational content(const Polynomial& c) { return c.is_zero() ? Rational(0) : c.content_and_primitive().first; }
  static std::string key(const Polynomial& c) { return c.to_string(); }
  void reduce(Polynomial& c) const { oracle->reduce(c); }
  [[noreturn]] static void inconsistent() { throw InconsistentPath{}; }
};

/// (E x) matrix, prepared for repeated branch runs.
struct ExistsProblem {
  std::string var;
  CompiledMatrix matrix;
  std::vector<UPoly<Polynomial>> atoms;  // coefficient lists in `var`
};

inline ExistsProblem prepare(const Formula& matrix, const std::string& x, std::size_t max_monomials) {
  ExistsProblem pb;
  pb.var = x;
  pb.matrix = CompiledMatrix::compile(matrix);
  for (const auto& a : pb.matrix.atoms) pb.atoms.push_back(atom_polynomial(a, max_monomials).coefficients(x));
  return pb;
}

/// Verdict of the univariate algorithm under the oracle's answers.
inline bool run_branch(const ExistsProblem& pb, SignOracle& oracle, std::size_t max_monomials, std::size_t max_rows,
                       PremCache<Polynomial>* cache) {
  const std::size_t n = pb.atoms.size();
  std::vector<int> known(n, kUnknown);
  auto lookup = [&](int i) { return known[static_cast<std::size_t>(i)]; };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = pb.atoms[i];
    if (p.size() <= 1) known[i] = p.empty() ? 0 : oracle.sign(p[0]);
  }
  int v = pb.matrix.eval(lookup);
  if (v != kUnknown) return v == 1;

  SymbolicDomain dom{&oracle, max_monomials};
  SignTableEngine<SymbolicDomain> eng(dom, cache, max_rows);
  std::vector<int> row(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (known[i] != kUnknown) continue;
    auto ref = eng.add(pb.atoms[i]);
    if (ref.entry < 0) {
      known[i] = ref.sign;
    } else {
      row[i] = ref.entry;
    }
  }
  v = pb.matrix.eval(lookup);
  if (v != kUnknown) return v == 1;
  eng.build();
  for (std::size_t c = 0; c < eng.column_count(); ++c) {
    int t = pb.matrix.eval([&](int i) {
      auto k = static_cast<std::size_t>(i);
      return row[k] >= 0 ? eng.sign(c, row[k]) : known[k];
    });
    if (t == 1) return true;
  }
  return false;
}

/// Branching tree of one elimination: internal nodes carry the tested
/// polynomial and children for the answers -1, 0, +1.
struct QeNode {
  int leaf = -1;  // 0 / 1 for leaves
  Polynomial test;
  std::array<std::shared_ptr<const QeNode>, 3> kids;
};

class Explorer {
public:
  Explorer(const ExistsProblem& pb, const QeOptions& opt) : pb_(pb), opt_(opt) {
    unsigned t = std::max(1U, opt.threads);
    while (t > 1) {
      ++spawn_depth_;
      t = (t + 2) / 3;
    }
  }

  std::shared_ptr<const QeNode> explore(std::vector<int> answers) {
    if (nodes_.fetch_add(1) + 1 > opt_.max_nodes) {
      throw BudgetExceeded("branch budget of " + std::to_string(opt_.max_nodes) + " nodes exhausted");
    }
    auto node = std::make_shared<QeNode>();
    SignOracle oracle(answers, opt_.substitute_linear);
    try {
      node->leaf = run_branch(pb_, oracle, opt_.max_monomials, opt_.max_table_rows, &cache_) ? 1 : 0;
      return node;
    } catch (const InconsistentPath&) {
      node->leaf = 0;
      return node;
    } catch (NeedBranch& nb) {
      node->test = std::move(nb.test);
    }
    const bool parallel = answers.size() < spawn_depth_;
    std::array<std::future<std::shared_ptr<const QeNode>>, 3> futures;
    for (int s = -1; s <= 1; ++s) {
      std::vector<int> next = answers;
      next.push_back(s);
      auto k = static_cast<std::size_t>(s + 1);
      if (parallel && s < 1) {
        futures[k] = std::async(std::launch::async, [this, next]() { return explore(next); });
      } else {
        node->kids[k] = explore(std::move(next));
      }
    }
    if (parallel) {
      for (std::size_t k = 0; k < 2; ++k) node->kids[k] = futures[k].get();
    }
    return node;
  }

  std::size_t nodes() const { return nodes_.load(); }

private:
  const ExistsProblem& pb_;
  QeOptions opt_;
  std::size_t spawn_depth_ = 0;
  std::atomic<std::size_t> nodes_{0};
  PremCache<Polynomial> cache_;
};

/// Hash-consed DAG of the compressed tree: ids 0 and 1 are the FALSE and
/// TRUE leaves; an inner node tests one polynomial and groups children that
/// are identical under <=, >=, != edges.
class CompressedTree {
public:
  struct Node {
    Polynomial test;
    std::vector<std::pair<Rel, int>> edges;
  };

  int add(const QeNode& n, bool flip) {
    if (n.leaf >= 0) return flip ? 1 - n.leaf : n.leaf;
    std::array<int, 3> k{};
    for (std::size_t i = 0; i < 3; ++i) k[i] = add(*n.kids[i], flip);
    if (k[0] == k[1] && k[1] == k[2]) return k[0];
    Node node;
    node.test = n.test;
    if (k[0] == k[1]) {
      node.edges = {{Rel::le, k[0]}, {Rel::gt, k[2]}};
    } else if (k[1] == k[2]) {
      node.edges = {{Rel::lt, k[0]}, {Rel::ge, k[1]}};
    } else if (k[0] == k[2]) {
      node.edges = {{Rel::ne, k[0]}, {Rel::eq, k[1]}};
    } else {
      node.edges = {{Rel::lt, k[0]}, {Rel::eq, k[1]}, {Rel::gt, k[2]}};
    }
    std::string key = n.test.to_string();
    for (const auto& [r, id] : node.edges) key += "|" + std::string(rel_symbol(r)) + std::to_string(id);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(nodes_.size()) + 2;
    nodes_.push_back(std::move(node));
    index_.emplace(std::move(key), id);
    return id;
  }

  /// Disjunction over TRUE paths of the conjunction of edge atoms.
  Formula to_dnf(int root) {
    std::vector<Formula> disjuncts;
    for (const auto& conj : paths(root)) disjuncts.push_back(Formula::conj(conj));
    if (disjuncts.empty()) return Formula::falsity();
    return Formula::disj(std::move(disjuncts));
  }

private:
  const std::vector<std::vector<Formula>>& paths(int id) {
    auto it = memo_.find(id);
    if (it != memo_.end()) return it->second;
    std::vector<std::vector<Formula>> out;
    if (id == 1) {
      out.emplace_back();
    } else if (id >= 2) {
      const Node& n = nodes_[static_cast<std::size_t>(id - 2)];
      for (const auto& [r, kid] : n.edges) {
        if (kid == 0) continue;
        Formula a = atom_from_polynomial(n.test, r);
        for (const auto& tail : paths(kid)) {
          std::vector<Formula> conj{a};
          conj.insert(conj.end(), tail.begin(), tail.end());
          out.push_back(std::move(conj));
        }
      }
    }
    return memo_.emplace(id, std::move(out)).first->second;
  }

  std::vector<Node> nodes_;
  std::map<std::string, int> index_;
  std::map<int, std::vector<std::vector<Formula>>> memo_;
};

inline void collect_outcomes(const QeNode& n, ConditionPath& path, std::vector<BranchOutcome>& out) {
  if (n.leaf >= 0) {
    out.push_back({path, n.leaf == 1});
    return;
  }
  for (int s = -1; s <= 1; ++s) {
    path.conditions.emplace_back(RationalFunction(n.test), s);
    collect_outcomes(*n.kids[static_cast<std::size_t>(s + 1)], path, out);
    path.conditions.pop_back();
  }
}

}  // namespace detail

/// Leaves of the branching tree for (E x) matrix, each with its path.
inline std::vector<BranchOutcome> branch_outcomes(const Formula& matrix, const std::string& x, const QeOptions& opt = {}) {
  auto pb = detail::prepare(matrix, x, opt.max_monomials);
  detail::Explorer ex(pb, opt);
  auto root = ex.explore({});
  std::vector<BranchOutcome> out;
  ConditionPath path;
  detail::collect_outcomes(*root, path, out);
  return out;
}

inline Formula simplify(const Formula& f, std::size_t max_monomials = kDefaultMaxMonomials);

namespace detail {

/// Quantifier-free formula equivalent to (E x) matrix, or to its negation
/// when `negate` is set.
/// Largest k such that x occurs in every atom only with exponents
/// divisible by 2^k (0 when x does not occur).
inline int even_power_depth(const Formula& f, const std::string& x, std::size_t max_monomials) {
  std::uint32_t g = 0;
  for_each_atom(f, [&](const Formula& a) {
    Polynomial p = atom_polynomial(a, max_monomials);
    auto it = std::find(p.vars().begin(), p.vars().end(), x);
    if (it == p.vars().end()) return;
    const auto idx = static_cast<std::size_t>(it - p.vars().begin());
    for (const auto& [e, c] : p.terms()) g = std::gcd(g, e[idx]);
  });
  int k = 0;
  while (g != 0 && g % 2 == 0) {
    g /= 2;
    ++k;
  }
  return k;
}

/// Replaces x^(2e) by x^e in every atom.
inline Formula halve_powers(const Formula& f, const std::string& x, std::size_t max_monomials) {
  switch (f.kind()) {
    case Kind::atom: {
      Polynomial p = atom_polynomial(f, max_monomials);
      auto it = std::find(p.vars().begin(), p.vars().end(), x);
      if (it == p.vars().end()) return f;
      const auto idx = static_cast<std::size_t>(it - p.vars().begin());
      std::vector<std::pair<Exponents, Rational>> terms;
      for (const auto& [e, c] : p.terms()) {
        Exponents h = e;
        h[idx] /= 2;
        terms.emplace_back(std::move(h), c);
      }
      return atom_from_polynomial(Polynomial::from_terms(p.vars(), terms), f.rel());
    }
    case Kind::neg: return Formula::neg(halve_powers(f.body(), x, max_monomials));
    case Kind::iff: return Formula::iff(halve_powers(f.lhs(), x, max_monomials), halve_powers(f.rhs(), x, max_monomials));
    case Kind::conj:
    case Kind::disj: {
      std::vector<Formula> kids;
      for (const auto& c : f.children()) kids.push_back(halve_powers(c, x, max_monomials));
      return f.kind() == Kind::conj ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    default: throw DomainError("expected a quantifier-free formula");
  }
}

inline Formula constant_or_atom(const UPoly<Rational>& p, const std::string& x, Rel r) {
  if (p.size() <= 1) return rel_holds(r, p.empty() ? 0 : sign(p[0])) ? Formula::truth() : Formula::falsity();
  return atom_from_polynomial(upoly::to_polynomial(p, x), r);
}

inline UPoly<Rational> upoly_mul(const UPoly<Rational>& a, const UPoly<Rational>& b) {
  if (a.empty() || b.empty()) return {};
  UPoly<Rational> r(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

/// Atoms in x alone with a repeated factor, rewritten over the square-free
/// factors: with p = c * O * E (O the odd-multiplicity part, E the even
/// one), p > 0 iff c*O > 0 and E != 0, and p = 0 iff O*E = 0.
inline std::optional<Formula> squarefree_atoms(const Formula& f, const std::string& x, std::size_t max_monomials) {
  switch (f.kind()) {
    case Kind::atom: {
      Polynomial p = atom_polynomial(f, max_monomials);
      if (p.vars().size() != 1 || p.vars().front() != x || p.degree(x) < 2) return std::nullopt;
      UPoly<Rational> u = upoly::from_polynomial(p, x);
      auto parts = upoly::squarefree_decomposition(u);
      if (parts.size() <= 1) return std::nullopt;
      UPoly<Rational> odd{u.back()};
      UPoly<Rational> even{Rational(1)};
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i % 2 == 0) {
          odd = upoly_mul(odd, parts[i]);
        } else {
          even = upoly_mul(even, parts[i]);
        }
      }
      const Formula even_zero = constant_or_atom(even, x, Rel::eq);
      const Formula even_nonzero = constant_or_atom(even, x, Rel::ne);
      switch (f.rel()) {
        case Rel::eq: return constant_or_atom(upoly_mul(odd, even), x, Rel::eq);
        case Rel::ne: return constant_or_atom(upoly_mul(odd, even), x, Rel::ne);
        case Rel::gt:
        case Rel::lt: return Formula::conj({constant_or_atom(odd, x, f.rel()), even_nonzero});
        case Rel::ge:
        case Rel::le: return Formula::disj({constant_or_atom(odd, x, f.rel()), even_zero});
      }
      return std::nullopt;
    }
    case Kind::neg: {
      auto b = squarefree_atoms(f.body(), x, max_monomials);
      if (!b) return std::nullopt;
      return Formula::neg(*b);
    }
    case Kind::iff: {
      auto a = squarefree_atoms(f.lhs(), x, max_monomials);
      auto b = squarefree_atoms(f.rhs(), x, max_monomials);
      if (!a && !b) return std::nullopt;
      return Formula::iff(a ? *a : f.lhs(), b ? *b : f.rhs());
    }
    case Kind::conj:
    case Kind::disj: {
      bool changed = false;
      std::vector<Formula> kids;
      for (const auto& c : f.children()) {
        auto r = squarefree_atoms(c, x, max_monomials);
        changed |= r.has_value();
        kids.push_back(r ? *r : c);
      }
      if (!changed) return std::nullopt;
      return f.kind() == Kind::conj ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    default: throw DomainError("expected a quantifier-free formula");
  }
}

inline Formula eliminate_one(const Formula& matrix, const std::string& x, const QeOptions& opt, bool negate);

/// (E x) distributes over the disjuncts of F; atoms in x alone lose their
/// repeated factors; (E x)F(x^2) holds iff (E x)(x >= 0 /\ F(x)).
/// Returns nullopt when none of these applies.
inline std::optional<Formula> eliminate_reduced(const Formula& matrix, const std::string& x, const QeOptions& opt, bool negate) {
  if (!negate && matrix.kind() == Kind::disj) {
    std::vector<Formula> parts;
    for (const auto& d : matrix.children()) parts.push_back(eliminate_one(d, x, opt, false));
    return simplify(Formula::disj(std::move(parts)), opt.max_monomials);
  }
  if (auto sf = squarefree_atoms(matrix, x, opt.max_monomials)) return eliminate_one(*sf, x, opt, negate);
  const int k = even_power_depth(matrix, x, opt.max_monomials);
  if (k == 0) return std::nullopt;
  Formula m = matrix;
  for (int i = 0; i < k; ++i) m = halve_powers(m, x, opt.max_monomials);
  m = Formula::conj({Formula::atom(Rel::ge, Formula::var(x), Formula::zero()), m});
  return eliminate_one(m, x, opt, negate);
}

inline Formula eliminate_one(const Formula& matrix, const std::string& x, const QeOptions& opt, bool negate) {
  if (opt.reduce_matrix) {
    if (auto r = eliminate_reduced(matrix, x, opt, negate)) return *r;
  }
  auto pb = prepare(matrix, x, opt.max_monomials);
  Explorer ex(pb, opt);
  auto root = ex.explore({});
  CompressedTree tree;
  int id = tree.add(*root, negate);
  if (id == 1) return Formula::truth();
  return tree.to_dnf(id);
}

}  // namespace detail

/// Quantifier-free equivalent of (E X1 ... Xk) matrix over the remaining
/// free variables, in disjunctive normal form with integer coefficients.
inline Formula eliminate_exists(const Formula& f, const QeOptions& opt = {}) {
  if (f.kind() != Kind::exists) throw DomainError("eliminate_exists expects (E X)F");
  if (!is_quantifier_free(f.body())) throw DomainError("the matrix of eliminate_exists must be quantifier-free");
  Formula m = f.body();
  const auto& vars = f.bound();
  for (std::size_t i = vars.size(); i-- > 0;) m = simplify(detail::eliminate_one(m, vars[i], opt, false), opt.max_monomials);
  return m;
}

/// Quantifier-free equivalent of a formula, eliminating the innermost
/// quantifier first; (A X)F is handled as ~(E X)~F.
inline Formula eliminate_all(const Formula& f, const QeOptions& opt = {}) {
  Formula g = to_prenex(f);
  auto parts = split_prenex(g);
  Formula m = simplify(parts.matrix, opt.max_monomials);
  // Quantifiers of one kind commute; within a block, take the variable of
  // least degree first (innermost on ties).
  auto degree_in = [&](const Formula& phi, const std::string& x) {
    int d = 0;
    for_each_atom(phi, [&](const Formula& a) { d = std::max(d, atom_polynomial(a, opt.max_monomials).degree(x)); });
    return d;
  };
  std::size_t end = parts.prefix.size();
  while (end > 0) {
    const Kind kind = parts.prefix[end - 1].first;
    std::size_t begin = end - 1;
    while (begin > 0 && parts.prefix[begin - 1].first == kind) --begin;
    std::vector<std::string> block;
    for (std::size_t i = end; i-- > begin;) block.push_back(parts.prefix[i].second);
    while (!block.empty()) {
      std::size_t best = 0;
      int best_deg = degree_in(m, block[0]);
      for (std::size_t i = 1; i < block.size(); ++i) {
        int d = degree_in(m, block[i]);
        if (d < best_deg) {
          best = i;
          best_deg = d;
        }
      }
      const std::string x = block[best];
      block.erase(block.begin() + static_cast<std::ptrdiff_t>(best));
      if (kind == Kind::exists) {
        m = detail::eliminate_one(m, x, opt, false);
      } else {
        m = detail::eliminate_one(Formula::neg(m), x, opt, true);
      }
      m = simplify(m, opt.max_monomials);
    }
    end = begin;
  }
  return m;
}

/// Truth value of a sentence.
inline bool decide_sentence(const Formula& f, const QeOptions& opt = {}) {
  auto fv = free_vars(f);
  if (!fv.empty()) throw DomainError("decide_sentence expects a sentence; free variable " + *fv.begin());
  return eval_qfree(eliminate_all(f, opt), {});
}

namespace detail {

// Sign sets as bit masks: bit 0 for -1, bit 1 for 0, bit 2 for +1.
inline constexpr unsigned kAllSigns = 7U;

inline unsigned rel_mask(Rel r) {
  switch (r) {
    case Rel::lt: return 1U;
    case Rel::eq: return 2U;
    case Rel::gt: return 4U;
    case Rel::le: return 3U;
    case Rel::ge: return 6U;
    case Rel::ne: return 5U;
  }
  return kAllSigns;
}

inline Rel mask_rel(unsigned m) {
  switch (m) {
    case 1U: return Rel::lt;
    case 2U: return Rel::eq;
    case 4U: return Rel::gt;
    case 3U: return Rel::le;
    case 6U: return Rel::ge;
    default: return Rel::ne;
  }
}

/// Atom in canonical form `p rel 0`, p primitive with positive leading
/// coefficient; constant atoms fold to TRUE / FALSE.
struct CanonAtom {
  bool constant = false;
  bool value = false;
  Polynomial poly;
  unsigned mask = 0;
};

inline std::optional<CanonAtom> canon_atom(const Formula& a, std::size_t max_monomials) {
  Polynomial p;
  try {
    p = atom_polynomial(a, max_monomials);
  } catch (const BudgetExceeded&) {
    return std::nullopt;
  }
  CanonAtom c;
  if (p.is_constant()) {
    c.constant = true;
    c.value = rel_holds(a.rel(), sign(p.constant_term()));
    return c;
  }
  auto [scale, canon] = p.sign_canonical();
  c.poly = canon;
  c.mask = rel_mask(scale < 0 ? rel_flip(a.rel()) : a.rel());
  return c;
}

inline bool is_true(const Formula& f) { return f == Formula::truth(); }
inline bool is_false(const Formula& f) { return f == Formula::falsity(); }

inline std::vector<std::string> literal_keys(const Formula& f, Kind inner) {
  std::vector<std::string> keys;
  if (f.kind() == inner) {
    for (const auto& c : f.children()) keys.push_back(print(c));
  } else {
    keys.push_back(print(f));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

inline Formula simplify_once(const Formula& f, std::size_t cap);

/// Conjunction (is_conj) or disjunction of already simplified children.
inline Formula simplify_junction(Kind kind, const std::vector<Formula>& raw, std::size_t cap) {
  const bool is_conj = kind == Kind::conj;
  std::vector<Formula> kids;
  for (const auto& c : raw) {
    Formula s = simplify_once(c, cap);
    if (s.kind() == kind) {
      for (const auto& g : s.children()) kids.push_back(g);
    } else {
      kids.push_back(s);
    }
  }
  // Absorbing and neutral constants.
  std::vector<Formula> kept;
  for (const auto& c : kids) {
    if (is_conj ? is_false(c) : is_true(c)) return c;
    if (is_conj ? is_true(c) : is_false(c)) continue;
    kept.push_back(c);
  }
  // Merge atoms over the same polynomial into one sign set.
  std::vector<Formula> merged;
  std::map<Polynomial, std::size_t> slot;
  std::vector<unsigned> masks;
  std::vector<std::optional<Polynomial>> slot_poly;
  for (const auto& c : kept) {
    std::optional<CanonAtom> a;
    if (c.kind() == Kind::atom) a = canon_atom(c, cap);
    if (!a || a->constant) {
      merged.push_back(c);
      masks.push_back(0);
      slot_poly.emplace_back();
      continue;
    }
    auto it = slot.find(a->poly);
    if (it == slot.end()) {
      slot.emplace(a->poly, merged.size());
      merged.push_back(c);
      masks.push_back(a->mask);
      slot_poly.emplace_back(a->poly);
    } else {
      std::size_t k = it->second;
      masks[k] = is_conj ? (masks[k] & a->mask) : (masks[k] | a->mask);
    }
  }
  std::vector<Formula> out;
  for (std::size_t k = 0; k < merged.size(); ++k) {
    if (!slot_poly[k]) {
      out.push_back(merged[k]);
      continue;
    }
    if (masks[k] == 0) {
      if (is_conj) return Formula::falsity();
      continue;
    }
    if (masks[k] == kAllSigns) {
      if (!is_conj) return Formula::truth();
      continue;
    }
    out.push_back(atom_from_polynomial(*slot_poly[k], mask_rel(masks[k])));
  }
  // Duplicates and absorption: drop a child whose literal set contains
  // another child's set (A and (A or B) = A; A or (A and B) = A).
  const Kind inner = is_conj ? Kind::disj : Kind::conj;
  std::vector<std::vector<std::string>> keys;
  for (const auto& c : out) keys.push_back(literal_keys(c, inner));
  std::vector<Formula> result;
  for (std::size_t i = 0; i < out.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < out.size() && !drop; ++j) {
      if (i == j) continue;
      if (!std::includes(keys[i].begin(), keys[i].end(), keys[j].begin(), keys[j].end())) continue;
      if (keys[i] == keys[j] ? j < i : true) drop = true;
    }
    if (!drop) result.push_back(out[i]);
  }
  if (result.empty()) return is_conj ? Formula::truth() : Formula::falsity();
  return is_conj ? Formula::conj(std::move(result)) : Formula::disj(std::move(result));
}

inline Formula simplify_once(const Formula& f, std::size_t cap) {
  switch (f.kind()) {
    case Kind::atom: {
      auto a = canon_atom(f, cap);
      if (!a) return f;
      if (a->constant) return a->value ? Formula::truth() : Formula::falsity();
      return atom_from_polynomial(a->poly, mask_rel(a->mask));
    }
    case Kind::neg: {
      Formula c = simplify_once(f.body(), cap);
      if (is_true(c)) return Formula::falsity();
      if (is_false(c)) return Formula::truth();
      if (c.kind() == Kind::atom) return Formula::atom(rel_negate(c.rel()), c.lhs(), c.rhs());
      if (c.kind() == Kind::neg) return c.body();
      return Formula::neg(c);
    }
    case Kind::conj:
    case Kind::disj: return simplify_junction(f.kind(), f.children(), cap);
    case Kind::iff: {
      Formula a = simplify_once(f.lhs(), cap);
      Formula b = simplify_once(f.rhs(), cap);
      if (is_true(a)) return b;
      if (is_true(b)) return a;
      if (is_false(a)) return simplify_once(Formula::neg(b), cap);
      if (is_false(b)) return simplify_once(Formula::neg(a), cap);
      if (a == b) return Formula::truth();
      return Formula::iff(a, b);
    }
    default: throw DomainError("simplify expects a quantifier-free formula");
  }
}

}  // namespace detail

/// Sound local simplification of a quantifier-free formula: constant
/// atoms fold, junctions flatten, atoms over one polynomial merge into a
/// single sign condition (an empty one makes a conjunction false),
/// duplicates and absorbed children disappear. Iterated to a fixpoint.
inline Formula simplify(const Formula& f, std::size_t max_monomials) {
  if (!is_quantifier_free(f)) throw DomainError("simplify expects a quantifier-free formula");
  Formula cur = f;
  for (;;) {
    Formula next = detail::simplify_once(cur, max_monomials);
    if (next == cur) return cur;
    cur = next;
  }
}

}  // namespace realqe
