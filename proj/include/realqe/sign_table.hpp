#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/formula.hpp"
#include "realqe/polynomial.hpp"
#include "realqe/rational.hpp"

namespace realqe {

/// Dense univariate polynomial, coefficients in ascending powers.
template <class C>
using UPoly = std::vector<C>;

/// gcd(a, b) for positive rationals: gcd of numerators over lcm of
/// denominators. gcd(0, b) = b.
inline Rational rational_gcd(const Rational& a, const Rational& b) {
  if (a == 0) return abs(b);
  if (b == 0) return abs(a);
  Integer n;
  Integer d;
  mpz_gcd(n.get_mpz_t(), a.get_num_mpz_t(), b.get_num_mpz_t());
  mpz_lcm(d.get_mpz_t(), a.get_den_mpz_t(), b.get_den_mpz_t());
  Rational g(n, d);
  g.canonicalize();
  return g;
}

/// Coefficients are exact rationals; every sign is known.
struct RationalDomain {
  using Coeff = Rational;
  int sign(const Rational& c) const { return realqe::sign(c); }
  static bool exact_zero(const Rational& c) { return c == 0; }
  static Rational mul(const Rational& a, const Rational& b) { return a * b; }
  static Rational scale(const Rational& c, const Rational& s) { return c * s; }
  static Rational content(const Rational& c) { return abs(c); }
  static std::string key(const Rational& c) { return to_string(c); }
  void reduce(Rational&) const {}
  [[noreturn]] static void inconsistent() {
    throw std::logic_error("sign table invariant violated: polynomial vanishes at two adjacent boundaries");
  }
};

/// Cache of pseudoremainders keyed by the operands' canonical keys; safe to
/// share between engines running on different threads.
template <class C>
class PremCache {
public:
  std::optional<UPoly<C>> find(const std::string& a, const std::string& b) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = map_.find({a, b});
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  void put(const std::string& a, const std::string& b, UPoly<C> r) {
    std::lock_guard<std::mutex> lock(mu_);
    map_.emplace(std::make_pair(a, b), std::move(r));
  }

private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, UPoly<C>> map_;
};

namespace upoly {

template <class D>
std::string key(const D& dom, const UPoly<typename D::Coeff>& p) {
  std::string k;
  for (const auto& c : p) {
    k += dom.key(c);
    k += ';';
  }
  return k;
}

inline void trim_exact(UPoly<Rational>& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

template <class C>
void trim_exact(UPoly<C>& p) {
  while (!p.empty() && p.back().is_zero()) p.pop_back();
}

/// Drops leading coefficients whose sign is 0. In symbolic domains this is
/// the degree dispatch: each query may branch.
template <class D>
void strip(D& dom, UPoly<typename D::Coeff>& p) {
  for (auto& c : p) dom.reduce(c);
  trim_exact(p);
  while (!p.empty() && dom.sign(p.back()) == 0) {
    p.pop_back();
    trim_exact(p);
  }
}

/// Divides by the positive rational content; the sign pattern is unchanged.
template <class D>
void normalize(const D& dom, UPoly<typename D::Coeff>& p) {
  Rational g = 0;
  for (const auto& c : p) g = rational_gcd(g, dom.content(c));
  if (g == 0 || g == 1) return;
  Rational inv = 1 / g;
  for (auto& c : p) c = dom.scale(c, inv);
}

template <class D>
UPoly<typename D::Coeff> derivative(const D& dom, const UPoly<typename D::Coeff>& p) {
  UPoly<typename D::Coeff> d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(dom.scale(p[i], Rational(static_cast<long>(i))));
  return d;
}

/// r with lc(b)^(2m) * a = q * b + r and deg r < deg b. The exponent is
/// even, so r agrees in sign with a at every root of b.
template <class D>
UPoly<typename D::Coeff> prem_even(const D& dom, const UPoly<typename D::Coeff>& a, const UPoly<typename D::Coeff>& b) {
  using C = typename D::Coeff;
  const std::size_t e = b.size() - 1;
  const C& lc = b.back();
  UPoly<C> r = a;
  trim_exact(r);
  unsigned steps = 0;
  while (!r.empty() && r.size() - 1 >= e) {
    const std::size_t shift = r.size() - 1 - e;
    C lead = r.back();
    for (auto& c : r) c = dom.mul(lc, c);
    for (std::size_t j = 0; j <= e; ++j) r[j + shift] = r[j + shift] - dom.mul(lead, b[j]);
    r.pop_back();
    trim_exact(r);
    ++steps;
  }
  if (steps % 2 == 1) {
    for (auto& c : r) c = dom.mul(lc, c);
    trim_exact(r);
  }
  return r;
}

inline UPoly<Rational> from_polynomial(const Polynomial& p, const std::string& v) {
  UPoly<Rational> out;
  if (p.is_zero()) return out;
  for (const auto& c : p.coefficients(v)) {
    if (!c.is_constant()) throw DomainError("expected a polynomial in " + v + " only");
    out.push_back(c.constant_term());
  }
  trim_exact(out);
  return out;
}

inline Polynomial to_polynomial(const UPoly<Rational>& p, const std::string& v) {
  std::vector<Polynomial> cs(p.begin(), p.end());
  return Polynomial::from_coefficients(v, cs);
}

inline UPoly<Rational> monic(UPoly<Rational> p) {
  trim_exact(p);
  if (p.empty()) return p;
  Rational inv = 1 / p.back();
  for (auto& c : p) c *= inv;
  return p;
}

/// Quotient of an exact division.
inline UPoly<Rational> divide(UPoly<Rational> a, const UPoly<Rational>& b) {
  trim_exact(a);
  if (a.size() < b.size()) return {};
  UPoly<Rational> q(a.size() - b.size() + 1);
  for (std::size_t i = q.size(); i-- > 0;) {
    Rational f = a[i + b.size() - 1] / b.back();
    q[i] = f;
    for (std::size_t j = 0; j < b.size(); ++j) a[i + j] -= f * b[j];
  }
  return q;
}

inline UPoly<Rational> gcd(UPoly<Rational> a, UPoly<Rational> b) {
  RationalDomain dom;
  trim_exact(a);
  trim_exact(b);
  while (!b.empty()) {
    UPoly<Rational> r = prem_even(dom, a, b);
    a = std::move(b);
    b = std::move(r);
    normalize(dom, b);
  }
  return monic(a);
}

/// Yun's square-free decomposition: p = lc(p) * f_1 * f_2^2 * ..., each f_i
/// monic and square-free; out[i - 1] = f_i (constant 1 where absent).
inline std::vector<UPoly<Rational>> squarefree_decomposition(const UPoly<Rational>& p) {
  RationalDomain dom;
  std::vector<UPoly<Rational>> out;
  UPoly<Rational> a = monic(p);
  if (a.size() <= 1) return out;
  UPoly<Rational> da = derivative(dom, a);
  UPoly<Rational> g = gcd(a, da);
  UPoly<Rational> b = divide(a, g);
  UPoly<Rational> c = divide(da, g);
  for (;;) {
    UPoly<Rational> d = c;
    UPoly<Rational> db = derivative(dom, b);
    for (std::size_t i = 0; i < db.size(); ++i) d[i] -= db[i];
    trim_exact(d);
    if (b.size() <= 1) break;
    UPoly<Rational> f = gcd(b, d);
    out.push_back(f);
    b = divide(b, f);
    c = d.empty() ? d : divide(d, f);
  }
  return out;
}

}  // namespace upoly

enum class ColumnKind : std::uint8_t { interval, boundary };

struct SignColumn {
  ColumnKind kind = ColumnKind::interval;
  std::vector<int> signs;
  bool operator==(const SignColumn&) const = default;
};

/// Rows are polynomials; columns alternate interval, boundary, ..., interval.
struct SignTable {
  std::vector<Polynomial> polys;
  std::vector<SignColumn> columns;

  std::size_t boundary_count() const { return columns.size() / 2; }
  bool operator==(const SignTable&) const = default;

  /// Violations of the table invariants; empty when well formed.
  std::vector<std::string> check() const {
    std::vector<std::string> issues;
    if (columns.size() % 2 == 0) issues.push_back("column count is even");
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const SignColumn& col = columns[c];
      ColumnKind want = c % 2 == 0 ? ColumnKind::interval : ColumnKind::boundary;
      if (col.kind != want) issues.push_back("column " + std::to_string(c) + " has the wrong kind");
      if (col.signs.size() != polys.size()) issues.push_back("column " + std::to_string(c) + " has the wrong arity");
    }
    if (!issues.empty()) return issues;
    for (std::size_t c = 1; c < columns.size(); c += 2) {
      bool owned = false;
      for (std::size_t r = 0; r < polys.size(); ++r) {
        if (polys[r].total_degree() > 0 && columns[c].signs[r] == 0) owned = true;
      }
      if (!owned) issues.push_back("boundary column " + std::to_string(c) + " has no vanishing polynomial");
      for (std::size_t r = 0; r < polys.size(); ++r) {
        int s = columns[c].signs[r];
        if (s == 0) continue;
        if (columns[c - 1].signs[r] != s || columns[c + 1].signs[r] != s) {
          issues.push_back("row " + std::to_string(r) + " changes sign across boundary " + std::to_string(c) + " without vanishing");
        }
      }
    }
    for (std::size_t c = 0; c < columns.size(); c += 2) {
      for (std::size_t r = 0; r < polys.size(); ++r) {
        if (polys[r].total_degree() > 0 && columns[c].signs[r] == 0) {
          issues.push_back("row " + std::to_string(r) + " vanishes on interval " + std::to_string(c));
        }
      }
    }
    return issues;
  }
};

/// Incremental sign-table construction over a coefficient domain D.
///
/// Only the polynomials the construction actually needs are generated:
/// derivatives of every row, plus the pseudoremainders step (i) asks for.
/// A missing remainder is added and the table is rebuilt from scratch.
template <class D>
class SignTableEngine {
public:
  using Coeff = typename D::Coeff;
  using Poly = UPoly<Coeff>;

  struct Entry {
    Poly poly;
    std::string key;
    int degree = 0;
    int derivative = -1;                  // entry id, or -1 for a constant
    std::map<int, int> remainders;        // owner id -> entry id, -1 zero, -2 constant
    std::map<int, Coeff> constants;       // owner id -> the constant remainder
  };

  /// Reference to an input: a table row, or a sign that holds everywhere.
  struct Ref {
    int entry = -1;
    int sign = 0;
  };

  explicit SignTableEngine(D& dom, PremCache<Coeff>* cache = nullptr, std::size_t max_rows = Limits{}.max_table_rows)
      : dom_(dom), cache_(cache), max_rows_(max_rows) {}

  /// Registers an input polynomial (already over the domain).
  Ref add(Poly p) {
    upoly::strip(dom_, p);
    if (p.empty()) return {-1, 0};
    if (p.size() == 1) return {-1, dom_.sign(p[0])};
    upoly::normalize(dom_, p);
    return {insert(std::move(p)), 0};
  }

  void build() {
    while (!attempt()) {
    }
  }

  const std::vector<Entry>& entries() const { return entries_; }
  /// Entry ids sorted by degree, then key.
  const std::vector<int>& order() const { return order_; }
  std::size_t column_count() const { return columns_.size(); }
  bool is_boundary(std::size_t c) const { return c % 2 == 1; }
  int sign(std::size_t column, const Ref& r) const { return r.entry < 0 ? r.sign : columns_[column][static_cast<std::size_t>(r.entry)]; }
  int sign(std::size_t column, int entry) const { return columns_[column][static_cast<std::size_t>(entry)]; }

private:
  int insert(Poly p) {
    std::string k = upoly::key(dom_, p);
    auto it = by_key_.find(k);
    if (it != by_key_.end()) return it->second;
    if (entries_.size() >= max_rows_) throw BudgetExceeded("sign table exceeds " + std::to_string(max_rows_) + " rows");
    int id = static_cast<int>(entries_.size());
    fresh_.push_back(id);
    Entry e;
    e.degree = static_cast<int>(p.size()) - 1;
    e.key = k;
    e.poly = std::move(p);
    entries_.push_back(std::move(e));
    by_key_.emplace(k, id);
    Poly d = upoly::derivative(dom_, entries_[static_cast<std::size_t>(id)].poly);
    upoly::trim_exact(d);
    if (d.size() >= 2) {
      upoly::normalize(dom_, d);
      int did = insert(std::move(d));
      entries_[static_cast<std::size_t>(id)].derivative = did;
    }
    dirty_ = true;
    return id;
  }

  void sort_order() {
    order_.resize(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) order_[i] = static_cast<int>(i);
    std::sort(order_.begin(), order_.end(), [&](int a, int b) {
      const Entry& x = entries_[static_cast<std::size_t>(a)];
      const Entry& y = entries_[static_cast<std::size_t>(b)];
      if (x.degree != y.degree) return x.degree < y.degree;
      return x.key < y.key;
    });
    dirty_ = false;
  }

  Poly remainder(const Entry& p, const Entry& owner) {
    if (cache_ != nullptr) {
      if (auto hit = cache_->find(p.key, owner.key)) return *hit;
    }
    Poly r = upoly::prem_even(dom_, p.poly, owner.poly);
    if (cache_ != nullptr) cache_->put(p.key, owner.key, r);
    return r;
  }

  /// Drops every row from position m of the current order on, keeping the
  /// table of the rows before it: boundaries no kept row vanishes at are
  /// removed and the intervals around them merged.
  void project_to_prefix(std::size_t m) {
    std::vector<char> keep(entries_.size(), 0);
    for (std::size_t i = 0; i < m; ++i) keep[static_cast<std::size_t>(order_[i])] = 1;
    std::vector<std::vector<int>> out;
    std::vector<int> owners;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      auto& col = columns_[c];
      int owner = -1;
      if (c % 2 == 1) {
        for (std::size_t i = 0; i < m && owner < 0; ++i) {
          if (col[static_cast<std::size_t>(order_[i])] == 0) owner = order_[i];
        }
        if (owner < 0) continue;
      } else if (out.size() % 2 == 1) {
        continue;
      }
      out.push_back(std::move(col));
      owners.push_back(owner);
    }
    owners_ = std::move(owners);
    for (auto& col : out) {
      col.resize(entries_.size(), 0);
      for (std::size_t id = 0; id < col.size(); ++id) {
        if (!keep[id]) col[id] = 0;
      }
    }
    columns_ = std::move(out);
  }

  /// One pass over the rows; false when a new polynomial had to be added.
  /// A pass after an insertion resumes at the first new row.
  bool attempt() {
    sort_order();
    const std::size_t n = entries_.size();
    std::size_t start = 0;
    if (processed_ > 0 && !fresh_.empty()) {
      std::vector<std::size_t> pos_of(n, 0);
      for (std::size_t i = 0; i < n; ++i) pos_of[static_cast<std::size_t>(order_[i])] = i;
      start = n;
      for (int id : fresh_) start = std::min(start, pos_of[static_cast<std::size_t>(id)]);
      start = std::min(start, processed_);
      project_to_prefix(start);
    } else {
      columns_.assign(1, std::vector<int>(n, 0));
      owners_.assign(1, -1);
    }
    fresh_.clear();
    for (std::size_t pos = start; pos < order_.size(); ++pos) {
      processed_ = pos;
      const int id = order_[pos];
      const int lead = dom_.sign(entries_[static_cast<std::size_t>(id)].poly.back());
      if (lead == 0) throw std::logic_error("stripped polynomial has a vanishing leading coefficient");
      // Step (i): signs at the existing boundaries.
      std::vector<int> at(columns_.size(), 0);
      for (std::size_t c = 1; c < columns_.size(); c += 2) {
        const int owner = owners_[c];
        if (owner < 0) throw std::logic_error("boundary without a vanishing polynomial");
        Entry& e = entries_[static_cast<std::size_t>(id)];
        auto known = e.remainders.find(owner);
        if (known != e.remainders.end()) {
          if (known->second == -1) {
            at[c] = 0;
          } else if (known->second == -2) {
            at[c] = dom_.sign(e.constants.at(owner));
          } else {
            at[c] = columns_[c][static_cast<std::size_t>(known->second)];
          }
          continue;
        }
        Poly r = remainder(e, entries_[static_cast<std::size_t>(owner)]);
        upoly::strip(dom_, r);
        if (r.empty()) {
          e.remainders[owner] = -1;
          at[c] = 0;
        } else if (r.size() == 1) {
          e.remainders[owner] = -2;
          at[c] = dom_.sign(r[0]);
          e.constants.emplace(owner, std::move(r[0]));
        } else {
          upoly::normalize(dom_, r);
          auto it = by_key_.find(upoly::key(dom_, r));
          if (it == by_key_.end()) {
            const int rid = insert(std::move(r));
            entries_[static_cast<std::size_t>(id)].remainders[owner] = rid;
            return false;
          }
          e.remainders[owner] = it->second;
          at[c] = columns_[c][static_cast<std::size_t>(it->second)];
        }
      }
      const Entry& e = entries_[static_cast<std::size_t>(id)];
      const int deg = e.degree;
      const int minus_inf = deg % 2 == 1 ? -lead : lead;
      const int plus_inf = lead;
      // Step (ii): locate the roots inside the open intervals.
      std::vector<std::vector<int>> next;
      std::vector<int> next_owners;
      next.reserve(columns_.size() + 2);
      next_owners.reserve(columns_.size() + 2);
      const auto slot = static_cast<std::size_t>(id);
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c % 2 == 1) {
          columns_[c][slot] = at[c];
          next.push_back(std::move(columns_[c]));
          next_owners.push_back(owners_[c]);
          continue;
        }
        int left = c == 0 ? minus_inf : at[c - 1];
        int right = c + 1 == columns_.size() ? plus_inf : at[c + 1];
        if (left * right == -1) {
          std::vector<int> lo = columns_[c];
          std::vector<int> root = columns_[c];
          std::vector<int>& hi = columns_[c];
          lo[slot] = left;
          root[slot] = 0;
          hi[slot] = right;
          next.push_back(std::move(lo));
          next.push_back(std::move(root));
          next.push_back(std::move(hi));
          next_owners.insert(next_owners.end(), {-1, id, -1});
        } else {
          if (left == 0 && right == 0) dom_.inconsistent();
          columns_[c][slot] = left != 0 ? left : right;
          next.push_back(std::move(columns_[c]));
          next_owners.push_back(-1);
        }
      }
      columns_ = std::move(next);
      owners_ = std::move(next_owners);
    }
    processed_ = order_.size();
    return true;
  }

  D& dom_;
  PremCache<Coeff>* cache_;
  std::size_t max_rows_;
  std::vector<int> owners_;  // per column: the row that created the boundary, -1 on intervals
  std::vector<int> fresh_;
  std::size_t processed_ = 0;
  std::vector<Entry> entries_;
  std::map<std::string, int> by_key_;
  std::vector<int> order_;
  std::vector<std::vector<int>> columns_;
  bool dirty_ = true;
};

/// Polynomials closed under derivative and pseudoremainder, with
/// back-pointers into the list.
struct ClosureList {
  std::vector<Polynomial> polys;
  /// Index of each polynomial's derivative, -1 for constants (and for
  /// derivatives that are not part of the list).
  std::vector<int> derivative;
  /// (i, j) -> index of the pseudoremainder of polys[i] by polys[j];
  /// -1 when it is zero.
  std::map<std::pair<int, int>, int> remainder;
};

namespace detail {

inline std::string common_variable(const std::vector<Polynomial>& ps) {
  std::string v;
  for (const auto& p : ps) {
    for (const auto& x : p.vars()) {
      if (v.empty()) {
        v = x;
      } else if (x != v) {
        throw DomainError("expected univariate polynomials in a single variable, found " + v + " and " + x);
      }
    }
  }
  return v;
}

inline bool degree_text_less(const Polynomial& a, const Polynomial& b) {
  int da = a.total_degree();
  int db = b.total_degree();
  if (da != db) return da < db;
  return a.to_string() < b.to_string();
}

}  // namespace detail

/// Closure of P under derivative and pseudoremainder (pairs with
/// deg a >= deg b >= 1), dropping zeros and exact duplicates. Sorted by
/// degree, ties by canonical text.
inline ClosureList closure(const std::vector<Polynomial>& input) {
  const std::string v = detail::common_variable(input);
  std::vector<Polynomial> all;
  auto known = [&](const Polynomial& p) { return std::find(all.begin(), all.end(), p) != all.end(); };
  std::vector<Polynomial> work;
  for (const auto& p : input) {
    if (p.is_zero()) throw DomainError("closure input contains the zero polynomial");
    if (!known(p)) {
      all.push_back(p);
      work.push_back(p);
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> done;
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t n = all.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (all[i].is_constant()) continue;
      Polynomial d = all[i].derivative(v);
      if (!d.is_zero() && !known(d)) {
        all.push_back(d);
        grew = true;
      }
    }
    const std::size_t m = all.size();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j || done.count({i, j}) > 0) continue;
        int di = all[i].degree(v);
        int dj = all[j].degree(v);
        if (dj < 1 || di < dj) continue;
        done.insert({i, j});
        Polynomial r = pseudoremainder(all[i], all[j], v);
        if (!r.is_zero() && !known(r)) {
          all.push_back(r);
          grew = true;
        }
      }
    }
  }
  std::sort(all.begin(), all.end(), detail::degree_text_less);
  ClosureList out;
  out.polys = all;
  auto index = [&](const Polynomial& p) {
    auto it = std::find(all.begin(), all.end(), p);
    return it == all.end() ? -1 : static_cast<int>(it - all.begin());
  };
  for (const auto& p : all) out.derivative.push_back(p.is_constant() ? -1 : index(p.derivative(v)));
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (i == j) continue;
      int di = all[i].degree(v);
      int dj = all[j].degree(v);
      if (dj < 1 || di < dj) continue;
      Polynomial r = pseudoremainder(all[i], all[j], v);
      out.remainder[{static_cast<int>(i), static_cast<int>(j)}] = r.is_zero() ? -1 : index(r);
    }
  }
  return out;
}

/// A built table together with the polynomials it ranges over.
struct SignTableResult {
  ClosureList closure;
  SignTable table;
  /// Row of each input polynomial, in input order.
  std::vector<int> input_rows;
};

/// Sign table of the univariate inputs P, over the polynomials the
/// construction needs (inputs, their derivative chains and the
/// pseudoremainders step (i) asks for). Constant inputs become rows with a
/// single sign replicated across the columns.
inline SignTableResult build_sign_table(const std::vector<Polynomial>& input, std::size_t max_rows = Limits{}.max_table_rows) {
  const std::string v = detail::common_variable(input);
  RationalDomain dom;
  SignTableEngine<RationalDomain> eng(dom, nullptr, max_rows);
  using Ref = SignTableEngine<RationalDomain>::Ref;
  std::vector<Ref> refs;
  for (const auto& p : input) refs.push_back(eng.add(upoly::from_polynomial(p, v.empty() ? "X" : v)));
  eng.build();

  SignTableResult out;
  // Constant rows first (degree order), then the engine rows.
  std::vector<std::pair<Polynomial, int>> constants;
  std::vector<int> const_row(input.size(), -1);
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (refs[i].entry >= 0) continue;
    auto it = std::find_if(constants.begin(), constants.end(), [&](const auto& c) { return c.first == input[i]; });
    if (it == constants.end()) {
      const_row[i] = static_cast<int>(constants.size());
      constants.emplace_back(input[i], refs[i].sign);
    } else {
      const_row[i] = static_cast<int>(it - constants.begin());
    }
  }
  std::sort(constants.begin(), constants.end(), [](const auto& a, const auto& b) { return detail::degree_text_less(a.first, b.first); });
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (refs[i].entry >= 0) continue;
    auto it = std::find_if(constants.begin(), constants.end(), [&](const auto& c) { return c.first == input[i]; });
    const_row[i] = static_cast<int>(it - constants.begin());
  }
  const auto& entries = eng.entries();
  const auto& order = eng.order();
  std::vector<int> row_of_entry(entries.size(), -1);
  for (const auto& c : constants) out.table.polys.push_back(c.first);
  for (std::size_t k = 0; k < order.size(); ++k) {
    row_of_entry[static_cast<std::size_t>(order[k])] = static_cast<int>(out.table.polys.size());
    out.table.polys.push_back(upoly::to_polynomial(entries[static_cast<std::size_t>(order[k])].poly, v));
  }
  for (std::size_t c = 0; c < eng.column_count(); ++c) {
    SignColumn col;
    col.kind = c % 2 == 0 ? ColumnKind::interval : ColumnKind::boundary;
    for (const auto& k : constants) col.signs.push_back(k.second);
    for (int id : order) col.signs.push_back(eng.sign(c, id));
    out.table.columns.push_back(std::move(col));
  }
  out.closure.polys = out.table.polys;
  out.closure.derivative.assign(out.table.polys.size(), -1);
  for (std::size_t id = 0; id < entries.size(); ++id) {
    int row = row_of_entry[id];
    const auto& e = entries[id];
    if (e.derivative >= 0) out.closure.derivative[static_cast<std::size_t>(row)] = row_of_entry[static_cast<std::size_t>(e.derivative)];
    for (const auto& [owner, r] : e.remainders) {
      int target = r >= 0 ? row_of_entry[static_cast<std::size_t>(r)] : -1;
      out.closure.remainder[{row, row_of_entry[static_cast<std::size_t>(owner)]}] = target;
    }
  }
  for (std::size_t i = 0; i < input.size(); ++i) {
    out.input_rows.push_back(refs[i].entry >= 0 ? row_of_entry[static_cast<std::size_t>(refs[i].entry)] : const_row[i]);
  }
  return out;
}

/// Table restricted to the given rows: boundaries where none of them
/// vanishes (for a row of positive degree) are dropped and the adjacent
/// intervals merged.
inline SignTable restrict_table(const SignTable& t, const std::vector<int>& rows) {
  SignTable out;
  for (int r : rows) out.polys.push_back(t.polys.at(static_cast<std::size_t>(r)));
  auto project = [&](const SignColumn& c) {
    SignColumn p;
    p.kind = c.kind;
    for (int r : rows) p.signs.push_back(c.signs[static_cast<std::size_t>(r)]);
    return p;
  };
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (t.columns[c].kind == ColumnKind::boundary) {
      bool keep = false;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (out.polys[k].total_degree() > 0 && t.columns[c].signs[static_cast<std::size_t>(rows[k])] == 0) keep = true;
      }
      if (!keep) {
        ++c;  // skip the boundary and the interval after it; both merge into the previous interval
        continue;
      }
    }
    out.columns.push_back(project(t.columns[c]));
  }
  return out;
}

namespace detail {

inline constexpr int kUnknown = 2;

/// Quantifier-free matrix flattened for repeated evaluation under
/// (possibly partial) sign assignments of its atoms.
struct CompiledMatrix {
  struct Node {
    Kind kind = Kind::atom;
    Rel rel = Rel::eq;
    int atom = -1;
    std::vector<int> kids;
  };
  std::vector<Node> nodes;
  std::vector<Formula> atoms;
  int root = -1;

  static CompiledMatrix compile(const Formula& f) {
    CompiledMatrix m;
    m.root = m.add(f);
    return m;
  }

  /// Kleene evaluation: 0 false, 1 true, kUnknown undetermined.
  /// `sign_of(i)` returns the sign of atom i's polynomial or kUnknown.
  template <class F>
  int eval(F&& sign_of) const {
    return eval_node(root, sign_of);
  }

private:
  int add(const Formula& f) {
    Node n;
    n.kind = f.kind();
    switch (f.kind()) {
      case Kind::atom:
        n.rel = f.rel();
        n.atom = static_cast<int>(atoms.size());
        atoms.push_back(f);
        break;
      case Kind::neg:
      case Kind::conj:
      case Kind::disj:
      case Kind::iff:
        for (const auto& c : f.children()) n.kids.push_back(add(c));
        break;
      default: throw DomainError("expected a quantifier-free formula");
    }
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  template <class F>
  int eval_node(int i, F& sign_of) const {
    const Node& n = nodes[static_cast<std::size_t>(i)];
    switch (n.kind) {
      case Kind::atom: {
        int s = sign_of(n.atom);
        if (s == kUnknown) return kUnknown;
        return rel_holds(n.rel, s) ? 1 : 0;
      }
      case Kind::neg: {
        int v = eval_node(n.kids[0], sign_of);
        return v == kUnknown ? kUnknown : 1 - v;
      }
      case Kind::conj: {
        int out = 1;
        for (int k : n.kids) {
          int v = eval_node(k, sign_of);
          if (v == 0) return 0;
          if (v == kUnknown) out = kUnknown;
        }
        return out;
      }
      case Kind::disj: {
        int out = 0;
        for (int k : n.kids) {
          int v = eval_node(k, sign_of);
          if (v == 1) return 1;
          if (v == kUnknown) out = kUnknown;
        }
        return out;
      }
      case Kind::iff: {
        int a = eval_node(n.kids[0], sign_of);
        int b = eval_node(n.kids[1], sign_of);
        if (a == kUnknown || b == kUnknown) return kUnknown;
        return a == b ? 1 : 0;
      }
      default: return kUnknown;
    }
  }
};

/// Sign table over the atoms of a quantifier-free formula in (at most) one
/// variable, restricted to the atom polynomials, with each column's truth.
struct UnivariateAnalysis {
  SignTable table;
  std::vector<bool> satisfied;
};

inline UnivariateAnalysis analyze_univariate(const Formula& f, std::size_t max_monomials = kDefaultMaxMonomials) {
  CompiledMatrix m = CompiledMatrix::compile(f);
  std::vector<Polynomial> polys;
  for (const auto& a : m.atoms) polys.push_back(atom_polynomial(a, max_monomials));
  if (polys.empty()) polys.push_back(Polynomial(1));
  SignTableResult r = build_sign_table(polys);
  std::vector<int> rows;
  for (int row : r.input_rows) {
    if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end());
  UnivariateAnalysis out;
  out.table = restrict_table(r.table, rows);
  for (const auto& col : out.table.columns) {
    int v = m.eval([&](int atom) {
      int row = r.input_rows[static_cast<std::size_t>(atom)];
      auto it = std::find(rows.begin(), rows.end(), row);
      return col.signs[static_cast<std::size_t>(it - rows.begin())];
    });
    out.satisfied.push_back(v == 1);
  }
  return out;
}

}  // namespace detail

/// Truth of (E X)F where F is quantifier-free in X alone: some column of
/// the sign table satisfies F.
inline bool decide_exists_univariate(const Formula& sentence, std::size_t max_monomials = kDefaultMaxMonomials) {
  if (sentence.kind() != Kind::exists || sentence.bound().size() != 1) {
    throw DomainError("expected a sentence (E X)F with one bound variable");
  }
  const Formula& body = sentence.body();
  if (!is_quantifier_free(body)) throw DomainError("the matrix must be quantifier-free");
  auto fv = free_vars(body);
  fv.erase(sentence.bound().front());
  if (!fv.empty()) throw DomainError("the matrix has free variables besides " + sentence.bound().front());
  auto a = detail::analyze_univariate(body, max_monomials);
  return std::find(a.satisfied.begin(), a.satisfied.end(), true) != a.satisfied.end();
}

/// Number of connected components of the subset of the line defined by a
/// quantifier-free formula in at most one variable.
inline std::size_t count_components(const Formula& f, std::size_t max_monomials = kDefaultMaxMonomials) {
  if (!is_quantifier_free(f)) throw DomainError("count_components expects a quantifier-free formula");
  if (free_vars(f).size() > 1) throw DomainError("count_components expects at most one free variable");
  auto a = detail::analyze_univariate(f, max_monomials);
  std::size_t runs = 0;
  bool prev = false;
  for (bool s : a.satisfied) {
    if (s && !prev) ++runs;
    prev = s;
  }
  return runs;
}

inline char sign_char(int s) { return s < 0 ? '-' : (s > 0 ? '+' : '0'); }

/// Human-readable matrix: one row per polynomial, one column per table
/// column, with an I/B header.
inline std::string format_table_human(const SignTable& t) {
  std::size_t width = 0;
  std::vector<std::string> names;
  for (const auto& p : t.polys) {
    names.push_back(p.to_string());
    width = std::max(width, names.back().size());
  }
  std::ostringstream os;
  os << std::string(width, ' ');
  for (const auto& c : t.columns) os << ' ' << (c.kind == ColumnKind::interval ? 'I' : 'B');
  os << '\n';
  for (std::size_t r = 0; r < t.polys.size(); ++r) {
    os << names[r] << std::string(width - names[r].size(), ' ');
    for (const auto& c : t.columns) os << ' ' << sign_char(c.signs[r]);
    os << '\n';
  }
  return os.str();
}

/// Line-oriented format: `P <poly>` per row, then `I s,s,...` or
/// `B s,s,...` per column, signs in row order.
inline std::string format_table_machine(const SignTable& t) {
  std::ostringstream os;
  for (const auto& p : t.polys) os << "P " << p.to_string() << '\n';
  for (const auto& c : t.columns) {
    os << (c.kind == ColumnKind::interval ? 'I' : 'B');
    for (std::size_t r = 0; r < c.signs.size(); ++r) os << (r == 0 ? ' ' : ',') << c.signs[r];
    os << '\n';
  }
  return os.str();
}

inline SignTable parse_table_machine(const std::string& text) {
  SignTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const bool bare = line.size() == 1 && (line[0] == 'I' || line[0] == 'B');
    if (!bare && (line.size() < 2 || line[1] != ' ')) throw SyntaxError("malformed sign table line", lineno, 1);
    const std::string rest = bare ? std::string() : line.substr(2);
    if (line[0] == 'P') {
      if (!t.columns.empty()) throw SyntaxError("polynomial after the first column", lineno, 1);
      t.polys.push_back(parse_polynomial(rest));
    } else if (line[0] == 'I' || line[0] == 'B') {
      SignColumn c;
      c.kind = line[0] == 'I' ? ColumnKind::interval : ColumnKind::boundary;
      std::istringstream fields(rest);
      std::string tok;
      while (std::getline(fields, tok, ',')) {
        if (tok != "-1" && tok != "0" && tok != "1") throw SyntaxError("sign must be -1, 0 or 1", lineno, 3);
        c.signs.push_back(std::stoi(tok));
      }
      if (c.signs.size() != t.polys.size()) throw SyntaxError("column arity differs from the row count", lineno, 1);
      t.columns.push_back(std::move(c));
    } else {
      throw SyntaxError("unknown line tag", lineno, 1);
    }
  }
  return t;
}

}  // namespace realqe
