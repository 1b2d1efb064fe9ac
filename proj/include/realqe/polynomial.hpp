#pragma once

#include <algorithm>
#include <cctype>
#include <climits>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/rational.hpp"

namespace realqe {

using Assignment = std::map<std::string, Rational, std::less<>>;
using Exponents = std::vector<std::uint32_t>;

/// Degree reported for the zero polynomial.
inline constexpr int kDegreeNegInf = INT_MIN;

inline constexpr std::size_t kDefaultMaxMonomials = 1'000'000;

/// Multivariate polynomial over the rationals in standard form.
///
/// The variable list is kept sorted and minimal (only variables that occur
/// with a positive exponent somewhere). Terms are stored sparsely, keyed by
/// exponent vectors in lexicographic order with the first variable most
/// significant; iteration runs from the leading monomial downwards. Zero
/// coefficients are never stored, so the zero polynomial has no terms.
class Polynomial {
public:
  using TermMap = std::map<Exponents, Rational, std::greater<Exponents>>;

  Polynomial() = default;
  Polynomial(const Rational& c) {  // NOLINT(google-explicit-constructor)
    Rational q = c;
    q.canonicalize();
    if (q != 0) terms_.emplace(Exponents{}, q);
  }
  Polynomial(long c) : Polynomial(Rational(c)) {}  // NOLINT(google-explicit-constructor)
  Polynomial(int c) : Polynomial(Rational(c)) {}   // NOLINT(google-explicit-constructor)

  static Polynomial variable(std::string name) {
    Polynomial p;
    p.vars_.push_back(std::move(name));
    p.terms_.emplace(Exponents{1}, Rational(1));
    return p;
  }

  /// Builds from raw terms over `vars` (need not be sorted or minimal).
  static Polynomial from_terms(std::vector<std::string> vars, const std::vector<std::pair<Exponents, Rational>>& terms) {
    Polynomial p;
    std::vector<std::size_t> order(vars.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vars[a] < vars[b]; });
    std::vector<std::string> sorted;
    std::vector<std::size_t> slot(vars.size());
    for (std::size_t idx : order) {
      if (sorted.empty() || sorted.back() != vars[idx]) sorted.push_back(vars[idx]);
      slot[idx] = sorted.size() - 1;
    }
    p.vars_ = std::move(sorted);
    for (const auto& [exps, c] : terms) {
      if (exps.size() != vars.size()) throw DomainError("exponent vector arity mismatch");
      Exponents e(p.vars_.size(), 0);
      for (std::size_t i = 0; i < exps.size(); ++i) e[slot[i]] += exps[i];
      p.add_term(std::move(e), c);
    }
    p.prune();
    return p;
  }

  const std::vector<std::string>& vars() const noexcept { return vars_; }
  const TermMap& terms() const noexcept { return terms_; }

  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept { return vars_.empty(); }
  std::size_t monomial_count() const noexcept { return terms_.size(); }

  Rational constant_term() const {
    if (terms_.empty()) return 0;
    auto it = terms_.find(Exponents(vars_.size(), 0));
    return it == terms_.end() ? Rational(0) : it->second;
  }

  /// Coefficient of the lexicographically leading monomial.
  Rational leading_coefficient() const { return terms_.empty() ? Rational(0) : terms_.begin()->second; }

  bool has_var(std::string_view v) const { return index_of(v).has_value(); }

  /// Highest exponent of `v` with a nonzero coefficient; kDegreeNegInf for 0.
  int degree(std::string_view v) const {
    if (terms_.empty()) return kDegreeNegInf;
    auto idx = index_of(v);
    if (!idx) return 0;
    std::uint32_t d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[*idx]);
    return static_cast<int>(d);
  }

  int total_degree() const {
    if (terms_.empty()) return kDegreeNegInf;
    std::uint32_t d = 0;
    for (const auto& [e, c] : terms_) {
      std::uint32_t s = 0;
      for (auto x : e) s += x;
      d = std::max(d, s);
    }
    return static_cast<int>(d);
  }

  /// Largest coefficient bit size (numerator or denominator).
  std::size_t coefficient_bits() const {
    std::size_t bits = 0;
    for (const auto& [e, c] : terms_) {
      bits = std::max(bits, mpz_sizeinbase(c.get_num_mpz_t(), 2));
      bits = std::max(bits, mpz_sizeinbase(c.get_den_mpz_t(), 2));
    }
    return bits;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.vars_ == b.vars_ && a.terms_ == b.terms_; }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }
  friend bool operator<(const Polynomial& a, const Polynomial& b) {
    return std::tie(a.vars_, a.terms_) < std::tie(b.vars_, b.terms_);
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) { return combine(a, b, false); }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return combine(a, b, true); }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) { return multiply(a, b, kDefaultMaxMonomials); }
  Polynomial& operator+=(const Polynomial& b) { return *this = *this + b; }
  Polynomial& operator-=(const Polynomial& b) { return *this = *this - b; }
  Polynomial& operator*=(const Polynomial& b) { return *this = *this * b; }

  Polynomial scaled(const Rational& s) const {
    if (s == 0) return {};
    Polynomial r = *this;
    for (auto& [e, c] : r.terms_) c *= s;
    return r;
  }

  /// Product with an explicit monomial cap; throws BudgetExceeded once the
  /// partial result exceeds `max_monomials` terms.
  static Polynomial multiply(const Polynomial& a, const Polynomial& b, std::size_t max_monomials) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<std::string> vars;
    auto [ma, mb] = merge_vars(a.vars_, b.vars_, vars);
    Polynomial r;
    r.vars_ = std::move(vars);
    const std::size_t n = r.vars_.size();
    std::vector<Exponents> ea;
    ea.reserve(a.terms_.size());
    for (const auto& [e, c] : a.terms_) ea.push_back(remap(e, ma, n));
    Exponents tmp(n);
    for (const auto& [eb0, cb] : b.terms_) {
      Exponents eb = remap(eb0, mb, n);
      std::size_t i = 0;
      for (const auto& [e0, ca] : a.terms_) {
        const Exponents& e1 = ea[i++];
        for (std::size_t k = 0; k < n; ++k) tmp[k] = e1[k] + eb[k];
        Rational prod = ca * cb;
        r.add_term(tmp, prod);
        if (r.terms_.size() > max_monomials) {
          throw BudgetExceeded("polynomial expansion exceeds " + std::to_string(max_monomials) + " monomials");
        }
      }
    }
    r.prune();
    return r;
  }

  Polynomial pow(unsigned k, std::size_t max_monomials = kDefaultMaxMonomials) const {
    Polynomial r(1);
    for (unsigned i = 0; i < k; ++i) r = multiply(r, *this, max_monomials);
    return r;
  }

  /// Formal partial derivative with respect to `v`.
  Polynomial derivative(std::string_view v) const {
    auto idx = index_of(v);
    if (!idx) return {};
    Polynomial r;
    r.vars_ = vars_;
    for (const auto& [e, c] : terms_) {
      if (e[*idx] == 0) continue;
      Exponents f = e;
      f[*idx] -= 1;
      r.add_term(std::move(f), c * e[*idx]);
    }
    r.prune();
    return r;
  }

  /// Exact value; every variable must be assigned.
  Rational eval(const Assignment& a) const {
    std::vector<const Rational*> vals;
    vals.reserve(vars_.size());
    for (const auto& v : vars_) {
      auto it = a.find(v);
      if (it == a.end()) throw DomainError("variable '" + v + "' is not assigned");
      vals.push_back(&it->second);
    }
    Rational sum = 0;
    Rational term;
    for (const auto& [e, c] : terms_) {
      term = c;
      for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::uint32_t k = 0; k < e[i]; ++k) term *= *vals[i];
      }
      sum += term;
    }
    return sum;
  }

  /// Substitutes the assigned variables and keeps the others symbolic.
  Polynomial eval_partial(const Assignment& a) const {
    Polynomial r;
    for (const auto& [e, c] : terms_) {
      Polynomial term(c);
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        auto it = a.find(vars_[i]);
        if (it != a.end()) {
          Rational f = 1;
          for (std::uint32_t k = 0; k < e[i]; ++k) f *= it->second;
          term = term.scaled(f);
        } else {
          term = term * variable(vars_[i]).pow(e[i]);
        }
      }
      r += term;
    }
    return r;
  }

  /// Replaces `v` by the polynomial `value`.
  Polynomial substitute(std::string_view v, const Polynomial& value) const {
    auto idx = index_of(v);
    if (!idx) return *this;
    auto coeffs = coefficients(v);
    Polynomial r;
    for (std::size_t k = coeffs.size(); k-- > 0;) r = r * value + coeffs[k];
    return r;
  }

  /// Coefficients with respect to `v`, dense and ascending in the power of
  /// `v`; each coefficient is a polynomial in the remaining variables.
  /// The zero polynomial yields an empty vector.
  std::vector<Polynomial> coefficients(std::string_view v) const {
    if (terms_.empty()) return {};
    auto idx = index_of(v);
    if (!idx) return {*this};
    std::vector<std::vector<std::pair<Exponents, Rational>>> buckets(static_cast<std::size_t>(degree(v)) + 1);
    for (const auto& [e, c] : terms_) {
      Exponents f = e;
      std::uint32_t k = f[*idx];
      f[*idx] = 0;
      buckets[k].emplace_back(std::move(f), c);
    }
    std::vector<Polynomial> out;
    out.reserve(buckets.size());
    for (auto& b : buckets) out.push_back(from_terms(vars_, b));
    return out;
  }

  static Polynomial from_coefficients(const std::string& v, const std::vector<Polynomial>& coeffs) {
    Polynomial r;
    Polynomial x = variable(v);
    for (std::size_t k = coeffs.size(); k-- > 0;) r = r * x + coeffs[k];
    return r;
  }

  /// Positive rational c with this = c * primitive, where `primitive` has
  /// coprime integer coefficients. The zero polynomial returns {1, 0}.
  std::pair<Rational, Polynomial> content_and_primitive() const {
    if (terms_.empty()) return {Rational(1), Polynomial()};
    Integer g = 0;
    Integer l = 1;
    for (const auto& [e, c] : terms_) {
      mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
      mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    }
    Rational content(g, l);
    content.canonicalize();
    Polynomial prim = *this;
    for (auto& [e, c] : prim.terms_) c /= content;
    return {content, prim};
  }

  /// Representative for sign tests: `this = scale * canon` with canon
  /// primitive and positive leading coefficient. Zero returns {0, 0}.
  std::pair<Rational, Polynomial> sign_canonical() const {
    if (terms_.empty()) return {Rational(0), Polynomial()};
    auto [content, prim] = content_and_primitive();
    if (prim.leading_coefficient() < 0) return {Rational(-content), -prim};
    return {content, prim};
  }

  /// Canonical text, lex-descending, e.g. `3*X^2*Y - 1/2`.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      bool neg = c < 0;
      Rational mag = abs(c);
      if (first) {
        if (neg) out += "-";
      } else {
        out += neg ? " - " : " + ";
      }
      first = false;
      bool has_monomial = std::any_of(e.begin(), e.end(), [](std::uint32_t x) { return x > 0; });
      bool wrote = false;
      if (!has_monomial || mag != 1) {
        out += mag.get_str();
        wrote = true;
      }
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (wrote) out += "*";
        out += vars_[i];
        if (e[i] > 1) out += "^" + std::to_string(e[i]);
        wrote = true;
      }
    }
    return out;
  }

private:
  std::optional<std::size_t> index_of(std::string_view v) const {
    auto it = std::lower_bound(vars_.begin(), vars_.end(), v, [](const std::string& a, std::string_view b) { return a < b; });
    if (it == vars_.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - vars_.begin());
  }

  void add_term(Exponents e, Rational c) {
    c.canonicalize();
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  /// Drops variables that no longer occur.
  void prune() {
    std::vector<bool> used(vars_.size(), false);
    for (const auto& [e, c] : terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] > 0) used[i] = true;
      }
    }
    if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) return;
    std::vector<std::string> vars;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (used[i]) vars.push_back(vars_[i]);
    }
    TermMap terms;
    for (auto& [e, c] : terms_) {
      Exponents f;
      f.reserve(vars.size());
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (used[i]) f.push_back(e[i]);
      }
      terms.emplace(std::move(f), c);
    }
    vars_ = std::move(vars);
    terms_ = std::move(terms);
  }

  /// Sorted union of two sorted lists, plus the slot of each input variable.
  static std::pair<std::vector<std::size_t>, std::vector<std::size_t>> merge_vars(const std::vector<std::string>& a,
                                                                                  const std::vector<std::string>& b,
                                                                                  std::vector<std::string>& out) {
    out.clear();
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    std::vector<std::size_t> ma(a.size());
    std::vector<std::size_t> mb(b.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      while (out[j] != a[i]) ++j;
      ma[i] = j;
    }
    j = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      while (out[j] != b[i]) ++j;
      mb[i] = j;
    }
    return {ma, mb};
  }

  static Exponents remap(const Exponents& e, const std::vector<std::size_t>& slots, std::size_t n) {
    Exponents f(n, 0);
    for (std::size_t i = 0; i < e.size(); ++i) f[slots[i]] = e[i];
    return f;
  }

  static Polynomial combine(const Polynomial& a, const Polynomial& b, bool subtract) {
    if (b.is_zero()) return a;
    if (a.is_zero()) return subtract ? -b : b;
    Polynomial r;
    if (a.vars_ == b.vars_) {
      r = a;
      for (const auto& [e, c] : b.terms_) r.add_term(e, subtract ? Rational(-c) : c);
    } else {
      std::vector<std::string> vars;
      auto [ma, mb] = merge_vars(a.vars_, b.vars_, vars);
      r.vars_ = std::move(vars);
      const std::size_t n = r.vars_.size();
      for (const auto& [e, c] : a.terms_) r.add_term(remap(e, ma, n), c);
      for (const auto& [e, c] : b.terms_) r.add_term(remap(e, mb, n), subtract ? Rational(-c) : c);
    }
    r.prune();
    return r;
  }

  std::vector<std::string> vars_;
  TermMap terms_;
};

/// Pseudoremainder of `a` by `b` with respect to `v`: the unique r with
/// deg_v r < deg_v b and lc(b)^(d-e+1) * a = q * b + r for some q.
/// No division is performed, so coefficients stay polynomial.
inline Polynomial pseudoremainder(const Polynomial& a, const Polynomial& b, std::string_view v) {
  if (b.is_zero()) throw DomainError("pseudoremainder by the zero polynomial");
  const int d = a.degree(v);
  const int e = b.degree(v);
  if (d < e) throw DomainError("pseudoremainder requires deg(a) >= deg(b)");
  auto bc = b.coefficients(v);
  const Polynomial& lc = bc.back();
  const Polynomial x = Polynomial::variable(std::string(v));
  Polynomial r = a;
  int steps = d - e + 1;
  while (!r.is_zero() && r.degree(v) >= e) {
    int dr = r.degree(v);
    Polynomial lead = r.coefficients(v).back();
    r = lc * r - lead * x.pow(static_cast<unsigned>(dr - e)) * b;
    --steps;
  }
  for (int i = 0; i < steps; ++i) r = r * lc;
  return r;
}

enum class Infinity { negative, positive };

/// Sign of a univariate polynomial for all sufficiently large |x| on the
/// given side, read off the leading coefficient and the degree.
inline int sign_at_infinity(const Polynomial& p, Infinity dir) {
  if (p.is_zero()) return 0;
  if (p.vars().size() > 1) throw DomainError("sign_at_infinity expects a univariate polynomial");
  if (p.is_constant()) return sign(p.constant_term());
  const std::string& v = p.vars().front();
  int lead = sign(p.coefficients(v).back().constant_term());
  int deg = p.degree(v);
  return (dir == Infinity::negative && deg % 2 == 1) ? -lead : lead;
}

namespace detail {

class PolynomialTextParser {
public:
  explicit PolynomialTextParser(std::string_view text) : s_(text) {}

  Polynomial parse() {
    Polynomial p = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return p;
  }

private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, 1, pos_ + 1); }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Polynomial expr() {
    Polynomial acc;
    bool neg = eat('-');
    if (!neg) eat('+');
    Polynomial t = term();
    acc = neg ? -t : t;
    for (;;) {
      if (eat('+')) {
        acc += term();
      } else if (eat('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  Polynomial term() {
    Polynomial acc = factor();
    while (eat('*')) acc = acc * factor();
    return acc;
  }

  Polynomial factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of polynomial");
    Polynomial base;
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      base = expr();
      if (!eat(')')) fail("expected ')'");
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (pos_ < s_.size() && s_[pos_] == '/') {
        ++pos_;
        std::size_t ds = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (ds == pos_) fail("expected denominator");
      }
      base = Polynomial(parse_rational(s_.substr(start, pos_ - start)));
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '#' || s_[pos_] == '\'')) ++pos_;
      base = Polynomial::variable(std::string(s_.substr(start, pos_ - start)));
    } else {
      fail("unexpected '" + std::string(1, c) + "'");
    }
    if (eat('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("expected exponent");
      base = base.pow(static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start)))));
    }
    return base;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the canonical display form (and any sum/product/power expression
/// with rational literals) back into a polynomial.
inline Polynomial parse_polynomial(std::string_view text) { return detail::PolynomialTextParser(text).parse(); }

/// Quotient of two polynomials; the denominator is never the zero polynomial.
struct RationalFunction {
  Polynomial numerator;
  Polynomial denominator{1};

  RationalFunction() = default;
  RationalFunction(Polynomial num, Polynomial den = Polynomial(1)) : numerator(std::move(num)), denominator(std::move(den)) {  // NOLINT
    if (denominator.is_zero()) throw DomainError("rational function with zero denominator");
  }

  Rational eval(const Assignment& a) const {
    Rational d = denominator.eval(a);
    if (d == 0) throw DomainError("rational function denominator vanishes");
    return numerator.eval(a) / d;
  }

  std::string to_string() const {
    if (denominator == Polynomial(1)) return numerator.to_string();
    return "(" + numerator.to_string() + ")/(" + denominator.to_string() + ")";
  }

  friend bool operator==(const RationalFunction&, const RationalFunction&) = default;
};

}  // namespace realqe
