#pragma once

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/formula.hpp"

namespace realqe {

namespace detail {

/// Recursive-descent parser for the formula grammar:
///
///   formula  := quant* iff
///   quant    := '(' ('E'|'A') ident+ ')'
///   iff      := or ('<=>' or)*
///   or       := and ('\/' and)*
///   and      := unary ('/\' unary)*
///   unary    := '~' unary | quant+ iff | '(' formula ')' | atom
///   atom     := term rel term
///   term     := prod (('+'|'-') prod)*
///   prod     := factor ('*' factor)*
///   factor   := ident | integer | '(' term ')'
///
/// A parenthesis is tried as the start of an arithmetic term first; failed
/// attempts are memoized by position so nesting stays linear.
class FormulaParser {
public:
  explicit FormulaParser(std::string_view text) : s_(text) {}

  Formula parse() {
    Formula f = formula();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return f;
  }

private:
  struct Backtrack {};

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SyntaxError(what, line, col);
  }

  bool peek(std::string_view tok) {
    skip();
    return s_.substr(pos_, tok.size()) == tok;
  }

  bool eat(std::string_view tok) {
    if (!peek(tok)) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    if (!eat(tok)) fail("expected '" + std::string(tok) + "'");
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#' || c == '\'';
  }

  std::string ident_at(std::size_t& p) const {
    while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
    if (p >= s_.size() || !ident_start(s_[p])) return {};
    std::size_t start = p;
    while (p < s_.size() && ident_char(s_[p])) ++p;
    return std::string(s_.substr(start, p - start));
  }

  /// True when a quantifier group `(E x ...)` / `(A x ...)` starts here.
  bool at_quantifier() {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != '(') return false;
    std::size_t p = pos_ + 1;
    std::string q = ident_at(p);
    if (q != "E" && q != "A") return false;
    return !ident_at(p).empty();
  }

  Formula quantified() {
    expect("(");
    std::size_t p = pos_;
    std::string q = ident_at(p);
    pos_ = p;
    std::vector<std::string> vars;
    for (;;) {
      p = pos_;
      std::string v = ident_at(p);
      if (v.empty()) break;
      pos_ = p;
      vars.push_back(v);
    }
    expect(")");
    Formula body = at_quantifier() ? quantified() : iff();
    return q == "E" ? Formula::exists(std::move(vars), body) : Formula::forall(std::move(vars), body);
  }

  Formula formula() {
    if (at_quantifier()) return quantified();
    return iff();
  }

  Formula iff() {
    Formula f = disj();
    while (eat("<=>")) f = Formula::iff(f, disj());
    return f;
  }

  Formula disj() {
    std::vector<Formula> kids{conj()};
    while (eat("\\/")) kids.push_back(conj());
    return kids.size() == 1 ? kids.front() : Formula::disj(std::move(kids));
  }

  Formula conj() {
    std::vector<Formula> kids{unary()};
    while (eat("/\\")) kids.push_back(unary());
    return kids.size() == 1 ? kids.front() : Formula::conj(std::move(kids));
  }

  Formula unary() {
    if (eat("~")) return Formula::neg(unary());
    if (at_quantifier()) return quantified();
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(' && failed_terms_.count(pos_) == 0) {
      std::size_t save = pos_;
      ++attempting_;
      try {
        Formula a = atom();
        --attempting_;
        return a;
      } catch (const Backtrack&) {
        --attempting_;
        failed_terms_.insert(save);
        pos_ = save;
      } catch (const SyntaxError&) {
        --attempting_;
        failed_terms_.insert(save);
        pos_ = save;
      }
    }
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      Formula f = formula();
      expect(")");
      return f;
    }
    return atom();
  }

  Formula atom() {
    Formula lhs = term();
    Rel r;
    if (eat("<=>")) fail("unexpected '<=>' in atom");
    if (eat("<=")) {
      r = Rel::le;
    } else if (eat(">=")) {
      r = Rel::ge;
    } else if (eat("!=")) {
      r = Rel::ne;
    } else if (eat("<")) {
      r = Rel::lt;
    } else if (eat(">")) {
      r = Rel::gt;
    } else if (eat("=")) {
      r = Rel::eq;
    } else {
      fail("expected a relation (<, <=, >, >=, =, !=)");
    }
    return Formula::atom(r, lhs, term());
  }

  Formula term() {
    Formula t = prod();
    for (;;) {
      if (eat("+")) {
        t = Formula::add(t, prod());
      } else if (eat("-")) {
        t = Formula::sub(t, prod());
      } else {
        return t;
      }
    }
  }

  Formula prod() {
    Formula t = factor();
    while (eat("*")) t = Formula::mul(t, factor());
    return t;
  }

  Formula factor() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Formula t = term();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') {
        if (attempting_ > 0) throw Backtrack{};
        fail("expected ')'");
      }
      ++pos_;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return Formula::integer(Integer(std::string(s_.substr(start, pos_ - start))));
    }
    if (ident_start(c)) {
      std::size_t p = pos_;
      std::string name = ident_at(p);
      pos_ = p;
      return Formula::var(name);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::set<std::size_t> failed_terms_;
  int attempting_ = 0;
};

}  // namespace detail

/// Parses one formula. Free variables are allowed.
inline Formula parse(std::string_view text) { return detail::FormulaParser(text).parse(); }

}  // namespace realqe
