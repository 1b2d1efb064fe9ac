#pragma once

#include <gmpxx.h>

#include <cctype>
#include <string>
#include <string_view>

#include "realqe/error.hpp"

namespace realqe {

/// Exact rational number. GMP keeps gcd(|num|, den) = 1 and den > 0 after
/// every arithmetic operation; values built from text are canonicalized here.
using Rational = mpq_class;
using Integer = mpz_class;

inline int sign(const Rational& q) { return sgn(q); }
inline int sign(const Integer& z) { return sgn(z); }

inline std::string to_string(const Rational& q) { return q.get_str(); }
inline std::string to_string(const Integer& z) { return z.get_str(); }

/// Parses `p`, `-p`, or `p/q` with decimal integers.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  std::size_t end = s.size();
  while (end > start && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  s = s.substr(start, end - start);
  if (s.empty()) throw DomainError("empty rational literal");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  bool seen_slash = false;
  bool digit_before = false;
  bool digit_after = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '/' && !seen_slash) {
      seen_slash = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      (seen_slash ? digit_after : digit_before) = true;
    } else {
      throw DomainError("invalid rational literal '" + s + "'");
    }
  }
  if (!digit_before || (seen_slash && !digit_after)) throw DomainError("invalid rational literal '" + s + "'");
  if (s[0] == '+') s.erase(0, 1);
  Rational q;
  if (q.set_str(s, 10) != 0) throw DomainError("invalid rational literal '" + s + "'");
  if (q.get_den() == 0) throw DomainError("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

}  // namespace realqe
