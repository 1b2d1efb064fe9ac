#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "realqe/error.hpp"
#include "realqe/rational.hpp"

namespace realqe {

struct Point {
  Rational x;
  Rational y;
  bool operator==(const Point&) const = default;
};

/// The line y = a*x - b.
struct DualLine {
  Rational a;
  Rational b;
  bool operator==(const DualLine&) const = default;
};

/// Sign of det[q - p; r - p]: +1 for a counterclockwise turn.
inline int triple_sign(const Point& p, const Point& q, const Point& r) {
  Rational det = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  return sign(det);
}

/// Signs of all index triples i < j < k (1-based).
class CombinatorialOrderType {
public:
  CombinatorialOrderType() = default;
  explicit CombinatorialOrderType(std::size_t n) : n_(n), signs_(n * n * n, 0) {}

  std::size_t size() const { return n_; }

  void set(std::size_t i, std::size_t j, std::size_t k, int s) { signs_[index(i, j, k)] = s; }

  /// Sign for any ordering of three distinct indices (antisymmetric).
  int sign(std::size_t i, std::size_t j, std::size_t k) const {
    if (i == j || j == k || i == k) throw DomainError("order type indices must be distinct");
    std::array<std::size_t, 3> v{i, j, k};
    int parity = 1;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b + 1 < 3 - a; ++b) {
        if (v[static_cast<std::size_t>(b)] > v[static_cast<std::size_t>(b + 1)]) {
          std::swap(v[static_cast<std::size_t>(b)], v[static_cast<std::size_t>(b + 1)]);
          parity = -parity;
        }
      }
    }
    return parity * signs_[index(v[0], v[1], v[2])];
  }

  bool simple() const {
    for (std::size_t i = 1; i <= n_; ++i) {
      for (std::size_t j = i + 1; j <= n_; ++j) {
        for (std::size_t k = j + 1; k <= n_; ++k) {
          if (signs_[index(i, j, k)] == 0) return false;
        }
      }
    }
    return true;
  }

  bool operator==(const CombinatorialOrderType&) const = default;

  /// First line n, then `i j k s` for every i < j < k.
  std::string to_string() const {
    std::ostringstream os;
    os << n_ << '\n';
    for (std::size_t i = 1; i <= n_; ++i) {
      for (std::size_t j = i + 1; j <= n_; ++j) {
        for (std::size_t k = j + 1; k <= n_; ++k) os << i << ' ' << j << ' ' << k << ' ' << signs_[index(i, j, k)] << '\n';
      }
    }
    return os.str();
  }

  static CombinatorialOrderType parse(const std::string& text) {
    std::istringstream in(text);
    std::size_t n = 0;
    if (!(in >> n)) throw SyntaxError("expected the point count", 1, 1);
    CombinatorialOrderType t(n);
    std::vector<bool> seen(n * n * n, false);
    long long i = 0;
    long long j = 0;
    long long k = 0;
    int s = 0;
    std::size_t line = 1;
    while (in >> i >> j >> k >> s) {
      ++line;
      if (i < 1 || j < 1 || k < 1 || static_cast<std::size_t>(std::max({i, j, k})) > n || !(i < j && j < k)) {
        throw SyntaxError("triple must satisfy 1 <= i < j < k <= n", line, 1);
      }
      if (s < -1 || s > 1) throw SyntaxError("sign must be -1, 0 or 1", line, 1);
      auto idx = t.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
      seen[idx] = true;
      t.signs_[idx] = s;
    }
    if (!in.eof()) throw SyntaxError("malformed order type line", line + 1, 1);
    for (std::size_t a = 1; a <= n; ++a) {
      for (std::size_t b = a + 1; b <= n; ++b) {
        for (std::size_t c = b + 1; c <= n; ++c) {
          if (!seen[t.index(a, b, c)]) throw SyntaxError("missing triple " + std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(c), line, 1);
        }
      }
    }
    return t;
  }

private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    if (i < 1 || j < 1 || k < 1 || i > n_ || j > n_ || k > n_) throw DomainError("order type index out of range");
    return ((i - 1) * n_ + (j - 1)) * n_ + (k - 1);
  }

  std::size_t n_ = 0;
  std::vector<int> signs_;
};

inline CombinatorialOrderType order_type(const std::vector<Point>& pts) {
  if (pts.size() < 3) throw DomainError("an order type needs at least three points");
  CombinatorialOrderType t(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      for (std::size_t k = j + 1; k < pts.size(); ++k) t.set(i + 1, j + 1, k + 1, triple_sign(pts[i], pts[j], pts[k]));
    }
  }
  return t;
}

/// (a, b) -> the line y = a*x - b.
inline DualLine dualize(const Point& p) { return {p.x, p.y}; }
inline Point dualize_line(const DualLine& l) { return {l.a, l.b}; }

/// For each line, its crossings from left to right; crossings at the same
/// point form one group. Indices are 1-based.
struct ArrangementDescription {
  std::size_t n = 0;
  std::vector<std::vector<std::vector<std::size_t>>> lists;  // lists[i-1] = groups along line i

  bool operator==(const ArrangementDescription&) const = default;

  /// One line per line index, e.g. `1: {3} {2}`.
  std::string to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      os << i + 1 << ':';
      for (const auto& g : lists[i]) {
        os << " {";
        for (std::size_t k = 0; k < g.size(); ++k) os << (k == 0 ? "" : " ") << g[k];
        os << '}';
      }
      os << '\n';
    }
    return os.str();
  }

  static ArrangementDescription parse(const std::string& text) {
    ArrangementDescription d;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      std::size_t idx = 0;
      char colon = 0;
      if (!(ls >> idx >> colon) || colon != ':') throw SyntaxError("expected '<index>:'", lineno, 1);
      if (idx != d.lists.size() + 1) throw SyntaxError("line indices must be consecutive from 1", lineno, 1);
      std::vector<std::vector<std::size_t>> groups;
      char c = 0;
      while (ls >> c) {
        if (c != '{') throw SyntaxError("expected '{'", lineno, 1);
        std::vector<std::size_t> g;
        for (;;) {
          ls >> std::ws;
          if (ls.peek() == '}') {
            ls.get();
            break;
          }
          std::size_t v = 0;
          if (!(ls >> v)) throw SyntaxError("expected an index or '}'", lineno, 1);
          g.push_back(v);
        }
        if (g.empty()) throw SyntaxError("empty group", lineno, 1);
        groups.push_back(std::move(g));
      }
      d.lists.push_back(std::move(groups));
    }
    d.n = d.lists.size();
    return d;
  }
};

/// Lines numbered by decreasing slope; lists read left to right.
inline ArrangementDescription arrangement_description(const std::vector<DualLine>& input) {
  std::vector<DualLine> lines = input;
  std::sort(lines.begin(), lines.end(), [](const DualLine& p, const DualLine& q) { return p.a > q.a; });
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].a == lines[i - 1].a) throw DomainError("two lines have the same slope");
  }
  ArrangementDescription d;
  d.n = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::vector<std::pair<Rational, std::size_t>> xs;
    for (std::size_t j = 0; j < lines.size(); ++j) {
      if (j == i) continue;
      xs.emplace_back((lines[i].b - lines[j].b) / (lines[i].a - lines[j].a), j + 1);
    }
    std::sort(xs.begin(), xs.end());
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (k == 0 || xs[k].first != xs[k - 1].first) groups.emplace_back();
      groups.back().push_back(xs[k].second);
    }
    d.lists.push_back(std::move(groups));
  }
  return d;
}

/// Violated conditions of a description (empty when none):
///  - coverage: list i contains every index other than i exactly once;
///  - triples: for i < j < k (slope order) the three pairwise crossing
///    orders must agree. On line i compare j with k, on line j compare i
///    with k, on line k compare i with j: all "first before second", all
///    "second before first", or all three crossings in one column.
inline std::vector<std::string> check_description_consistency(const ArrangementDescription& d) {
  std::vector<std::string> report;
  const std::size_t n = d.lists.size();
  std::vector<std::vector<long>> column(n, std::vector<long>(n + 1, -1));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> count(n + 1, 0);
    for (std::size_t g = 0; g < d.lists[i].size(); ++g) {
      for (std::size_t v : d.lists[i][g]) {
        if (v < 1 || v > n || v == i + 1) {
          report.push_back("line " + std::to_string(i + 1) + " lists invalid index " + std::to_string(v));
          continue;
        }
        ++count[v];
        column[i][v] = static_cast<long>(g);
      }
    }
    for (std::size_t v = 1; v <= n; ++v) {
      if (v == i + 1) continue;
      if (count[v] == 0) report.push_back("line " + std::to_string(i + 1) + " misses index " + std::to_string(v));
      if (count[v] > 1) report.push_back("line " + std::to_string(i + 1) + " lists index " + std::to_string(v) + " twice");
    }
  }
  if (!report.empty()) return report;
  auto cmp = [&](std::size_t on, std::size_t a, std::size_t b) {
    long x = column[on - 1][a];
    long y = column[on - 1][b];
    return x < y ? -1 : (x > y ? 1 : 0);
  };
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i + 1; j <= n; ++j) {
      for (std::size_t k = j + 1; k <= n; ++k) {
        int a = cmp(i, j, k);
        int b = cmp(j, i, k);
        int c = cmp(k, i, j);
        if (!(a == b && b == c)) {
          report.push_back("lines " + std::to_string(i) + ", " + std::to_string(j) + ", " + std::to_string(k) + " have incoherent crossing orders");
        }
      }
    }
  }
  return report;
}

/// Description of the dual arrangement of p_1..p_{n-1}, computed from the
/// order type alone, for configurations where p_n lies below every line
/// spanned by the others (so t(i, j, n) = sign(x_i - x_j)).
inline ArrangementDescription order_type_to_arrangement(const CombinatorialOrderType& t) {
  if (!t.simple()) throw DomainError("order_type_to_arrangement needs a simple order type");
  const std::size_t n = t.size();
  if (n < 3) throw DomainError("order type must have at least three points");
  const std::size_t last = n;
  auto xsign = [&](std::size_t i, std::size_t j) { return t.sign(i, j, last); };  // sign(x_i - x_j)
  // Dual line slopes are the x-coordinates; number lines by decreasing x.
  std::vector<std::size_t> byslope(n - 1);
  std::iota(byslope.begin(), byslope.end(), 1);
  std::sort(byslope.begin(), byslope.end(), [&](std::size_t i, std::size_t j) { return xsign(i, j) > 0; });
  std::vector<std::size_t> label(n, 0);
  for (std::size_t r = 0; r < byslope.size(); ++r) label[byslope[r]] = r + 1;

  ArrangementDescription d;
  d.n = n - 1;
  for (std::size_t r = 0; r < byslope.size(); ++r) {
    const std::size_t i = byslope[r];
    // On dual line i, the crossing with line j sits at x = slope(p_i p_j).
    std::vector<std::size_t> others;
    for (std::size_t j = 1; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    std::sort(others.begin(), others.end(), [&](std::size_t j, std::size_t k) { return t.sign(i, j, k) * xsign(j, i) * xsign(k, i) > 0; });
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t j : others) groups.push_back({label[j]});
    d.lists.push_back(std::move(groups));
  }
  return d;
}

/// (a, b; c, d) = |a,c| |b,d| / (|a,d| |b,c|) with signed distances along
/// the common line (x displacements, or y for a vertical line).
inline Rational cross_ratio(const Point& a, const Point& b, const Point& c, const Point& d) {
  const std::array<const Point*, 4> ps{&a, &b, &c, &d};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) {
      if (*ps[i] == *ps[j]) throw DomainError("cross ratio needs four distinct points");
    }
  }
  if (triple_sign(a, b, c) != 0 || triple_sign(a, b, d) != 0) throw DomainError("cross ratio needs collinear points");
  const bool vertical = a.x == b.x;
  auto dist = [&](const Point& p, const Point& q) { return vertical ? q.y - p.y : q.x - p.x; };
  Rational den = dist(a, d) * dist(b, c);
  if (den == 0) throw DomainError("cross ratio denominator vanishes");
  return dist(a, c) * dist(b, d) / den;
}

/// Lines of `x y` with rational coordinates.
inline std::vector<Point> parse_points(const std::string& text) {
  std::vector<Point> pts;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string xs;
    std::string ys;
    if (!(ls >> xs)) continue;
    if (!(ls >> ys)) throw SyntaxError("expected two coordinates", lineno, 1);
    std::string extra;
    if (ls >> extra) throw SyntaxError("unexpected text after the coordinates", lineno, 1);
    try {
      pts.push_back({parse_rational(xs), parse_rational(ys)});
    } catch (const Error& e) {
      throw SyntaxError(e.what(), lineno, 1);
    }
  }
  return pts;
}

inline std::string format_points(const std::vector<Point>& pts) {
  std::ostringstream os;
  for (const auto& p : pts) os << to_string(p.x) << ' ' << to_string(p.y) << '\n';
  return os.str();
}

}  // namespace realqe
