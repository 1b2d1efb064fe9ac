#include <gtest/gtest.h>

#include <random>

#include "realqe/realqe.hpp"
#include "support/oracles.hpp"

using namespace realqe;

namespace {

Polynomial P(const char* s) { return parse_polynomial(s); }

const std::vector<Polynomial>& worked_inputs() {
  static const std::vector<Polynomial> ps{P("4 - X^2"), P("X^3 - 2*X^2 - X + 2"), P("-X^3 + 5*X^2 - 6*X")};
  return ps;
}

SignTable restricted(const std::vector<Polynomial>& ps) {
  auto r = build_sign_table(ps);
  return restrict_table(r.table, r.input_rows);
}

std::vector<std::vector<int>> columns_of(const SignTable& t) {
  std::vector<std::vector<int>> out;
  for (const auto& c : t.columns) out.push_back(c.signs);
  return out;
}

}  // namespace

TEST(Closure, SquareOfX) {
  ClosureList c = closure({P("X^2")});
  ASSERT_EQ(c.polys.size(), 3u);
  EXPECT_EQ(c.polys[0], P("2"));
  EXPECT_EQ(c.polys[1], P("2*X"));
  EXPECT_EQ(c.polys[2], P("X^2"));
  EXPECT_EQ(c.derivative[2], 1);
  EXPECT_EQ(c.derivative[1], 0);
  EXPECT_EQ(c.remainder.at({2, 1}), -1);
}

TEST(Closure, Constant) {
  ClosureList c = closure({P("7")});
  ASSERT_EQ(c.polys.size(), 1u);
  EXPECT_EQ(c.polys[0], P("7"));
}

TEST(Closure, WorkedExampleSizeIsPinned) {
  ClosureList c = closure(worked_inputs());
  EXPECT_EQ(c.polys.size(), 243u);
  for (std::size_t i = 1; i < c.polys.size(); ++i) {
    EXPECT_LE(c.polys[i - 1].total_degree(), c.polys[i].total_degree());
    EXPECT_FALSE(c.polys[i].is_zero());
    EXPECT_NE(c.polys[i - 1], c.polys[i]);
  }
}

TEST(Closure, ClosedUnderDerivativeAndRemainder) {
  ClosureList c = closure({P("X^3 - X"), P("X^2 - 2")});
  auto has = [&](const Polynomial& q) { return std::find(c.polys.begin(), c.polys.end(), q) != c.polys.end(); };
  for (std::size_t i = 0; i < c.polys.size(); ++i) {
    const Polynomial& a = c.polys[i];
    if (a.total_degree() >= 1) {
      EXPECT_TRUE(has(a.derivative("X")));
    }
    for (const auto& b : c.polys) {
      if (b.total_degree() < 1 || a.total_degree() < b.total_degree()) continue;
      Polynomial r = pseudoremainder(a, b, "X");
      if (!r.is_zero()) {
        EXPECT_TRUE(has(r)) << a.to_string() << " mod " << b.to_string();
      }
    }
  }
}

TEST(SignTable, WorkedExample) {
  SignTable t = restricted(worked_inputs());
  EXPECT_EQ(t.boundary_count(), 6u);
  ASSERT_EQ(t.columns.size(), 13u);
  EXPECT_EQ(t.columns[0].signs, (std::vector<int>{-1, -1, 1}));
  EXPECT_TRUE(t.check().empty());
  // Sample points -3, -2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2, 2.5, 3, 4.
  const Rational samples[] = {-3, -2, Rational(-3, 2), -1, Rational(-1, 2), 0, Rational(1, 2), 1, Rational(3, 2), 2, Rational(5, 2), 3, 4};
  for (std::size_t c = 0; c < 13; ++c) {
    for (std::size_t r = 0; r < 3; ++r) {
      EXPECT_EQ(t.columns[c].signs[r], sign(worked_inputs()[r].eval({{"X", samples[c]}}))) << "column " << c << " row " << r;
    }
  }
}

TEST(SignTable, SingleLinear) {
  SignTable t = restricted({P("X")});
  EXPECT_EQ(t.boundary_count(), 1u);
  EXPECT_EQ(columns_of(t), (std::vector<std::vector<int>>{{-1}, {0}, {1}}));
}

TEST(SignTable, NoRealRoots) {
  auto r = build_sign_table({P("X^2 + 1")});
  EXPECT_EQ(r.table.boundary_count(), 1u);  // the root of 2X
  SignTable t = restrict_table(r.table, r.input_rows);
  EXPECT_EQ(columns_of(t), (std::vector<std::vector<int>>{{1}}));
}

TEST(SignTable, TouchPointAddsNoBoundary) {
  auto r = build_sign_table({P("X - 1"), P("X^2 - 2*X + 1")});
  SignTable t = restrict_table(r.table, r.input_rows);
  EXPECT_EQ(columns_of(t), (std::vector<std::vector<int>>{{-1, 1}, {0, 0}, {1, 1}}));
}

TEST(SignTable, PositiveEverywhereRow) {
  SignTable t = restricted({P("X"), P("X^2 + 3")});
  for (const auto& c : t.columns) EXPECT_EQ(c.signs[1], 1);
}

TEST(SignTable, FullTableInvariants) {
  auto r = build_sign_table(worked_inputs());
  EXPECT_TRUE(r.table.check().empty());
  EXPECT_EQ(r.table.columns.size() % 2, 1u);
}

TEST(SignTable, MachineFormatRoundTrip) {
  SignTable t = restricted(worked_inputs());
  EXPECT_EQ(parse_table_machine(format_table_machine(t)), t);
  SignTable empty;
  empty.columns.push_back({ColumnKind::interval, {}});
  EXPECT_EQ(parse_table_machine(format_table_machine(empty)), empty);
  EXPECT_THROW(parse_table_machine("P X\nI 1,1\n"), SyntaxError);
  EXPECT_THROW(parse_table_machine("Q X\n"), SyntaxError);
}

// Boundary count and every column's signs agree with a Sturm-sequence
// root-isolation oracle.
TEST(SignTableProperty, AgreesWithOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> count(1, 3);
  for (int i = 0; i < 150; ++i) {
    std::vector<Polynomial> ps;
    int n = count(rng);
    for (int k = 0; k < n; ++k) ps.push_back(oracle::random_univariate(rng, "X", 4));
    SignTable t = restricted(ps);
    oracle::Cells c = oracle::cells(ps);
    EXPECT_EQ(t.boundary_count(), c.root_count);
    EXPECT_EQ(columns_of(t), c.columns);
    EXPECT_TRUE(t.check().empty());
  }
}

TEST(SignTableProperty, ZeroCountMatchesDistinctRoots) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 150; ++i) {
    Polynomial p = oracle::random_univariate(rng, "X", 4);
    SignTable t = restricted({p});
    std::size_t zeros = 0;
    for (const auto& c : t.columns) zeros += c.signs[0] == 0;
    oracle::Dense sf = oracle::squarefree(oracle::from_polynomial(p));
    std::size_t roots = oracle::deg(sf) >= 1 ? oracle::isolate(sf).size() : 0;
    EXPECT_EQ(zeros, roots) << p.to_string();
    EXPECT_LE(static_cast<int>(zeros), std::max(0, p.total_degree()));
  }
}

TEST(DecideUnivariate, Examples) {
  EXPECT_TRUE(decide_exists_univariate(parse("(E X)(X*X = 2)")));
  EXPECT_FALSE(decide_exists_univariate(parse("(E X)(X*X + 1 = 0)")));
  EXPECT_TRUE(decide_exists_univariate(parse("(E X)(X > 0 /\\ X*X*X - 2*X*X - X + 2 < 0 /\\ 4 - X*X > 0)")));
}

TEST(CountComponents, Examples) {
  EXPECT_EQ(count_components(parse("X*X > 1")), 2u);
  EXPECT_EQ(count_components(parse("X*X >= 0")), 1u);
  // (-1, 1) for p2 > 0; the two intervals (-2, -1) and (1, 2) belong to p2 < 0.
  EXPECT_EQ(count_components(parse("4 - X*X > 0 /\\ X*X*X - 2*X*X - X + 2 > 0")), 1u);
  EXPECT_EQ(count_components(parse("4 - X*X > 0 /\\ X*X*X - 2*X*X - X + 2 < 0")), 2u);
  EXPECT_EQ(count_components(parse("X*X < 0")), 0u);
  EXPECT_EQ(count_components(parse("X*X*X - X = 0")), 3u);
}

TEST(CountComponents, BoundHoldsOnRandomFormulas) {
  std::mt19937_64 rng(29);
  for (int i = 0; i < 100; ++i) {
    std::vector<Formula> atoms;
    int degsum = 0;
    for (int k = 0; k < 3; ++k) {
      Polynomial p = oracle::random_univariate(rng, "X", 3);
      degsum += std::max(0, p.total_degree());
      atoms.push_back(atom_from_polynomial(p, static_cast<Rel>(rng() % 6)));
    }
    Formula f = (rng() % 2) ? Formula::conj({atoms[0], Formula::disj({atoms[1], atoms[2]})}) : Formula::disj({atoms[0], Formula::neg(atoms[1]), atoms[2]});
    std::size_t n = count_components(f);
    EXPECT_LE(n, static_cast<std::size_t>(1 + degsum));
    EXPECT_EQ(n, oracle::components(f)) << print(f);
  }
}
