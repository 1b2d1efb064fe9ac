#include <gtest/gtest.h>

#include <random>

#include "realqe/realqe.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace realqe;

namespace {

Formula lit(long k) { return k >= 0 ? Formula::integer(k) : Formula::sub(Formula::zero(), Formula::integer(-k)); }

Formula instantiate(const Formula& f, const std::map<std::string, long>& vals) {
  std::map<std::string, Formula> sub;
  for (const auto& [k, v] : vals) sub[k] = lit(v);
  return substitute_terms(f, sub);
}

Assignment as_assignment(const std::map<std::string, long>& vals) {
  Assignment a;
  for (const auto& [k, v] : vals) a[k] = v;
  return a;
}

const char* kQuadratic = "(E X)(A*X*X + B*X + C = 0)";
const char* kDiscriminant = "A != 0 /\\ B*B - 4*A*C >= 0 \\/ A = 0 /\\ B != 0 \\/ A = 0 /\\ B = 0 /\\ C = 0";

}  // namespace

TEST(EliminateExists, QuadraticMatchesDiscriminant) {
  Formula q = eliminate_exists(parse(kQuadratic));
  EXPECT_EQ(free_vars(q), (std::set<std::string>{"A", "B", "C"}));
  auto v = sample_equiv(q, parse(kDiscriminant), {"A", "B", "C"}, 1000, 1);
  EXPECT_FALSE(v.counterexample);
}

// Integer triples suffice: the equation is homogeneous in (A, B, C).
TEST(EliminateExists, QuadraticAgreesWithUnivariateOracle) {
  Formula f = parse(kQuadratic);
  Formula q = eliminate_exists(f);
  for (long a = -2; a <= 2; ++a) {
    for (long b = -3; b <= 3; ++b) {
      for (long c = -2; c <= 2; ++c) {
        std::map<std::string, long> vals{{"A", a}, {"B", b}, {"C", c}};
        bool want = oracle::exists_univariate(instantiate(f.body(), vals));
        EXPECT_EQ(eval_qfree(q, as_assignment(vals)), want) << a << " " << b << " " << c;
      }
    }
  }
}

TEST(EliminateExists, Examples) {
  EXPECT_EQ(eliminate_exists(parse("(E X)(X > Y)")), Formula::truth());
  Formula sq = eliminate_exists(parse("(E X)(X*X = Y)"));
  EXPECT_FALSE(sample_equiv(sq, parse("Y >= 0"), {"Y"}, 500, 2).counterexample);
  EXPECT_EQ(eliminate_exists(parse("(E X)(X*X + 1 = 0)")), Formula::falsity());
}

TEST(EliminateExists, DegenerateLinear) {
  Formula q = eliminate_exists(parse("(E X)(A*X + B = 0)"));
  EXPECT_FALSE(sample_equiv(q, parse("A != 0 \\/ B = 0"), {"A", "B"}, 500, 3).counterexample);
  for (long a = -2; a <= 2; ++a) {
    for (long b = -2; b <= 2; ++b) {
      EXPECT_EQ(eval_qfree(q, as_assignment({{"A", a}, {"B", b}})), a != 0 || b == 0);
    }
  }
}

TEST(EliminateExists, OutputIsDnfWithIntegerCoefficients) {
  Formula q = eliminate_exists(parse(kQuadratic));
  ASSERT_TRUE(is_quantifier_free(q));
  for_each_atom(q, [](const Formula& a) {
    Polynomial p = atom_polynomial(a);
    for (const auto& [e, c] : p.terms()) EXPECT_EQ(c.get_den(), 1);
  });
  auto is_literal_conj = [](const Formula& c) {
    if (c.kind() == Kind::atom) return true;
    if (c.kind() != Kind::conj) return false;
    for (const auto& k : c.children()) {
      if (k.kind() != Kind::atom) return false;
    }
    return true;
  };
  if (q.kind() == Kind::disj) {
    for (const auto& d : q.children()) EXPECT_TRUE(is_literal_conj(d)) << print(d);
  } else {
    EXPECT_TRUE(is_literal_conj(q));
  }
}

TEST(EliminateExists, Errors) {
  EXPECT_THROW(eliminate_exists(parse("X > 0")), DomainError);
  EXPECT_THROW(eliminate_exists(parse("(E X)((E Y)(X > Y))")), DomainError);
  QeOptions tiny;
  tiny.max_nodes = 3;
  EXPECT_THROW(eliminate_exists(parse(kQuadratic), tiny), BudgetExceeded);
}

TEST(EliminateAll, Examples) {
  EXPECT_EQ(eliminate_all(parse("(A Y)(Y*Y >= 0)")), Formula::truth());
  EXPECT_EQ(eliminate_all(parse("(E X)(A Y)((Y-X)*(Y-X) >= 0)")), Formula::truth());
  Formula g = eliminate_all(parse("(A X)(X*X + Y > 0)"));
  EXPECT_FALSE(sample_equiv(g, parse("Y > 0"), {"Y"}, 500, 4).counterexample);
}

TEST(DecideSentence, Examples) {
  EXPECT_TRUE(decide_sentence(parse("(E X)(X*X = 2)")));
  EXPECT_TRUE(decide_sentence(parse("(A X)(E Y)(Y > X)")));
  EXPECT_FALSE(decide_sentence(parse("(E X Y)(X*X + Y*Y < 0)")));
  EXPECT_FALSE(decide_sentence(parse("(E X)(A Y)(Y > X)")));
  EXPECT_TRUE(decide_sentence(parse("(E X Y)(X*X + Y*Y = 1 /\\ X = Y)")));
  EXPECT_THROW(decide_sentence(parse("X > 0")), DomainError);
}

// One-parameter formulas: after elimination, instantiating the parameter at
// integers must agree with the independent univariate oracle.
TEST(EliminateExistsProperty, AgreesWithOracleOnParameterGrid) {
  std::mt19937_64 rng(31);
  gen::FormulaShape shape;
  shape.vars = {"X", "Y"};
  shape.term_depth = 1;
  shape.max_constant = 2;
  shape.allow_iff = false;
  for (int i = 0; i < 60; ++i) {
    Formula m = gen::qfree(rng, shape, 2);
    if (!free_vars(m).count("X")) continue;
    Formula q = eliminate_exists(Formula::exists({"X"}, m));
    EXPECT_TRUE(is_quantifier_free(q));
    for (long y = -3; y <= 3; ++y) {
      std::map<std::string, long> vals{{"Y", y}};
      bool want = oracle::exists_univariate(instantiate(m, vals));
      bool got = free_vars(q).empty() ? eval_qfree(q, {}) : eval_qfree(q, as_assignment(vals));
      EXPECT_EQ(got, want) << print(m) << " at Y=" << y << " -> " << print(q);
    }
  }
}

TEST(BranchOutcomes, PathLengthEqualsDepth) {
  auto outs = branch_outcomes(parse("A*X*X + B*X + C = 0"), "X");
  ASSERT_FALSE(outs.empty());
  bool some_true = false;
  for (const auto& o : outs) {
    some_true |= o.verdict;
    std::set<std::string> labels;
    for (const auto& [f, s] : o.path.conditions) {
      EXPECT_TRUE(s >= -1 && s <= 1);
      // Repeated tests reuse the earlier answer, so no label appears twice.
      EXPECT_TRUE(labels.insert(f.numerator.to_string() + "/" + f.denominator.to_string()).second);
    }
  }
  EXPECT_TRUE(some_true);
  std::size_t depth_sum = 0;
  for (const auto& o : outs) depth_sum += o.path.conditions.size();
  EXPECT_GT(depth_sum, 0u);
}

TEST(BranchOutcomes, ConstantMatrixHasOneLeaf) {
  auto outs = branch_outcomes(parse("X*X + 1 > 0"), "X");
  ASSERT_EQ(outs.size(), 1u);
  EXPECT_TRUE(outs[0].verdict);
  EXPECT_TRUE(outs[0].path.conditions.empty());
}

TEST(Threads, OutputIndependentOfThreadCount) {
  QeOptions one, four;
  four.threads = 4;
  for (const char* s : {kQuadratic, "(E X)(A*X + B = 0 /\\ X*X < C)", "(E X)(X*X*X + A*X + B = 0)"}) {
    Formula f = parse(s);
    EXPECT_EQ(print(eliminate_exists(f, one)), print(eliminate_exists(f, four))) << s;
  }
}

TEST(Simplify, Examples) {
  Formula phi = parse("X > 0");
  EXPECT_EQ(simplify(parse("0 = 1 \\/ X > 0")), phi);
  EXPECT_EQ(simplify(parse("X > 0 /\\ X > 0")), phi);
  EXPECT_EQ(simplify(parse("X > 0 /\\ X < 0 \\/ Y = 0")), parse("Y = 0"));
  EXPECT_EQ(simplify(parse("1 = 1 /\\ X > 0")), phi);
  EXPECT_EQ(simplify(parse("X > 0 \\/ X > 0 /\\ Y > 0")), phi);
}

TEST(SimplifyProperty, IdempotentAndEquivalent) {
  std::mt19937_64 rng(37);
  gen::FormulaShape shape;
  shape.vars = {"X", "Y"};
  shape.term_depth = 1;
  shape.max_constant = 3;
  for (int i = 0; i < 300; ++i) {
    Formula f = gen::qfree(rng, shape, 3);
    Formula s = simplify(f);
    EXPECT_EQ(simplify(s), s) << print(f);
    EXPECT_FALSE(sample_equiv(f, s, {"X", "Y"}, 100, static_cast<std::uint64_t>(i)).counterexample) << print(f) << "  vs  " << print(s);
  }
}

TEST(LinearSubstitution, DisablingKeepsSemantics) {
  QeOptions plain;
  plain.substitute_linear = false;
  for (const char* s : {"(E X)(A*X + B = 0)", "(E X)(X*X = Y)", "(E X)(X > Y /\\ X*X < 4)"}) {
    Formula f = parse(s);
    Formula a = eliminate_exists(f), b = eliminate_exists(f, plain);
    const auto fv = free_vars(f);
    std::vector<std::string> vars(fv.begin(), fv.end());
    EXPECT_FALSE(sample_equiv(a, b, vars, 300, 5).counterexample) << s;
  }
}

TEST(MatrixReduction, DisablingKeepsSemantics) {
  QeOptions plain;
  plain.reduce_matrix = false;
  for (const char* s : {"(E X)(X*X*X*X = Y)", "(E X)(X*X + Y < 0 \\/ X*X*Y = 1)", "(E X)(X*X*X*X - 3*X*X + Y = 0 /\\ X*X < 2)",
                        "(E X)(X > Y \\/ X*X < Y)", "(E X)(X*X*X*X*X*X*Y + X*X = 1)"}) {
    Formula f = parse(s);
    Formula a = eliminate_exists(f), b = eliminate_exists(f, plain);
    EXPECT_FALSE(sample_equiv(a, b, {"Y"}, 300, 6).counterexample) << s;
  }
}

TEST(MatrixReduction, EvenPowers) {
  EXPECT_FALSE(decide_sentence(parse("(E X)(X*X*X*X + 1 = 0)")));
  EXPECT_TRUE(decide_sentence(parse("(E X)(X*X*X*X = 16 /\\ X < 0)")));
  EXPECT_EQ(detail::even_power_depth(parse("X*X*X*X + X*X*Y = 0"), "X", kDefaultMaxMonomials), 1);
  EXPECT_EQ(detail::even_power_depth(parse("X*X*X*X + Y = 0"), "X", kDefaultMaxMonomials), 2);
  EXPECT_EQ(detail::even_power_depth(parse("X*X*X + Y = 0"), "X", kDefaultMaxMonomials), 0);
}

TEST(EliminateAll, OrderWithinBlockDoesNotChangeTruth) {
  EXPECT_TRUE(decide_sentence(parse("(E T U X)(T*T*T*T + 8*T*T*X + 40*T*T + U*U*U*U + 2*U*U*X + 17*X*X + 130*X + 625 = 30*U*U)")));
  EXPECT_TRUE(decide_sentence(parse("(A X)(E Y)(A Z)(Z*Z + X*X*Y*Y >= 0)")));
  EXPECT_FALSE(decide_sentence(parse("(E X)(A Y)(E Z)(X*Y + Z*Z*Z*Z < 0 /\\ Y*Y*Y*Y > 1)")));
}

TEST(MatrixReduction, SquarefreeDecompositionReconstructs) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    Polynomial p(1);
    for (int k = 0; k < 3; ++k) p = p * oracle::random_univariate(rng, "X", 2, 3).pow(1 + static_cast<unsigned>(rng() % 3));
    if (p.degree("X") < 1) continue;
    auto u = upoly::from_polynomial(p, "X");
    auto parts = upoly::squarefree_decomposition(u);
    UPoly<Rational> back{u.back()};
    UPoly<Rational> rad{Rational(1)};
    for (std::size_t j = 0; j < parts.size(); ++j) {
      for (std::size_t e = 0; e <= j; ++e) back = detail::upoly_mul(back, parts[j]);
      rad = detail::upoly_mul(rad, parts[j]);
    }
    EXPECT_EQ(back, u) << p.to_string();
    EXPECT_EQ(upoly::monic(rad), upoly::monic(oracle::squarefree(oracle::from_polynomial(p)))) << p.to_string();
  }
}

TEST(MatrixReduction, SquarefreeAtomsAreEquivalent) {
  for (const char* s : {"(X - 1)*(X - 1)*(X + 2) > 0", "(X - 1)*(X - 1)*(X + 2) <= 0", "X*X*X*X*(X - 3) >= 0", "(X*X - 2)*(X*X - 2) < 0",
                        "(X + 1)*(X + 1)*(X + 1)*X != 0", "(X - 1)*(X - 1)*X*X*X = 0 \\/ ~(X*X*X*X < 1)"}) {
    Formula f = parse(s);
    auto g = detail::squarefree_atoms(f, "X", kDefaultMaxMonomials);
    ASSERT_TRUE(g.has_value()) << s;
    EXPECT_FALSE(sample_equiv(f, *g, {"X"}, 400, 7).counterexample) << s << " vs " << print(*g);
    for (long x = -4; x <= 4; ++x) EXPECT_EQ(eval_qfree(f, {{"X", x}}), eval_qfree(*g, {{"X", x}})) << s << " at " << x;
  }
  EXPECT_FALSE(detail::squarefree_atoms(parse("X*X - 2 > 0"), "X", kDefaultMaxMonomials).has_value());
  EXPECT_FALSE(detail::squarefree_atoms(parse("(X - Y)*(X - Y) > 0"), "X", kDefaultMaxMonomials).has_value());
}
