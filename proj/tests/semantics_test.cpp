#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dlc/connectives.hpp"
#include "dlc/errors.hpp"
#include "dlc/semantics.hpp"
#include "support/printers.hpp"
#include "support/random_formula.hpp"

namespace dlc {
namespace {

Vector<double> vec(std::initializer_list<double> xs) {
  Vector<double> v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

double loss(const char* text, SemanticsId s, const Env& env, const SemanticsParams& prm = {}) {
  return eval_loss(compile(parse_formula(text), s, prm), env);
}

TEST(Connectives, Dl2) {
  EXPECT_EQ(dl2_and(2.0, 0.0), 2.0);
  EXPECT_EQ(dl2_and(2.0, 3.0), 5.0);
  EXPECT_EQ(dl2_and(0.0, 0.0), 0.0);
}

TEST(Connectives, FuzzySpotValues) {
  EXPECT_EQ(goedel_and(0.3, 0.8), 0.3);
  EXPECT_NEAR(lukasiewicz_and(0.7, 0.7), 0.4, 1e-12);
  EXPECT_NEAR(yager_and(0.5, 0.5, 2.0), 1.0 - std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(product_and(0.5, 0.4), 0.2, 1e-15);
  for (double p : {1.0, 2.0, 3.5}) EXPECT_EQ(yager_and(1.0, 1.0, p), 1.0);
  EXPECT_EQ(goedel_and(1.0, 1.0), 1.0);
  EXPECT_EQ(lukasiewicz_and(1.0, 1.0), 1.0);
  EXPECT_EQ(product_and(1.0, 1.0), 1.0);
}

TEST(Connectives, FuzzyDomain) {
  EXPECT_THROW(goedel_and(1.2, 0.5), DomainError);
  EXPECT_THROW(product_and(0.5, -0.1), DomainError);
  EXPECT_THROW(fuzzy_not(1.5), DomainError);
}

TEST(Connectives, Negations) {
  EXPECT_EQ(fuzzy_not(0.0), 1.0);
  EXPECT_NEAR(fuzzy_not(0.3), 0.7, 1e-15);
  EXPECT_NEAR(fuzzy_not(fuzzy_not(0.42)), 0.42, 1e-15);
  EXPECT_EQ(stl_not(3.0), -3.0);
  EXPECT_EQ(stl_not(0.0), 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    double x = u(rng);
    EXPECT_EQ(stl_not(stl_not(x)), x);
  }
}

TEST(StlAnd, SpotValues) {
  EXPECT_EQ(stl_and(vec({-1, -1}), 0.7), -1.0);
  EXPECT_EQ(stl_and(vec({0, 5}), 1.0), 0.0);
  double expected = (2.0 + 4.0 * std::exp(-1.0)) / (1.0 + std::exp(-1.0));
  double v = stl_and(vec({2, 4}), 1.0);
  EXPECT_NEAR(v, expected, 1e-12);
  EXPECT_NEAR(v, 2.5379, 1e-4);
  EXPECT_GE(v, 2.0);
  EXPECT_LE(v, 4.0);
  EXPECT_EQ(stl_and(vec({2, 4}), 1.0, StlVariant::Literal), 2.0);
}

TEST(StlAnd, IdempotentOnSamples) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> a(-10, 10), nu(0.1, 5);
  for (int i = 0; i < 100; ++i) {
    double x = a(rng), n = nu(rng);
    EXPECT_NEAR(stl_and(vec({x, x}), n), x, 1e-12 * (1 + std::abs(x)));
  }
}

TEST(StlAnd, TraceAndClamp) {
  StlEvalTrace t;
  stl_and(vec({-1e-3, 10}), 1.0, StlVariant::Smooth, &t);
  EXPECT_EQ(t.branch, StlBranch::Negative);
  EXPECT_TRUE(t.exponent_clamped);
  stl_and(vec({1e-13, 1}), 1.0, StlVariant::Smooth, &t);
  EXPECT_EQ(t.branch, StlBranch::Zero);
  EXPECT_THROW(stl_and(vec({1}), 1.0), DomainError);
  EXPECT_THROW(stl_and(vec({1, 2}), 0.0), DomainError);
}

TEST(Atoms, Dl2) {
  EXPECT_EQ(loss("5 <= 3", SemanticsId::DL2, {}), 2.0);
  EXPECT_EQ(loss("3 <= 5", SemanticsId::DL2, {}), 0.0);
  EXPECT_EQ(loss("2 != 2", SemanticsId::DL2, {}), 1.0);
  EXPECT_EQ(loss("2 != 2", SemanticsId::DL2, {}, {.xi = 3.0}), 3.0);
  // Negated atoms after NNF: not(l <= r) is r < l, not(l != r) is l = r.
  EXPECT_EQ(loss("not(3 <= 5)", SemanticsId::DL2, {}), 2.0);
  EXPECT_EQ(loss("not(5 <= 5)", SemanticsId::DL2, {}), 1.0);
  EXPECT_EQ(loss("not(2 != 3)", SemanticsId::DL2, {}), 1.0);
  EXPECT_EQ(loss("not(2 != 2)", SemanticsId::DL2, {}), 0.0);
}

TEST(Atoms, Oracles) {
  Atom le23{Predicate::LE, Term::constant(2), Term::constant(3)};
  Atom le43{Predicate::LE, Term::constant(4), Term::constant(3)};
  Atom le53{Predicate::LE, Term::constant(5), Term::constant(3)};
  EXPECT_EQ(atom_oracle_eval(le23, {}, {OracleMode::CRISP, 1}), 1.0);
  EXPECT_EQ(atom_oracle_eval(le23, {}, {OracleMode::ROBUSTNESS, 1}), 1.0);
  EXPECT_EQ(atom_oracle_eval(le43, {}, {OracleMode::ROBUSTNESS, 1}), -1.0);
  EXPECT_EQ(atom_oracle_eval(le53, {}, {OracleMode::GRADED, 1}), 0.0);
  EXPECT_EQ(atom_oracle_eval(le43, {}, {OracleMode::GRADED, 2}), 0.5);
  Atom neq{Predicate::NEQ, Term::constant(1), Term::constant(3)};
  EXPECT_NEAR(atom_oracle_eval(neq, {}, {OracleMode::GRADED, 1}), 1 - std::exp(-2.0), 1e-15);
  EXPECT_EQ(atom_oracle_eval(neq, {}, {OracleMode::ROBUSTNESS, 1}), 2.0);
}

TEST(Domain, TrueRegions) {
  EXPECT_TRUE(domain_true(SemanticsId::DL2, 0.0));
  EXPECT_FALSE(domain_true(SemanticsId::DL2, 0.01));
  EXPECT_TRUE(domain_true(SemanticsId::GOEDEL, 1.0));
  EXPECT_FALSE(domain_true(SemanticsId::GOEDEL, 0.999));
  EXPECT_FALSE(domain_true(SemanticsId::STL, 0.0));
  EXPECT_TRUE(domain_true(SemanticsId::STL, 1e-300));
}

TEST(Compile, Checks) {
  EXPECT_THROW(compile(parse_formula("not(and(a<=b,c<=d))"), SemanticsId::DL2), NnfUnsupported);
  EXPECT_NO_THROW(compile(parse_formula("not(x<=0)"), SemanticsId::GOEDEL, {}, {OracleMode::CRISP, 1}));
  CompiledLoss l = compile(parse_formula("andM(a<=b, c<=d, e<=f)"), SemanticsId::STL, {}, {OracleMode::ROBUSTNESS, 1});
  EXPECT_EQ(l.root().as_conj().children.size(), 3u);
  EXPECT_EQ(l.variables(), (std::vector<std::string>{"a", "b", "c", "d", "e", "f"}));
  EXPECT_THROW(compile(parse_formula("x<=0"), SemanticsId::GOEDEL, {}, {OracleMode::ROBUSTNESS, 1}), OracleMismatch);
  EXPECT_THROW(compile(parse_formula("x<=0"), SemanticsId::STL, {}, {OracleMode::CRISP, 1}), OracleMismatch);
  EXPECT_THROW(compile(parse_formula("x<=0"), SemanticsId::YAGER, {.p = 0.5}), DomainError);
  EXPECT_THROW(compile(parse_formula("x<=0"), SemanticsId::STL, {.nu = 0.0}), DomainError);
  EXPECT_THROW(eval_loss(l, Env{{"a", 1}}), UnboundVariable);
}

TEST(Compile, ConjunctionsFoldLeft) {
  // Graded "v <= 0" with scale 1 is 1 - v on [0,1]: conjuncts 0.9, 0.8, 0.7.
  Env env{{"a", 0.1}, {"b", 0.2}, {"c", 0.3}};
  AtomOracle graded{OracleMode::GRADED, 1};
  auto l = compile(parse_formula("andM(a <= 0, b <= 0, c <= 0)"), SemanticsId::LUKASIEWICZ, {}, graded);
  EXPECT_NEAR(eval_loss(l, env), 0.4, 1e-12);
  auto d = compile(parse_formula("andM(0.1 <= 0, b <= 0, 3 <= 1)"), SemanticsId::DL2);
  EXPECT_NEAR(eval_loss(d, env), 2.3, 1e-12);
}

// Soundness on random formulas: every semantics agrees with the boolean
// interpreter at the boundary of its true region.
class Soundness : public ::testing::TestWithParam<SemanticsId> {};

TEST_P(Soundness, RandomFormulas) {
  SemanticsId s = GetParam();
  std::mt19937_64 rng(100 + static_cast<int>(s));
  testing::FormulaGenerator gen{rng};
  gen.integer_grid = s != SemanticsId::STL;
  gen.negate_conjunctions = s != SemanticsId::DL2;
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Formula f = gen.formula(4);
    Env env = gen.env();
    if (s == SemanticsId::STL && !testing::atoms_nonzero(f, env)) {
      --i;
      continue;
    }
    CompiledLoss l = compile(f, s);
    double v = eval_loss(l, env);
    bool truth = interpret_bool(f, env);
    if (s == SemanticsId::DL2) {
      EXPECT_EQ(truth, v == 0.0) << pretty_print(f);
      EXPECT_GE(v, 0.0);
    } else if (is_fuzzy(s)) {
      EXPECT_EQ(truth, v == 1.0) << pretty_print(f);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    } else {
      EXPECT_EQ(truth, v > 0.0) << pretty_print(f);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

INSTANTIATE_TEST_SUITE_P(AllSemantics, Soundness, ::testing::ValuesIn(kAllSemantics),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(Negation, FuzzyInvolutionAndStlSignFlip) {
  std::mt19937_64 rng(23);
  testing::FormulaGenerator gen{rng};
  for (int i = 0; i < 1000; ++i) {
    Formula f = gen.formula(3);
    Env env = gen.env();
    for (SemanticsId s : {SemanticsId::GOEDEL, SemanticsId::LUKASIEWICZ, SemanticsId::YAGER, SemanticsId::PRODUCT}) {
      AtomOracle graded{OracleMode::GRADED, 2.0};
      double v = eval_loss(compile(f, s, {}, graded), env);
      double vv = eval_loss(compile(Formula::neg(Formula::neg(f)), s, {}, graded), env);
      EXPECT_NEAR(vv, v, 1e-15);
    }
    double r = eval_loss(compile(f, SemanticsId::STL), env);
    EXPECT_EQ(eval_loss(compile(Formula::neg(f), SemanticsId::STL), env), -r);
  }
}

}  // namespace
}  // namespace dlc
