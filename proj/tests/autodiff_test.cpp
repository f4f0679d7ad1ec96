#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "dlc/autodiff.hpp"
#include "dlc/errors.hpp"
#include "support/printers.hpp"
#include "support/random_formula.hpp"

namespace dlc {
namespace {

using D = Dual<double>;

D lift(LiftOp op, std::initializer_list<D> args) {
  std::vector<D> v(args);
  return lift_arithmetic(op, v);
}

TEST(Dual, Arithmetic) {
  D r = lift(LiftOp::Mul, {{3, 1}, {4, 0}});
  EXPECT_EQ(r.value, 12);
  EXPECT_EQ(r.derivative, 4);
  D q = lift(LiftOp::Div, {{1, 1}, {2, 0}});
  EXPECT_EQ(q.value, 0.5);
  EXPECT_EQ(q.derivative, 0.5);
  D e = lift(LiftOp::Exp, {{0, 1}});
  EXPECT_EQ(e.value, 1);
  EXPECT_EQ(e.derivative, 1);
  D a = lift(LiftOp::Abs, {{-2, 1}});
  EXPECT_EQ(a.value, 2);
  EXPECT_EQ(a.derivative, -1);
}

TEST(Dual, MaxPicksActiveBranchAndFirstOnTies) {
  D m = lift(LiftOp::Max, {{2, 1}, {5, 0}});
  EXPECT_EQ(m.value, 5);
  EXPECT_EQ(m.derivative, 0);
  D t = lift(LiftOp::Max, {{2, 1}, {2, 0}});
  EXPECT_EQ(t.value, 2);
  EXPECT_EQ(t.derivative, 1);
  D n = lift(LiftOp::Min, {{2, 0}, {2, 1}});
  EXPECT_EQ(n.derivative, 0);
}

TEST(Dual, Errors) {
  EXPECT_THROW(lift(LiftOp::Div, {{1, 0}, {0, 1}}), ArithmeticError);
  EXPECT_THROW(lift(LiftOp::Exp, {{800, 1}}), ArithmeticError);
  EXPECT_THROW(lift(LiftOp::Add, {{1, 0}}), DomainError);
  EXPECT_THROW(lift(LiftOp::Abs, {{1, 0}, {2, 0}}), DomainError);
}

TEST(Grad, Dl2Examples) {
  CompiledLoss l = compile(parse_formula("x <= 0"), SemanticsId::DL2);
  ValueAndGradient g = grad(l, Env{{"x", 3}});
  EXPECT_EQ(g.value, 3);
  EXPECT_EQ(g.gradient.at("x"), 1);
  g = grad(l, Env{{"x", -1}});
  EXPECT_EQ(g.value, 0);
  EXPECT_EQ(g.gradient.at("x"), 0);
  EXPECT_TRUE(grad(compile(parse_formula("1 <= 2"), SemanticsId::DL2), {}).gradient.empty());
}

TEST(Grad, ProductOfGradedAtoms) {
  AtomOracle graded{OracleMode::GRADED, 1};
  CompiledLoss l = compile(parse_formula("and(1 <= a, 1 <= b)"), SemanticsId::PRODUCT, {}, graded);
  // Graded 1 <= a is 1 - max(1 - a, 0): equal to a on [0,1].
  ValueAndGradient g = grad(l, Env{{"a", 0.5}, {"b", 0.4}});
  EXPECT_NEAR(g.value, 0.2, 1e-15);
  EXPECT_NEAR(g.gradient.at("a"), 0.4, 1e-15);
  EXPECT_NEAR(g.gradient.at("b"), 0.5, 1e-15);
}

TEST(FiniteDiff, Examples) {
  CompiledLoss l = compile(parse_formula("x <= 0"), SemanticsId::DL2);
  EXPECT_NEAR(finite_diff_grad(l, Env{{"x", 3}}).at("x"), 1.0, 1e-8);
  EXPECT_TRUE(finite_diff_grad(compile(parse_formula("1 <= 2"), SemanticsId::DL2), {}).empty());

  AtomOracle graded{OracleMode::GRADED, 1};
  CompiledLoss g = compile(parse_formula("and(1 <= a, 1 <= b)"), SemanticsId::GOEDEL, {}, graded);
  Env env{{"a", 0.3}, {"b", 0.8}};
  ValueAndGradient exact = grad(g, env);
  Gradient fd = finite_diff_grad(g, env);
  for (const auto& [name, d] : exact.gradient) EXPECT_NEAR(fd.at(name), d, 1e-6 * (1 + std::abs(d)));
}

TEST(KinkMargin, DistanceToBranchDecisions) {
  CompiledLoss l = compile(parse_formula("x <= 0"), SemanticsId::DL2);
  EXPECT_EQ(kink_margin(l, Env{{"x", 3}}), 3);
  EXPECT_EQ(kink_margin(l, Env{{"x", 0}}), 0);
  // Constants still pass through max(1 - 2, 0).
  EXPECT_EQ(kink_margin(compile(parse_formula("1 <= 2"), SemanticsId::DL2), Env{}), 1);
  AtomOracle graded{OracleMode::GRADED, 1};
  CompiledLoss p = compile(parse_formula("and(1 <= a, 1 <= b)"), SemanticsId::PRODUCT, {}, graded);
  EXPECT_NEAR(kink_margin(p, Env{{"a", 0.5}, {"b", 0.4}}), 0.4, 1e-15);
}

// Dual-number gradients agree with central differences wherever the
// evaluation stays away from every kink.
class GradientAgreement : public ::testing::TestWithParam<SemanticsId> {};

TEST_P(GradientAgreement, RandomFormulas) {
  SemanticsId s = GetParam();
  std::mt19937_64 rng(700 + static_cast<int>(s));
  testing::FormulaGenerator gen{rng};
  gen.negate_conjunctions = s != SemanticsId::DL2;
  AtomOracle oracle = is_fuzzy(s) ? AtomOracle{OracleMode::GRADED, 4.0} : default_oracle(s);
  std::size_t checked = 0;
  for (int attempt = 0; attempt < 200000 && checked < 1000; ++attempt) {
    Formula f = gen.formula(4);
    CompiledLoss l = compile(f, s, {}, oracle);
    if (l.variables().empty()) continue;
    Env env = gen.env();
    if (kink_margin(l, env) < 1e-3) continue;
    ValueAndGradient exact = grad(l, env);
    Gradient fd = finite_diff_grad(l, env);
    for (const auto& [name, d] : exact.gradient) {
      EXPECT_LE(std::abs(fd.at(name) - d), 1e-6 * (1 + std::abs(d))) << pretty_print(f) << " d/d" << name;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1000u);
}

INSTANTIATE_TEST_SUITE_P(AllSemantics, GradientAgreement, ::testing::ValuesIn(kAllSemantics),
                         [](const auto& info) { return std::string(to_string(info.param)); });

}  // namespace
}  // namespace dlc
