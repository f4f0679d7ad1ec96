#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dlc/scalar.hpp"
#include "dlc/semantics.hpp"

namespace dlc {

using Gradient = std::map<std::string, double>;

struct ValueAndGradient {
  double value = 0.0;
  Gradient gradient;
};

enum class LiftOp { Add, Sub, Mul, Div, Min, Max, Exp, Abs, Indicator };

/// Applies one primitive to dual operands. Binary ops take two arguments,
/// Exp and Abs one. Throws ArithmeticError on division by zero or a
/// non-finite result, DomainError on wrong arity.
Dual<double> lift_arithmetic(LiftOp op, std::span<const Dual<double>> args);

/// Loss value and d(loss)/d(point[index]) from one forward pass.
Dual<double> directional(const CompiledLoss& loss, std::span<const double> point, std::size_t index);

/// Exact forward-mode gradient: one pass per free variable.
ValueAndGradient grad(const CompiledLoss& loss, const Env& env);

/// Central differences (f(x+h) - f(x-h)) / 2h per variable.
Gradient finite_diff_grad(const CompiledLoss& loss, const Env& env, double h = 1e-5);

/// Smallest distance between the operands of any min/max/abs/indicator or
/// case split taken while evaluating the loss at env. +inf when the
/// evaluation takes no such decision.
double kink_margin(const CompiledLoss& loss, const Env& env);
double kink_margin(const CompiledLoss& loss, std::span<const double> point);

}  // namespace dlc
