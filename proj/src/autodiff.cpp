#include "dlc/autodiff.hpp"

namespace dlc {

namespace {

std::size_t arity(LiftOp op) {
  return op == LiftOp::Exp || op == LiftOp::Abs ? 1 : 2;
}

}  // namespace

Dual<double> lift_arithmetic(LiftOp op, std::span<const Dual<double>> args) {
  if (args.size() != arity(op)) {
    throw DomainError("lift_arithmetic: expected " + std::to_string(arity(op)) + " operands");
  }
  Dual<double> r;
  switch (op) {
    case LiftOp::Add:
      r = args[0] + args[1];
      break;
    case LiftOp::Sub:
      r = args[0] - args[1];
      break;
    case LiftOp::Mul:
      r = args[0] * args[1];
      break;
    case LiftOp::Div:
      r = args[0] / args[1];
      break;
    case LiftOp::Min:
      r = min(args[0], args[1]);
      break;
    case LiftOp::Max:
      r = max(args[0], args[1]);
      break;
    case LiftOp::Exp:
      r = exp(args[0]);
      break;
    case LiftOp::Abs:
      r = abs(args[0]);
      break;
    case LiftOp::Indicator:
      r = indicator_eq(args[0], args[1]);
      break;
  }
  if (!std::isfinite(r.value) || !std::isfinite(r.derivative)) {
    throw ArithmeticError("lift_arithmetic: non-finite result");
  }
  return r;
}

Dual<double> directional(const CompiledLoss& loss, std::span<const double> point, std::size_t index) {
  std::vector<Dual<double>> seeded(point.begin(), point.end());
  seeded.at(index).derivative = 1.0;
  Dual<double> r = loss.evaluate<Dual<double>>(seeded);
  if (!std::isfinite(r.derivative)) throw ArithmeticError("derivative is not finite");
  return r;
}

ValueAndGradient grad(const CompiledLoss& loss, const Env& env) {
  std::vector<double> point = loss.point_from(env);
  ValueAndGradient out;
  if (point.empty()) {
    out.value = loss.evaluate<double>(point);
    return out;
  }
  for (std::size_t i = 0; i < point.size(); ++i) {
    Dual<double> r = directional(loss, point, i);
    out.value = r.value;
    out.gradient[loss.variables()[i]] = r.derivative;
  }
  return out;
}

Gradient finite_diff_grad(const CompiledLoss& loss, const Env& env, double h) {
  if (!(h > 0.0)) throw DomainError("finite difference step must be > 0");
  std::vector<double> point = loss.point_from(env);
  Gradient g;
  for (std::size_t i = 0; i < point.size(); ++i) {
    std::vector<double> up = point, down = point;
    up[i] += h;
    down[i] -= h;
    double fu = loss.evaluate<double>(up);
    double fd = loss.evaluate<double>(down);
    g[loss.variables()[i]] = (fu - fd) / (2.0 * h);
  }
  return g;
}

double kink_margin(const CompiledLoss& loss, std::span<const double> point) {
  std::vector<KinkTracked> tracked(point.begin(), point.end());
  return loss.evaluate<KinkTracked>(tracked).margin;
}

double kink_margin(const CompiledLoss& loss, const Env& env) {
  return kink_margin(loss, loss.point_from(env));
}

}  // namespace dlc
