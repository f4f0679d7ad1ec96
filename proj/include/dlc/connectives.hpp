#pragma once

#include <string>
#include <vector>

#include "dlc/scalar.hpp"

namespace dlc {

namespace detail {

template <typename Scalar>
void require_unit_interval(const Scalar& a, const char* op) {
  double v = value_of(a);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(op) + ": operand " + std::to_string(v) + " outside [0,1]");
  }
}

}  // namespace detail

// DL2 conjunction: sum of the conjunct losses.
template <typename Scalar>
Scalar dl2_and(const Scalar& a, const Scalar& b) {
  return a + b;
}

template <typename Scalar>
Scalar goedel_and(const Scalar& a, const Scalar& b) {
  detail::require_unit_interval(a, "goedel_and");
  detail::require_unit_interval(b, "goedel_and");
  return min(a, b);
}

template <typename Scalar>
Scalar lukasiewicz_and(const Scalar& a, const Scalar& b) {
  detail::require_unit_interval(a, "lukasiewicz_and");
  detail::require_unit_interval(b, "lukasiewicz_and");
  return max(a + b - Scalar(1.0), Scalar(0.0));
}

template <typename Scalar>
Scalar yager_and(const Scalar& a, const Scalar& b, double p) {
  detail::require_unit_interval(a, "yager_and");
  detail::require_unit_interval(b, "yager_and");
  if (!(p >= 1.0)) throw DomainError("yager_and: p must be >= 1");
  Scalar s = pow(Scalar(1.0) - a, p) + pow(Scalar(1.0) - b, p);
  return max(Scalar(1.0) - pow(s, 1.0 / p), Scalar(0.0));
}

template <typename Scalar>
Scalar product_and(const Scalar& a, const Scalar& b) {
  detail::require_unit_interval(a, "product_and");
  detail::require_unit_interval(b, "product_and");
  return a * b;
}

template <typename Scalar>
Scalar fuzzy_not(const Scalar& a) {
  detail::require_unit_interval(a, "fuzzy_not");
  return Scalar(1.0) - a;
}

template <typename Scalar>
Scalar stl_not(const Scalar& a) {
  return -a;
}

// ---------------------------------------------------------------------------
// Smooth STL conjunction over M >= 2 conjuncts.
//
//   A_min < 0:  sum_i A_min e^{Ã_i} e^{ν Ã_i} / sum_i e^{ν Ã_i}
//   A_min > 0:  sum_i A_i e^{-ν Ã_i} / sum_i e^{-ν Ã_i}
//   A_min = 0:  0
//
// with Ã_i = (A_i - A_min) / A_min. |A_min| < kStlZeroSnap takes the zero
// branch. StlVariant::Literal puts A_min in the positive-branch numerator,
// which collapses that branch to A_min.

enum class StlBranch { Negative, Positive, Zero };
enum class StlVariant { Smooth, Literal };

inline constexpr double kStlZeroSnap = 1e-12;
inline constexpr double kStlExponentClamp = 700.0;

struct StlEvalTrace {
  std::vector<double> conjunct_values;
  double a_min = 0.0;
  std::vector<double> a_tilde;
  StlBranch branch = StlBranch::Zero;
  bool exponent_clamped = false;
};

namespace detail {

template <typename Scalar>
Scalar clamped_exp(const Scalar& x, bool& clamped) {
  double v = value_of(x);
  if (v > kStlExponentClamp || v < -kStlExponentClamp) {
    clamped = true;
    return Scalar(std::exp(v > 0 ? kStlExponentClamp : -kStlExponentClamp));
  }
  return exp(x);
}

}  // namespace detail

template <typename Scalar>
Scalar stl_and(const Vector<Scalar>& values, double nu, StlVariant variant = StlVariant::Smooth,
               StlEvalTrace* trace = nullptr) {
  const Eigen::Index m = values.size();
  if (m < 2) throw DomainError("stl_and: needs at least 2 conjuncts");
  if (!(nu > 0.0)) throw DomainError("stl_and: nu must be > 0");

  Scalar a_min = values[0];
  for (Eigen::Index i = 1; i < m; ++i) a_min = min(a_min, values[i]);
  a_min = branch_on_sign(a_min);

  StlBranch branch = StlBranch::Zero;
  if (std::abs(value_of(a_min)) >= kStlZeroSnap) {
    branch = value_of(a_min) < 0.0 ? StlBranch::Negative : StlBranch::Positive;
  }

  if (trace) {
    trace->conjunct_values.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) trace->conjunct_values[i] = value_of(values[i]);
    trace->a_min = value_of(a_min);
    trace->a_tilde.clear();
    trace->branch = branch;
    trace->exponent_clamped = false;
  }
  if (branch == StlBranch::Zero) return Scalar(0.0);

  bool clamped = false;
  Scalar numerator(0.0);
  Scalar denominator(0.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    Scalar tilde = (values[i] - a_min) / a_min;
    if (trace) trace->a_tilde.push_back(value_of(tilde));
    if (branch == StlBranch::Negative) {
      Scalar w = detail::clamped_exp(Scalar(nu) * tilde, clamped);
      numerator += a_min * detail::clamped_exp(tilde, clamped) * w;
      denominator += w;
    } else {
      Scalar w = detail::clamped_exp(Scalar(-nu) * tilde, clamped);
      numerator += (variant == StlVariant::Smooth ? values[i] : a_min) * w;
      denominator += w;
    }
  }
  if (trace) trace->exponent_clamped = clamped;
  return numerator / denominator;
}

}  // namespace dlc
