#pragma once

// Scalar types the loss evaluator is instantiated with, and the primitive
// operations they share. Generic code calls the free functions below
// unqualified (or via dlc::) so that the overload for the active scalar is
// picked up: plain double, Dual<T> for forward-mode derivatives, and
// KinkTracked for measuring the distance to the nearest non-smooth point.

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Core>

#include "dlc/errors.hpp"

namespace dlc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Forward-mode dual number: value plus derivative along the seeded direction.
template <typename T>
struct Dual {
  T value{};
  T derivative{};

  constexpr Dual() = default;
  constexpr Dual(T v) : value(v) {}  // NOLINT: constants lift implicitly
  constexpr Dual(T v, T d) : value(v), derivative(d) {}

  static constexpr Dual variable(T v) { return Dual(v, T(1)); }

  Dual& operator+=(const Dual& o) { return *this = *this + o; }
  Dual& operator-=(const Dual& o) { return *this = *this - o; }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend constexpr Dual operator+(const Dual& a, const Dual& b) {
    return {a.value + b.value, a.derivative + b.derivative};
  }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) {
    return {a.value - b.value, a.derivative - b.derivative};
  }
  friend constexpr Dual operator-(const Dual& a) { return {-a.value, -a.derivative}; }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.value * b.value, a.derivative * b.value + a.value * b.derivative};
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    if (b.value == T(0)) throw ArithmeticError("division by zero");
    return {a.value / b.value, (a.derivative * b.value - a.value * b.derivative) / (b.value * b.value)};
  }

  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.value < b.value; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.value > b.value; }
  friend constexpr bool operator<=(const Dual& a, const Dual& b) { return a.value <= b.value; }
  friend constexpr bool operator>=(const Dual& a, const Dual& b) { return a.value >= b.value; }
  friend constexpr bool operator==(const Dual& a, const Dual& b) { return a.value == b.value; }
  friend constexpr bool operator!=(const Dual& a, const Dual& b) { return a.value != b.value; }

  friend std::ostream& operator<<(std::ostream& os, const Dual& d) {
    return os << '(' << d.value << ", " << d.derivative << ')';
  }
};

/// Double that carries the smallest distance, over every branch decision made
/// while computing it, between the operands and the branch boundary.
struct KinkTracked {
  double value = 0.0;
  double margin = std::numeric_limits<double>::infinity();

  KinkTracked() = default;
  KinkTracked(double v) : value(v) {}  // NOLINT
  KinkTracked(double v, double m) : value(v), margin(m) {}

  friend KinkTracked operator+(const KinkTracked& a, const KinkTracked& b) {
    return {a.value + b.value, std::min(a.margin, b.margin)};
  }
  friend KinkTracked operator-(const KinkTracked& a, const KinkTracked& b) {
    return {a.value - b.value, std::min(a.margin, b.margin)};
  }
  friend KinkTracked operator-(const KinkTracked& a) { return {-a.value, a.margin}; }
  friend KinkTracked operator*(const KinkTracked& a, const KinkTracked& b) {
    return {a.value * b.value, std::min(a.margin, b.margin)};
  }
  friend KinkTracked operator/(const KinkTracked& a, const KinkTracked& b) {
    if (b.value == 0.0) throw ArithmeticError("division by zero");
    return {a.value / b.value, std::min(a.margin, b.margin)};
  }
  KinkTracked& operator+=(const KinkTracked& o) { return *this = *this + o; }

  friend bool operator<(const KinkTracked& a, const KinkTracked& b) { return a.value < b.value; }
  friend bool operator<=(const KinkTracked& a, const KinkTracked& b) { return a.value <= b.value; }
  friend bool operator>(const KinkTracked& a, const KinkTracked& b) { return a.value > b.value; }
  friend bool operator>=(const KinkTracked& a, const KinkTracked& b) { return a.value >= b.value; }
  friend bool operator==(const KinkTracked& a, const KinkTracked& b) { return a.value == b.value; }
};

// ---------------------------------------------------------------------------
// Primitive operations. Ties in min/max select the first argument.

inline double value_of(double x) { return x; }
template <typename T>
T value_of(const Dual<T>& x) { return x.value; }
inline double value_of(const KinkTracked& x) { return x.value; }

inline double derivative_of(double) { return 0.0; }
template <typename T>
T derivative_of(const Dual<T>& x) { return x.derivative; }

inline double max(double a, double b) { return a >= b ? a : b; }
inline double min(double a, double b) { return a <= b ? a : b; }

template <typename T>
Dual<T> max(const Dual<T>& a, const Dual<T>& b) { return a.value >= b.value ? a : b; }
template <typename T>
Dual<T> min(const Dual<T>& a, const Dual<T>& b) { return a.value <= b.value ? a : b; }

inline KinkTracked max(const KinkTracked& a, const KinkTracked& b) {
  KinkTracked r = a.value >= b.value ? a : b;
  r.margin = std::min({a.margin, b.margin, std::abs(a.value - b.value)});
  return r;
}
inline KinkTracked min(const KinkTracked& a, const KinkTracked& b) {
  KinkTracked r = a.value <= b.value ? a : b;
  r.margin = std::min({a.margin, b.margin, std::abs(a.value - b.value)});
  return r;
}

inline double exp(double x) {
  double r = std::exp(x);
  if (!std::isfinite(r)) throw ArithmeticError("exp overflow");
  return r;
}
template <typename T>
Dual<T> exp(const Dual<T>& x) {
  T e = dlc::exp(x.value);
  return {e, e * x.derivative};
}
inline KinkTracked exp(const KinkTracked& x) { return {dlc::exp(x.value), x.margin}; }

inline double abs(double x) { return std::abs(x); }
template <typename T>
Dual<T> abs(const Dual<T>& x) { return x.value < T(0) ? -x : x; }
inline KinkTracked abs(const KinkTracked& x) {
  return {std::abs(x.value), std::min(x.margin, std::abs(x.value))};
}

/// x^p for x >= 0. The derivative at x = 0 with p < 1 is taken as 0.
inline double pow(double x, double p) { return std::pow(x, p); }
template <typename T>
Dual<T> pow(const Dual<T>& x, double p) {
  T v = std::pow(x.value, p);
  if (x.value == T(0)) return {v, p == 1.0 ? x.derivative : T(0)};
  return {v, T(p) * std::pow(x.value, p - 1.0) * x.derivative};
}
inline KinkTracked pow(const KinkTracked& x, double p) {
  double m = p < 1.0 ? std::min(x.margin, std::abs(x.value)) : x.margin;
  return {std::pow(x.value, p), m};
}

/// [a = b] as 1 or 0; derivative is 0 wherever defined.
inline double indicator_eq(double a, double b) { return a == b ? 1.0 : 0.0; }
template <typename T>
Dual<T> indicator_eq(const Dual<T>& a, const Dual<T>& b) {
  return Dual<T>(a.value == b.value ? T(1) : T(0));
}
inline KinkTracked indicator_eq(const KinkTracked& a, const KinkTracked& b) {
  return {a.value == b.value ? 1.0 : 0.0,
          std::min({a.margin, b.margin, std::abs(a.value - b.value)})};
}

/// [a <= b] as 1 or 0; derivative is 0 wherever defined.
inline double step_le(double a, double b) { return a <= b ? 1.0 : 0.0; }
template <typename T>
Dual<T> step_le(const Dual<T>& a, const Dual<T>& b) {
  return Dual<T>(a.value <= b.value ? T(1) : T(0));
}
inline KinkTracked step_le(const KinkTracked& a, const KinkTracked& b) {
  return {a.value <= b.value ? 1.0 : 0.0,
          std::min({a.margin, b.margin, std::abs(a.value - b.value)})};
}

/// Records a case split on the sign of x. Identity except for KinkTracked.
inline double branch_on_sign(double x) { return x; }
template <typename T>
Dual<T> branch_on_sign(const Dual<T>& x) { return x; }
inline KinkTracked branch_on_sign(const KinkTracked& x) {
  return {x.value, std::min(x.margin, std::abs(x.value))};
}

template <typename Scalar>
Scalar clamp(const Scalar& x, double lo, double hi) {
  return min(max(x, Scalar(lo)), Scalar(hi));
}

template <typename Scalar>
bool is_finite(const Scalar& x) {
  return std::isfinite(value_of(x));
}

}  // namespace dlc

namespace Eigen {

template <typename T>
struct NumTraits<dlc::Dual<T>> : NumTraits<T> {
  using Real = dlc::Dual<T>;
  using NonInteger = dlc::Dual<T>;
  using Nested = dlc::Dual<T>;
  using Literal = dlc::Dual<T>;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 4,
  };
};

template <>
struct NumTraits<dlc::KinkTracked> : NumTraits<double> {
  using Real = dlc::KinkTracked;
  using NonInteger = dlc::KinkTracked;
  using Nested = dlc::KinkTracked;
  using Literal = dlc::KinkTracked;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 2,
    AddCost = 2,
    MulCost = 2,
  };
};

}  // namespace Eigen
