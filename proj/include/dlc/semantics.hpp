#pragma once

#include <array>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dlc/connectives.hpp"
#include "dlc/formula.hpp"

namespace dlc {

enum class SemanticsId { DL2, GOEDEL, LUKASIEWICZ, YAGER, PRODUCT, STL };

inline constexpr std::array<SemanticsId, 6> kAllSemantics = {
    SemanticsId::DL2,    SemanticsId::GOEDEL,  SemanticsId::LUKASIEWICZ,
    SemanticsId::YAGER,  SemanticsId::PRODUCT, SemanticsId::STL};

/// Lower-case CLI spelling: dl2, goedel, lukasiewicz, yager, product, stl.
std::string_view to_string(SemanticsId s);
std::optional<SemanticsId> semantics_from_string(std::string_view name);

inline bool is_fuzzy(SemanticsId s) {
  return s == SemanticsId::GOEDEL || s == SemanticsId::LUKASIEWICZ || s == SemanticsId::YAGER ||
         s == SemanticsId::PRODUCT;
}

struct SemanticsParams {
  double xi = 1.0;  // DL2 weight of a violated !=
  double p = 2.0;   // Yager exponent
  double nu = 1.0;  // STL smoothing scale
  StlVariant stl_variant = StlVariant::Smooth;

  /// Throws DomainError unless xi > 0, p >= 1 and nu > 0.
  void validate() const;
};

struct DomainSpec {
  enum class TrueRegion { Equals, GreaterThan };
  double lo;
  double hi;
  TrueRegion true_region;
  double threshold;
};

DomainSpec domain_of(SemanticsId s);

/// Membership of v in the semantics' true region.
bool domain_true(SemanticsId s, double v);

enum class OracleMode { CRISP, GRADED, ROBUSTNESS };

std::string_view to_string(OracleMode m);
std::optional<OracleMode> oracle_from_string(std::string_view name);

struct AtomOracle {
  OracleMode mode = OracleMode::CRISP;
  double scale = 1.0;  // GRADED ramp width
};

/// The oracle a semantics uses unless told otherwise: CRISP for fuzzy and DL2,
/// ROBUSTNESS for STL.
AtomOracle default_oracle(SemanticsId s);

// ---------------------------------------------------------------------------
// Atom translations, generic over the scalar. `lhs` and `rhs` are the term values.

template <typename Scalar>
Scalar dl2_atom(Predicate pred, bool negated, const Scalar& lhs, const Scalar& rhs, double xi) {
  const Scalar zero(0.0);
  if (pred == Predicate::LE) {
    if (!negated) return max(lhs - rhs, zero);
    // not(l <= r) means r < l: zero exactly when r is strictly below l.
    return max(rhs - lhs, zero) + Scalar(xi) * indicator_eq(lhs, rhs);
  }
  Scalar eq = indicator_eq(lhs, rhs);
  return negated ? Scalar(xi) * (Scalar(1.0) - eq) : Scalar(xi) * eq;
}

template <typename Scalar>
Scalar oracle_atom(Predicate pred, bool negated, const Scalar& lhs, const Scalar& rhs,
                   const AtomOracle& oracle) {
  Scalar v(0.0);
  switch (oracle.mode) {
    case OracleMode::CRISP:
      v = pred == Predicate::LE ? step_le(lhs, rhs) : Scalar(1.0) - indicator_eq(lhs, rhs);
      return negated ? Scalar(1.0) - v : v;
    case OracleMode::GRADED: {
      const Scalar s(oracle.scale);
      if (pred == Predicate::LE) {
        v = clamp(Scalar(1.0) - max(lhs - rhs, Scalar(0.0)) / s, 0.0, 1.0);
      } else {
        v = Scalar(1.0) - exp(-abs(lhs - rhs) / s);
      }
      return negated ? Scalar(1.0) - v : v;
    }
    case OracleMode::ROBUSTNESS:
      v = pred == Predicate::LE ? rhs - lhs : abs(lhs - rhs);
      return negated ? -v : v;
  }
  return v;
}

double dl2_atom(const Atom& a, const Env& env, double xi);
double atom_oracle_eval(const Atom& a, const Env& env, const AtomOracle& oracle);

/// Conjunction of M >= 2 conjunct values. DL2 and the t-norms fold left over
/// the binary operator; STL uses the M-ary operator directly.
template <typename Scalar>
Scalar conjoin(SemanticsId s, const Vector<Scalar>& values, const SemanticsParams& prm) {
  if (values.size() < 2) throw DomainError("conjunction needs at least 2 operands");
  if (s == SemanticsId::STL) return stl_and(values, prm.nu, prm.stl_variant);
  Scalar acc = values[0];
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    switch (s) {
      case SemanticsId::DL2:
        acc = dl2_and(acc, values[i]);
        break;
      case SemanticsId::GOEDEL:
        acc = goedel_and(acc, values[i]);
        break;
      case SemanticsId::LUKASIEWICZ:
        acc = lukasiewicz_and(acc, values[i]);
        break;
      case SemanticsId::YAGER:
        acc = yager_and(acc, values[i], prm.p);
        break;
      case SemanticsId::PRODUCT:
        acc = product_and(acc, values[i]);
        break;
      case SemanticsId::STL:
        break;
    }
  }
  return acc;
}

template <typename Scalar>
Scalar negate(SemanticsId s, const Scalar& v) {
  if (s == SemanticsId::STL) return stl_not(v);
  if (is_fuzzy(s)) return fuzzy_not(v);
  throw NnfUnsupported("DL2 has no negation for compound formulas");
}

/// A formula bound to one semantics, its parameters and atom oracle.
class CompiledLoss {
 public:
  SemanticsId semantics() const { return semantics_; }
  const SemanticsParams& params() const { return params_; }
  const AtomOracle& oracle() const { return oracle_; }
  /// The translated formula: in negation normal form for DL2, as given otherwise.
  const Formula& root() const { return root_; }
  /// Free variables in sorted order; the order of points passed to evaluate().
  const std::vector<std::string>& variables() const { return variables_; }

  template <typename Scalar>
  Scalar evaluate(std::span<const Scalar> point) const;

  std::vector<double> point_from(const Env& env) const;

 private:
  friend CompiledLoss compile(const Formula&, SemanticsId, const SemanticsParams&, const AtomOracle&);

  template <typename Scalar>
  Scalar term_value(const Term& t, std::span<const Scalar> point) const;
  template <typename Scalar>
  Scalar eval_node(const Formula& f, std::span<const Scalar> point) const;

  SemanticsId semantics_ = SemanticsId::DL2;
  SemanticsParams params_;
  AtomOracle oracle_;
  Formula root_ = Formula::atom(Predicate::LE, Term::constant(0), Term::constant(0));
  std::vector<std::string> variables_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Throws NnfUnsupported for a DL2 formula with a negated conjunction,
/// OracleMismatch when the oracle mode does not suit the semantics, and
/// DomainError for out-of-range parameters.
CompiledLoss compile(const Formula& f, SemanticsId s, const SemanticsParams& prm,
                     const AtomOracle& oracle);

/// Compile with the semantics' default oracle.
CompiledLoss compile(const Formula& f, SemanticsId s, const SemanticsParams& prm = {});

double eval_loss(const CompiledLoss& loss, const Env& env);

// ---------------------------------------------------------------------------

template <typename Scalar>
Scalar CompiledLoss::term_value(const Term& t, std::span<const Scalar> point) const {
  if (!t.is_variable()) return Scalar(t.constant_value());
  return point[index_.at(t.name())];
}

template <typename Scalar>
Scalar CompiledLoss::eval_node(const Formula& f, std::span<const Scalar> point) const {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const Atom& a = f.as_atom();
      Scalar l = term_value(a.lhs, point);
      Scalar r = term_value(a.rhs, point);
      if (semantics_ == SemanticsId::DL2) return dl2_atom(a.predicate, a.negated, l, r, params_.xi);
      return oracle_atom(a.predicate, a.negated, l, r, oracle_);
    }
    case Formula::Kind::Neg:
      return negate(semantics_, eval_node(f.negated_child(), point));
    case Formula::Kind::Conj: {
      const Conjunction& c = f.as_conj();
      Vector<Scalar> values(static_cast<Eigen::Index>(c.children.size()));
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        values[static_cast<Eigen::Index>(i)] = eval_node(c.children[i], point);
      }
      Scalar v = conjoin(semantics_, values, params_);
      return c.negated ? negate(semantics_, v) : v;
    }
  }
  return Scalar(0.0);
}

template <typename Scalar>
Scalar CompiledLoss::evaluate(std::span<const Scalar> point) const {
  if (point.size() != variables_.size()) {
    throw DomainError("expected " + std::to_string(variables_.size()) + " variable values, got " +
                      std::to_string(point.size()));
  }
  Scalar v = eval_node(root_, point);
  if (!is_finite(v)) throw ArithmeticError("loss evaluated to a non-finite value");
  return v;
}

}  // namespace dlc
