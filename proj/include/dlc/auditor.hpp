#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dlc/semantics.hpp"

namespace dlc {

enum class PropertyId {
  IDEMPOTENT,
  COMMUTATIVE,
  ASSOCIATIVE,
  SHADOW_LIFTING,
  MIN_MAX_BOUNDED,
  SCALE_INVARIANT,
  WEAK_SMOOTH_PROBE,
};

/// The six properties compared against the reference table, in its row order.
inline constexpr std::array<PropertyId, 6> kTableProperties = {
    PropertyId::IDEMPOTENT,      PropertyId::COMMUTATIVE,     PropertyId::SHADOW_LIFTING,
    PropertyId::MIN_MAX_BOUNDED, PropertyId::SCALE_INVARIANT, PropertyId::ASSOCIATIVE};

std::string_view to_string(PropertyId p);

enum class Verdict { HOLDS_ON_TRIALS, COUNTEREXAMPLE };

std::string_view to_string(Verdict v);

/// Inputs and both sides of a law at the point where it failed.
///
/// For SHADOW_LIFTING, `lhs` is the smallest partial derivative (at conjunct
/// `index`) and `rhs` the threshold it had to exceed; `violation` is
/// rhs - lhs. For the algebraic laws `violation` is the distance by which
/// lhs and rhs (or the min/max bounds) disagree.
struct Witness {
  std::vector<double> values;
  std::vector<std::size_t> permutation;
  double alpha = 0.0;
  std::size_t index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;
};

struct PropertyVerdict {
  SemanticsId semantics;
  PropertyId property;
  Verdict verdict = Verdict::HOLDS_ON_TRIALS;
  std::size_t trials = 0;
  double tolerance = 0.0;
  std::optional<Witness> witness;
};

struct AuditConfig {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  double tol = 1e-9;        // algebraic identities
  double grad_tol = 1e-6;   // shadow-lifting partials
  SemanticsParams params;
};

/// Expected verdict from the published property comparison: true = "yes".
bool expected_holds(SemanticsId s, PropertyId p);

/// SHA-256 (hex) of the canonical rendering of the expected table.
std::string expected_table_hash();

/// Randomized check of one law at the connective level. Conjunct tuples are
/// drawn from [0,1]^M (fuzzy), [0,10]^M (DL2) or [-10,10]^M (STL), M in {2,3,5}.
/// Stops at the first violation larger than `tol`. Deterministic in `seed`.
PropertyVerdict check_property(SemanticsId s, PropertyId p, std::size_t trials, std::uint64_t seed,
                               double tol, const SemanticsParams& prm = {});

/// Re-evaluates a witness from its stored inputs and returns the recomputed
/// violation (same convention as Witness::violation).
double replay_violation(const PropertyVerdict& v, const SemanticsParams& prm = {});

/// True when `violation` breaks `p` at tolerance `tol`.
bool law_broken(PropertyId p, double violation, double tol);

/// Heuristic weak-smoothness check: at sampled points with a unique minimal
/// conjunct, compares dual-number and central-difference gradients and checks
/// that the gradient barely moves under 1e-6 perturbations. Not a proof.
struct SmoothnessProbeReport {
  SemanticsId semantics;
  std::size_t trials = 0;
  std::size_t evaluated = 0;
  std::size_t excluded_ties = 0;
  std::size_t passed = 0;
  double pass_rate = 0.0;
};

SmoothnessProbeReport weak_smoothness_probe(SemanticsId s, std::size_t trials, std::uint64_t seed,
                                            const SemanticsParams& prm = {});

/// Shadow-lifting evaluated at pairwise-distinct points instead of the
/// diagonal. Diagnostic only; not part of the table comparison.
struct OffDiagonalReport {
  SemanticsId semantics;
  std::size_t trials = 0;
  std::size_t failures = 0;
  std::optional<Witness> first_failure;
};

OffDiagonalReport off_diagonal_shadow_lifting(SemanticsId s, std::size_t trials, std::uint64_t seed,
                                              double grad_tol, const SemanticsParams& prm = {});

struct AuditMatrix {
  AuditConfig config;
  std::vector<PropertyVerdict> cells;  // semantics-major, kTableProperties order
  // Set when trials < 10^4, below which verdict stability across seeds is not claimed.
  bool low_confidence = false;
  std::vector<OffDiagonalReport> off_diagonal;
  std::vector<SmoothnessProbeReport> smoothness;

  const PropertyVerdict& at(SemanticsId s, PropertyId p) const;
};

/// Fills all 36 table cells plus the off-diagonal and smoothness diagnostics.
/// Cells run concurrently; each is sequential in its own seeded stream, so
/// the result equals a sequential run.
AuditMatrix audit_all(const AuditConfig& config);

struct CellMismatch {
  SemanticsId semantics;
  PropertyId property;
  bool expected;
  bool observed;
};

std::vector<CellMismatch> compare_to_expected(const AuditMatrix& m);

nlohmann::json to_json(const PropertyVerdict& v);
nlohmann::json to_json(const AuditMatrix& m);
std::string to_csv(const AuditMatrix& m);

}  // namespace dlc
