#include "dlc/auditor.hpp"

#include <algorithm>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

#include "dlc/scalar.hpp"
#include "dlc/version.hpp"
#include "digest.hpp"

namespace dlc {

namespace {

using Vec = Vector<double>;

// Rows of the reference table, columns in kAllSemantics order.
struct ExpectedRow {
  PropertyId property;
  std::array<bool, 6> holds;
};

constexpr std::array<ExpectedRow, 6> kExpected = {{
    //                              dl2    goedel lukas. yager  prod.  stl
    {PropertyId::IDEMPOTENT,      {false, true,  false, false, false, true}},
    {PropertyId::COMMUTATIVE,     {true,  true,  true,  true,  true,  true}},
    {PropertyId::SHADOW_LIFTING,  {true,  false, false, false, true,  true}},
    {PropertyId::MIN_MAX_BOUNDED, {false, true,  false, false, true,  true}},
    {PropertyId::SCALE_INVARIANT, {true,  true,  false, false, false, true}},
    {PropertyId::ASSOCIATIVE,     {true,  true,  true,  true,  true,  false}},
}};

std::size_t column(SemanticsId s) {
  return static_cast<std::size_t>(std::find(kAllSemantics.begin(), kAllSemantics.end(), s) -
                                  kAllSemantics.begin());
}

class Sampler {
 public:
  Sampler(std::uint64_t seed, SemanticsId s, PropertyId p, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(p),
                      static_cast<std::uint32_t>(stream)};
    rng_.seed(seq);
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  std::size_t arity() {
    static constexpr std::array<std::size_t, 3> kArities = {2, 3, 5};
    return kArities[std::uniform_int_distribution<std::size_t>(0, 2)(rng_)];
  }

  bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

struct Range {
  double lo;
  double hi;
};

Range conjunct_range(SemanticsId s) {
  if (s == SemanticsId::DL2) return {0.0, 10.0};
  if (s == SemanticsId::STL) return {-10.0, 10.0};
  return {0.0, 1.0};
}

Vec sample_tuple(Sampler& rng, SemanticsId s, std::size_t m) {
  Range r = conjunct_range(s);
  Vec v(static_cast<Eigen::Index>(m));
  for (auto& x : v) x = rng.uniform(r.lo, r.hi);
  return v;
}

// Nonzero conjunct values for the gradient law, kept away from 0 so that a
// legitimately positive partial (e.g. a^(M-1) for the product) stays above
// the gradient tolerance.
double sample_nonzero(Sampler& rng, SemanticsId s) {
  if (is_fuzzy(s)) return rng.uniform(0.05, 0.95);
  double a = rng.uniform(0.01, 10.0);
  if (s == SemanticsId::STL && rng.coin()) a = -a;
  return a;
}

std::vector<double> to_std(const Vec& v) { return {v.begin(), v.end()}; }

Vec from_std(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double conj(SemanticsId s, const Vec& v, const SemanticsParams& prm) { return conjoin<double>(s, v, prm); }

double conj2(SemanticsId s, double a, double b, const SemanticsParams& prm) {
  Vec v(2);
  v << a, b;
  return conjoin<double>(s, v, prm);
}

// --- laws ------------------------------------------------------------------

Witness idempotent_law(SemanticsId s, const Vec& values, const SemanticsParams& prm) {
  Witness w;
  w.values = to_std(values);
  w.lhs = conj(s, values, prm);
  w.rhs = values[0];
  w.violation = std::abs(w.lhs - w.rhs);
  return w;
}

Witness commutative_law(SemanticsId s, const Vec& values, const std::vector<std::size_t>& perm,
                        const SemanticsParams& prm) {
  Vec permuted(values.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    permuted[static_cast<Eigen::Index>(i)] = values[static_cast<Eigen::Index>(perm[i])];
  }
  Witness w;
  w.values = to_std(values);
  w.permutation = perm;
  w.lhs = conj(s, values, prm);
  w.rhs = conj(s, permuted, prm);
  w.violation = std::abs(w.lhs - w.rhs);
  return w;
}

Witness associative_law(SemanticsId s, const Vec& v, const SemanticsParams& prm) {
  Witness w;
  w.values = to_std(v);
  w.lhs = conj2(s, conj2(s, v[0], v[1], prm), v[2], prm);
  w.rhs = conj2(s, v[0], conj2(s, v[1], v[2], prm), prm);
  w.violation = std::abs(w.lhs - w.rhs);
  return w;
}

std::vector<double> partials(SemanticsId s, const Vec& values, const SemanticsParams& prm) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    Vector<Dual<double>> d = values.cast<Dual<double>>();
    d[i].derivative = 1.0;
    out.push_back(conjoin<Dual<double>>(s, d, prm).derivative);
  }
  return out;
}

Witness shadow_lifting_law(SemanticsId s, const Vec& values, double threshold,
                           const SemanticsParams& prm) {
  std::vector<double> g = partials(s, values, prm);
  auto it = std::min_element(g.begin(), g.end());
  Witness w;
  w.values = to_std(values);
  w.index = static_cast<std::size_t>(it - g.begin());
  w.lhs = *it;
  w.rhs = threshold;
  w.violation = threshold - *it;
  return w;
}

Witness min_max_law(SemanticsId s, const Vec& values, const SemanticsParams& prm) {
  Witness w;
  w.values = to_std(values);
  double r = conj(s, values, prm);
  double lo = values.minCoeff();
  double hi = values.maxCoeff();
  w.lhs = r;
  // rhs records the bound that is violated (or the nearer one).
  w.rhs = r < lo ? lo : (r > hi ? hi : (r - lo < hi - r ? lo : hi));
  w.violation = std::max({lo - r, r - hi, 0.0});
  return w;
}

Witness scale_law(SemanticsId s, const Vec& values, double alpha, const SemanticsParams& prm) {
  Witness w;
  w.values = to_std(values);
  w.alpha = alpha;
  w.lhs = alpha * conj(s, values, prm);
  w.rhs = conj(s, (alpha * values).eval(), prm);
  w.violation = std::abs(w.lhs - w.rhs);
  return w;
}

std::vector<std::vector<std::size_t>> permutations_for(Sampler& rng, std::size_t m) {
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out;
  if (m <= 3) {
    while (std::next_permutation(perm.begin(), perm.end())) out.push_back(perm);
    return out;
  }
  for (int k = 0; k < 20; ++k) {
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    out.push_back(perm);
  }
  return out;
}

Witness run_trial(SemanticsId s, PropertyId p, Sampler& rng, double tol, const SemanticsParams& prm) {
  switch (p) {
    case PropertyId::IDEMPOTENT: {
      std::size_t m = rng.arity();
      Range r = conjunct_range(s);
      return idempotent_law(s, Vec::Constant(static_cast<Eigen::Index>(m), rng.uniform(r.lo, r.hi)), prm);
    }
    case PropertyId::COMMUTATIVE: {
      std::size_t m = rng.arity();
      Vec v = sample_tuple(rng, s, m);
      Witness worst;
      for (const auto& perm : permutations_for(rng, m)) {
        Witness w = commutative_law(s, v, perm, prm);
        if (w.violation > worst.violation || worst.permutation.empty()) worst = w;
      }
      return worst;
    }
    case PropertyId::ASSOCIATIVE:
      return associative_law(s, sample_tuple(rng, s, 3), prm);
    case PropertyId::SHADOW_LIFTING: {
      std::size_t m = rng.arity();
      return shadow_lifting_law(s, Vec::Constant(static_cast<Eigen::Index>(m), sample_nonzero(rng, s)),
                                tol, prm);
    }
    case PropertyId::MIN_MAX_BOUNDED:
      return min_max_law(s, sample_tuple(rng, s, rng.arity()), prm);
    case PropertyId::SCALE_INVARIANT: {
      Vec v = sample_tuple(rng, s, rng.arity());
      double alpha_max = 4.0;
      // Keep alpha * a inside [0,1] for the t-norms.
      if (is_fuzzy(s) && v.maxCoeff() > 0.0) alpha_max = std::min(alpha_max, 1.0 / v.maxCoeff());
      double alpha = alpha_max * (1.0 - rng.uniform(0.0, 1.0));
      return scale_law(s, v, alpha, prm);
    }
    case PropertyId::WEAK_SMOOTH_PROBE:
      break;
  }
  throw DomainError("weak smoothness is checked by weak_smoothness_probe");
}

nlohmann::json witness_json(const Witness& w) {
  return {{"values", w.values}, {"permutation", w.permutation}, {"alpha", w.alpha}, {"index", w.index},
          {"lhs", w.lhs},       {"rhs", w.rhs},                 {"violation", w.violation}};
}

}  // namespace

std::string_view to_string(PropertyId p) {
  switch (p) {
    case PropertyId::IDEMPOTENT:
      return "idempotent";
    case PropertyId::COMMUTATIVE:
      return "commutative";
    case PropertyId::ASSOCIATIVE:
      return "associative";
    case PropertyId::SHADOW_LIFTING:
      return "shadow_lifting";
    case PropertyId::MIN_MAX_BOUNDED:
      return "min_max_bounded";
    case PropertyId::SCALE_INVARIANT:
      return "scale_invariant";
    case PropertyId::WEAK_SMOOTH_PROBE:
      return "weak_smooth_probe";
  }
  return "?";
}

std::string_view to_string(Verdict v) {
  return v == Verdict::HOLDS_ON_TRIALS ? "holds_on_trials" : "counterexample";
}

bool expected_holds(SemanticsId s, PropertyId p) {
  for (const auto& row : kExpected) {
    if (row.property == p) return row.holds[column(s)];
  }
  throw DomainError("no expected verdict for " + std::string(to_string(p)));
}

std::string expected_table_hash() {
  std::ostringstream canon;
  for (const auto& row : kExpected) {
    canon << to_string(row.property) << ':';
    for (std::size_t c = 0; c < row.holds.size(); ++c) {
      canon << (c ? "," : "") << to_string(kAllSemantics[c]) << '=' << (row.holds[c] ? "yes" : "no");
    }
    canon << ';';
  }
  std::string text = canon.str();
  return detail::sha256_hex(text.data(), text.size());
}

bool law_broken(PropertyId p, double violation, double tol) {
  // Shadow-lifting: violation = threshold - min partial, broken when the
  // partial does not exceed the threshold.
  if (p == PropertyId::SHADOW_LIFTING) return violation >= 0.0;
  return violation > tol;
}

PropertyVerdict check_property(SemanticsId s, PropertyId p, std::size_t trials, std::uint64_t seed,
                               double tol, const SemanticsParams& prm) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
  prm.validate();

  PropertyVerdict verdict{s, p, Verdict::HOLDS_ON_TRIALS, 0, tol, std::nullopt};
  Sampler rng(seed, s, p);
  for (std::size_t t = 0; t < trials; ++t) {
    Witness w = run_trial(s, p, rng, tol, prm);
    ++verdict.trials;
    if (law_broken(p, w.violation, tol)) {
      verdict.verdict = Verdict::COUNTEREXAMPLE;
      verdict.witness = std::move(w);
      break;
    }
  }
  return verdict;
}

double replay_violation(const PropertyVerdict& v, const SemanticsParams& prm) {
  if (!v.witness) throw DomainError("verdict has no witness to replay");
  const Witness& w = *v.witness;
  Vec values = from_std(w.values);
  switch (v.property) {
    case PropertyId::IDEMPOTENT:
      return idempotent_law(v.semantics, values, prm).violation;
    case PropertyId::COMMUTATIVE:
      return commutative_law(v.semantics, values, w.permutation, prm).violation;
    case PropertyId::ASSOCIATIVE:
      return associative_law(v.semantics, values, prm).violation;
    case PropertyId::SHADOW_LIFTING:
      return shadow_lifting_law(v.semantics, values, v.tolerance, prm).violation;
    case PropertyId::MIN_MAX_BOUNDED:
      return min_max_law(v.semantics, values, prm).violation;
    case PropertyId::SCALE_INVARIANT:
      return scale_law(v.semantics, values, w.alpha, prm).violation;
    case PropertyId::WEAK_SMOOTH_PROBE:
      break;
  }
  throw DomainError("weak smoothness verdicts carry no witness");
}

const PropertyVerdict& AuditMatrix::at(SemanticsId s, PropertyId p) const {
  for (const auto& c : cells) {
    if (c.semantics == s && c.property == p) return c;
  }
  throw DomainError("audit matrix has no cell for " + std::string(to_string(s)) + "/" +
                    std::string(to_string(p)));
}

SmoothnessProbeReport weak_smoothness_probe(SemanticsId s, std::size_t trials, std::uint64_t seed,
                                            const SemanticsParams& prm) {
  constexpr double kTieGap = 1e-3;
  constexpr double kStep = 1e-5;
  constexpr double kAgreement = 1e-6;
  constexpr double kPerturbation = 1e-6;
  constexpr double kStability = 1e-3;

  SmoothnessProbeReport report{s, trials, 0, 0, 0, 0.0};
  Sampler rng(seed, s, PropertyId::WEAK_SMOOTH_PROBE);
  Range r = conjunct_range(s);
  // Stay clear of the domain edges so that x +- h remains admissible.
  if (is_fuzzy(s)) r = {1e-3, 1.0 - 1e-3};

  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t m = rng.arity();
    Vec v(static_cast<Eigen::Index>(m));
    for (auto& x : v) x = rng.uniform(r.lo, r.hi);
    std::vector<double> sorted = to_std(v);
    std::sort(sorted.begin(), sorted.end());
    if (sorted[1] - sorted[0] < kTieGap) {
      ++report.excluded_ties;
      continue;
    }
    ++report.evaluated;

    std::vector<double> g = partials(s, v, prm);
    Vec shifted = v;
    for (auto& x : shifted) x += rng.uniform(-kPerturbation, kPerturbation);
    std::vector<double> g_shifted = partials(s, shifted, prm);

    bool ok = true;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      Vec up = v, down = v;
      up[i] += kStep;
      down[i] -= kStep;
      double fd = (conj(s, up, prm) - conj(s, down, prm)) / (2.0 * kStep);
      double gi = g[static_cast<std::size_t>(i)];
      if (std::abs(gi - fd) > kAgreement * (1.0 + std::abs(gi))) ok = false;
      if (std::abs(gi - g_shifted[static_cast<std::size_t>(i)]) > kStability * (1.0 + std::abs(gi))) {
        ok = false;
      }
    }
    if (ok) ++report.passed;
  }
  report.pass_rate = report.evaluated ? static_cast<double>(report.passed) / report.evaluated : 0.0;
  return report;
}

OffDiagonalReport off_diagonal_shadow_lifting(SemanticsId s, std::size_t trials, std::uint64_t seed,
                                              double grad_tol, const SemanticsParams& prm) {
  OffDiagonalReport report{s, trials, 0, std::nullopt};
  Sampler rng(seed, s, PropertyId::SHADOW_LIFTING, 1);
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t m = rng.arity();
    Vec v(static_cast<Eigen::Index>(m));
    for (auto& x : v) x = sample_nonzero(rng, s);
    Witness w = shadow_lifting_law(s, v, grad_tol, prm);
    if (law_broken(PropertyId::SHADOW_LIFTING, w.violation, grad_tol)) {
      ++report.failures;
      if (!report.first_failure) report.first_failure = std::move(w);
    }
  }
  return report;
}

AuditMatrix audit_all(const AuditConfig& config) {
  config.params.validate();
  AuditMatrix m;
  m.config = config;
  m.low_confidence = config.trials < 10000;

  std::vector<std::future<PropertyVerdict>> cells;
  for (SemanticsId s : kAllSemantics) {
    for (PropertyId p : kTableProperties) {
      double tol = p == PropertyId::SHADOW_LIFTING ? config.grad_tol : config.tol;
      cells.push_back(std::async(std::launch::async, [=] {
        return check_property(s, p, config.trials, config.seed, tol, config.params);
      }));
    }
  }
  std::vector<std::future<OffDiagonalReport>> off;
  std::vector<std::future<SmoothnessProbeReport>> smooth;
  for (SemanticsId s : kAllSemantics) {
    off.push_back(std::async(std::launch::async, [=] {
      return off_diagonal_shadow_lifting(s, config.trials, config.seed, config.grad_tol, config.params);
    }));
    smooth.push_back(std::async(std::launch::async, [=] {
      return weak_smoothness_probe(s, config.trials, config.seed, config.params);
    }));
  }
  for (auto& f : cells) m.cells.push_back(f.get());
  for (auto& f : off) m.off_diagonal.push_back(f.get());
  for (auto& f : smooth) m.smoothness.push_back(f.get());
  return m;
}

std::vector<CellMismatch> compare_to_expected(const AuditMatrix& m) {
  std::vector<CellMismatch> out;
  for (SemanticsId s : kAllSemantics) {
    for (PropertyId p : kTableProperties) {
      bool observed = m.at(s, p).verdict == Verdict::HOLDS_ON_TRIALS;
      bool expected = expected_holds(s, p);
      if (observed != expected) out.push_back({s, p, expected, observed});
    }
  }
  return out;
}

nlohmann::json to_json(const PropertyVerdict& v) {
  bool observed = v.verdict == Verdict::HOLDS_ON_TRIALS;
  nlohmann::json j = {
      {"semantics", to_string(v.semantics)},
      {"property", to_string(v.property)},
      {"verdict", to_string(v.verdict)},
      {"trials", v.trials},
      {"tolerance", v.tolerance},
      {"witness", v.witness ? witness_json(*v.witness) : nlohmann::json(nullptr)},
  };
  if (v.property != PropertyId::WEAK_SMOOTH_PROBE) {
    bool expected = expected_holds(v.semantics, v.property);
    j["expected"] = expected ? "yes" : "no";
    j["observed"] = observed ? "yes" : "no";
    j["match"] = expected == observed;
  }
  return j;
}

nlohmann::json to_json(const AuditMatrix& m) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : m.cells) cells.push_back(to_json(c));

  nlohmann::json off = nlohmann::json::array();
  for (const auto& r : m.off_diagonal) {
    off.push_back({{"semantics", to_string(r.semantics)},
                   {"trials", r.trials},
                   {"failures", r.failures},
                   {"first_failure", r.first_failure ? witness_json(*r.first_failure) : nlohmann::json(nullptr)}});
  }
  nlohmann::json smooth = nlohmann::json::array();
  for (const auto& r : m.smoothness) {
    smooth.push_back({{"semantics", to_string(r.semantics)},
                      {"trials", r.trials},
                      {"evaluated", r.evaluated},
                      {"excluded_ties", r.excluded_ties},
                      {"passed", r.passed},
                      {"pass_rate", r.pass_rate},
                      {"heuristic", true}});
  }

  std::size_t mismatches = compare_to_expected(m).size();
  return {
      {"tool_version", kToolVersion},
      {"expected_table_sha256", expected_table_hash()},
      {"config",
       {{"trials", m.config.trials},
        {"seed", m.config.seed},
        {"tol", m.config.tol},
        {"grad_tol", m.config.grad_tol},
        {"xi", m.config.params.xi},
        {"p", m.config.params.p},
        {"nu", m.config.params.nu},
        {"stl_variant", m.config.params.stl_variant == StlVariant::Smooth ? "smooth" : "literal"}}},
      {"low_confidence", m.low_confidence},
      {"cells", cells},
      {"summary", {{"matched", m.cells.size() - mismatches}, {"total", m.cells.size()}}},
      {"notes",
       {{"scale_invariant",
         "audited for alpha in (0, 4]; the published definition reads 'alpha <= 0', which "
         "contradicts its own table (min turns into max for negative alpha)"},
        {"shadow_lifting",
         "partials evaluated on the diagonal A_1 = ... = A_M != 0 as in the property's original "
         "definition; off_diagonal_shadow_lifting reports the same law at pairwise-distinct points"},
        {"weak_smooth_probe", "numerical heuristic, excluded from the table comparison"}}},
      {"off_diagonal_shadow_lifting", off},
      {"weak_smoothness_probe", smooth},
  };
}

std::string to_csv(const AuditMatrix& m) {
  std::ostringstream out;
  out << "property";
  for (SemanticsId s : kAllSemantics) out << ',' << to_string(s);
  out << '\n';
  for (PropertyId p : kTableProperties) {
    out << to_string(p);
    for (SemanticsId s : kAllSemantics) {
      out << ',' << (m.at(s, p).verdict == Verdict::HOLDS_ON_TRIALS ? "yes" : "no");
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace dlc
