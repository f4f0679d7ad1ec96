#include "dlc/semantics.hpp"

#include <algorithm>

namespace dlc {

namespace {

struct Named {
  std::string_view name;
  SemanticsId id;
};

constexpr std::array<Named, 6> kSemanticsNames = {{
    {"dl2", SemanticsId::DL2},
    {"goedel", SemanticsId::GOEDEL},
    {"lukasiewicz", SemanticsId::LUKASIEWICZ},
    {"yager", SemanticsId::YAGER},
    {"product", SemanticsId::PRODUCT},
    {"stl", SemanticsId::STL},
}};

double term_at(const Term& t, const Env& env) {
  return t.is_variable() ? env.at(t.name()) : t.constant_value();
}

}  // namespace

std::string_view to_string(SemanticsId s) {
  for (const auto& n : kSemanticsNames) {
    if (n.id == s) return n.name;
  }
  return "?";
}

std::optional<SemanticsId> semantics_from_string(std::string_view name) {
  for (const auto& n : kSemanticsNames) {
    if (n.name == name) return n.id;
  }
  return std::nullopt;
}

std::string_view to_string(OracleMode m) {
  switch (m) {
    case OracleMode::CRISP:
      return "crisp";
    case OracleMode::GRADED:
      return "graded";
    case OracleMode::ROBUSTNESS:
      return "robustness";
  }
  return "?";
}

std::optional<OracleMode> oracle_from_string(std::string_view name) {
  if (name == "crisp") return OracleMode::CRISP;
  if (name == "graded") return OracleMode::GRADED;
  if (name == "robustness") return OracleMode::ROBUSTNESS;
  return std::nullopt;
}

void SemanticsParams::validate() const {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("xi must be > 0");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be >= 1");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be > 0");
}

DomainSpec domain_of(SemanticsId s) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (s == SemanticsId::DL2) return {0.0, inf, DomainSpec::TrueRegion::Equals, 0.0};
  if (s == SemanticsId::STL) return {-inf, inf, DomainSpec::TrueRegion::GreaterThan, 0.0};
  return {0.0, 1.0, DomainSpec::TrueRegion::Equals, 1.0};
}

bool domain_true(SemanticsId s, double v) {
  DomainSpec d = domain_of(s);
  return d.true_region == DomainSpec::TrueRegion::Equals ? v == d.threshold : v > d.threshold;
}

AtomOracle default_oracle(SemanticsId s) {
  return {s == SemanticsId::STL ? OracleMode::ROBUSTNESS : OracleMode::CRISP, 1.0};
}

double dl2_atom(const Atom& a, const Env& env, double xi) {
  return dl2_atom(a.predicate, a.negated, term_at(a.lhs, env), term_at(a.rhs, env), xi);
}

double atom_oracle_eval(const Atom& a, const Env& env, const AtomOracle& oracle) {
  return oracle_atom(a.predicate, a.negated, term_at(a.lhs, env), term_at(a.rhs, env), oracle);
}

CompiledLoss compile(const Formula& f, SemanticsId s, const SemanticsParams& prm,
                     const AtomOracle& oracle) {
  prm.validate();
  if (oracle.mode == OracleMode::GRADED && !(oracle.scale > 0.0 && std::isfinite(oracle.scale))) {
    throw DomainError("graded oracle scale must be > 0");
  }

  CompiledLoss loss;
  loss.semantics_ = s;
  loss.params_ = prm;
  loss.oracle_ = oracle;

  if (s == SemanticsId::DL2) {
    Formula nnf = to_nnf(f);
    if (has_negated_conjunction(nnf)) {
      throw NnfUnsupported("DL2 cannot translate the negation of a conjunction: " + pretty_print(f));
    }
    loss.root_ = nnf;
  } else {
    if (is_fuzzy(s) && oracle.mode == OracleMode::ROBUSTNESS) {
      throw OracleMismatch(std::string(to_string(s)) + " needs a crisp or graded oracle");
    }
    if (s == SemanticsId::STL && oracle.mode != OracleMode::ROBUSTNESS) {
      throw OracleMismatch("stl needs the robustness oracle");
    }
    loss.root_ = f;
  }

  std::set<std::string> vars = free_vars(f);
  loss.variables_.assign(vars.begin(), vars.end());
  for (std::size_t i = 0; i < loss.variables_.size(); ++i) loss.index_[loss.variables_[i]] = i;
  return loss;
}

CompiledLoss compile(const Formula& f, SemanticsId s, const SemanticsParams& prm) {
  return compile(f, s, prm, default_oracle(s));
}

std::vector<double> CompiledLoss::point_from(const Env& env) const {
  std::vector<double> point;
  point.reserve(variables_.size());
  for (const auto& name : variables_) point.push_back(env.at(name));
  return point;
}

double eval_loss(const CompiledLoss& loss, const Env& env) {
  std::vector<double> point = loss.point_from(env);
  return loss.evaluate<double>(point);
}

}  // namespace dlc
