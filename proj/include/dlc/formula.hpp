#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dlc {

struct Variable {
  std::string name;
  bool operator==(const Variable&) const = default;
};

/// A term is a variable or a finite real constant.
class Term {
 public:
  static Term variable(std::string name);
  static Term constant(double value);

  bool is_variable() const { return std::holds_alternative<Variable>(value_); }
  const std::string& name() const { return std::get<Variable>(value_).name; }
  double constant_value() const { return std::get<double>(value_); }

  bool operator==(const Term&) const = default;

 private:
  explicit Term(std::variant<Variable, double> v) : value_(std::move(v)) {}
  std::variant<Variable, double> value_;
};

enum class Predicate { LE, NEQ };

struct Atom {
  Predicate predicate;
  Term lhs;
  Term rhs;
  // Set only by to_nnf.
  bool negated = false;

  bool operator==(const Atom&) const = default;
};

/// `and(a, b)` and `andM(a, ..., z)` build the same node kind; the spelling is
/// kept so that pretty printing reproduces the source.
enum class ConjSpelling { Binary, NAry };

class Formula;

struct Conjunction {
  std::vector<Formula> children;
  ConjSpelling spelling = ConjSpelling::Binary;
  // Set by to_nnf when a negation could not be pushed below this node.
  bool negated = false;
};

struct Negation;

/// Immutable AST of the constraint language. Copies share structure.
class Formula {
 public:
  enum class Kind { Atom, Conj, Neg };

  static Formula atom(Atom a);
  static Formula atom(Predicate p, Term lhs, Term rhs);
  /// Throws DomainError when fewer than two children are given.
  static Formula conj(std::vector<Formula> children, ConjSpelling spelling = ConjSpelling::Binary,
                      bool negated = false);
  static Formula neg(Formula child);

  Kind kind() const;
  const Atom& as_atom() const;
  const Conjunction& as_conj() const;
  const Formula& negated_child() const;

  /// Number of nodes from the root to the deepest leaf (an atom has depth 1).
  std::size_t depth() const;

  bool operator==(const Formula& other) const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

struct Negation {
  Formula child;
};

/// Variable valuation. Every lookup of a missing name throws UnboundVariable.
class Env {
 public:
  Env() = default;
  Env(std::initializer_list<std::pair<const std::string, double>> bindings);

  void bind(const std::string& name, double value);
  double at(const std::string& name) const;
  bool contains(const std::string& name) const { return bindings_.count(name) != 0; }
  const std::map<std::string, double>& bindings() const { return bindings_; }

 private:
  std::map<std::string, double> bindings_;
};

bool is_identifier(std::string_view s);

Formula parse_formula(std::string_view text);
std::string pretty_print(const Formula& f);
std::string to_string(const Term& t);

/// Pushes negation onto atoms and removes double negation. A negation sitting
/// directly above a conjunction is kept as the conjunction's `negated` mark.
Formula to_nnf(const Formula& f);

/// True when some conjunction carries an unresolved negation mark or a raw
/// negation still sits above a conjunction.
bool has_negated_conjunction(const Formula& f);

bool interpret_bool(const Formula& f, const Env& env);
bool interpret_bool(const Atom& a, const Env& env);

std::set<std::string> free_vars(const Formula& f);

/// Parses a JSON object of name -> number.
Env parse_env_json(std::string_view text);

}  // namespace dlc
