#include "dlc/formula.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "dlc/errors.hpp"

namespace dlc {

struct Formula::Node {
  std::variant<Atom, Conjunction, Negation> value;
};

Term Term::variable(std::string name) {
  if (!is_identifier(name)) {
    throw DomainError("invalid variable name '" + name + "'");
  }
  return Term(Variable{std::move(name)});
}

Term Term::constant(double value) {
  if (!std::isfinite(value)) {
    throw DomainError("constants must be finite");
  }
  return Term(value);
}

Formula Formula::atom(Atom a) {
  return Formula(std::make_shared<const Node>(Node{std::move(a)}));
}

Formula Formula::atom(Predicate p, Term lhs, Term rhs) {
  return atom(Atom{p, std::move(lhs), std::move(rhs), false});
}

Formula Formula::conj(std::vector<Formula> children, ConjSpelling spelling, bool negated) {
  if (children.size() < 2) {
    throw DomainError("conjunction needs at least 2 operands, got " +
                      std::to_string(children.size()));
  }
  return Formula(
      std::make_shared<const Node>(Node{Conjunction{std::move(children), spelling, negated}}));
}

Formula Formula::neg(Formula child) {
  return Formula(std::make_shared<const Node>(Node{Negation{std::move(child)}}));
}

Formula::Kind Formula::kind() const {
  return static_cast<Kind>(node_->value.index());
}

const Atom& Formula::as_atom() const { return std::get<Atom>(node_->value); }
const Conjunction& Formula::as_conj() const { return std::get<Conjunction>(node_->value); }
const Formula& Formula::negated_child() const { return std::get<Negation>(node_->value).child; }

std::size_t Formula::depth() const {
  switch (kind()) {
    case Kind::Atom:
      return 1;
    case Kind::Neg:
      return 1 + negated_child().depth();
    case Kind::Conj: {
      std::size_t d = 0;
      for (const auto& c : as_conj().children) d = std::max(d, c.depth());
      return 1 + d;
    }
  }
  return 0;
}

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  switch (kind()) {
    case Kind::Atom:
      return as_atom() == other.as_atom();
    case Kind::Neg:
      return negated_child() == other.negated_child();
    case Kind::Conj: {
      const auto& a = as_conj();
      const auto& b = other.as_conj();
      return a.spelling == b.spelling && a.negated == b.negated && a.children == b.children;
    }
  }
  return false;
}

Env::Env(std::initializer_list<std::pair<const std::string, double>> bindings) {
  for (const auto& [name, value] : bindings) bind(name, value);
}

void Env::bind(const std::string& name, double value) {
  if (!std::isfinite(value)) {
    throw DomainError("value bound to '" + name + "' is not finite");
  }
  bindings_[name] = value;
}

double Env::at(const std::string& name) const {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) throw UnboundVariable(name);
  return it->second;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(s.front())) return false;
  for (char c : s.substr(1)) {
    if (!tail(c)) return false;
  }
  return true;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Formula parse() {
    Formula f = formula();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }

  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(what, line, column);
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string_view identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' ||
                (pos_ > start && c >= '0' && c <= '9');
      if (!ok) break;
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  Formula formula() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ < text_.size() && is_identifier(text_.substr(pos_, 1))) {
      std::string_view name = identifier();
      if (peek('(')) {
        ++pos_;
        return connective(name, start);
      }
      pos_ = start;
    }
    return atom();
  }

  Formula connective(std::string_view name, std::size_t start) {
    if (name == "not") {
      Formula child = formula();
      expect(')');
      return Formula::neg(std::move(child));
    }
    if (name != "and" && name != "andM") {
      fail_at("unknown connective '" + std::string(name) + "'", start);
    }
    std::vector<Formula> children;
    children.push_back(formula());
    while (peek(',')) {
      ++pos_;
      children.push_back(formula());
    }
    expect(')');
    if (children.size() < 2) {
      fail_at(std::string(name) + " needs at least 2 operands", start);
    }
    if (name == "and") {
      if (children.size() != 2) {
        fail_at("and takes exactly 2 operands; use andM for more", start);
      }
      return Formula::conj(std::move(children), ConjSpelling::Binary);
    }
    return Formula::conj(std::move(children), ConjSpelling::NAry);
  }

  Formula atom() {
    Term lhs = term();
    skip_space();
    std::size_t at = pos_;
    Predicate p;
    if (text_.substr(pos_, 2) == "<=") {
      p = Predicate::LE;
    } else if (text_.substr(pos_, 2) == "!=") {
      p = Predicate::NEQ;
    } else {
      std::size_t end = pos_;
      while (end < text_.size() && std::string_view("<>=!~").find(text_[end]) != std::string_view::npos) {
        ++end;
      }
      if (end == pos_) fail("expected predicate '<=' or '!='");
      fail_at("unknown predicate '" + std::string(text_.substr(pos_, end - pos_)) + "'", at);
    }
    pos_ += 2;
    Term rhs = term();
    return Formula::atom(p, std::move(lhs), std::move(rhs));
  }

  Term term() {
    skip_space();
    if (pos_ >= text_.size()) fail("expected a term");
    char c = text_[pos_];
    if (is_identifier(std::string_view(&c, 1))) {
      return Term::variable(std::string(identifier()));
    }
    return Term::constant(number());
  }

  double number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        ++pos_;
        ++n;
      }
      return n;
    };
    if (text_[pos_] == '+' || text_[pos_] == '-') ++pos_;
    std::size_t int_digits = digits();
    std::size_t frac_digits = 0;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      frac_digits = digits();
    }
    if (int_digits + frac_digits == 0) fail_at("expected a term", start);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent");
    }
    std::string_view lexeme = text_.substr(start, pos_ - start);
    if (lexeme.front() == '+') lexeme.remove_prefix(1);
    double value = 0.0;
    auto [end, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
    if (ec != std::errc() || end != lexeme.data() + lexeme.size() || !std::isfinite(value)) {
      fail_at("number out of range", start);
    }
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const Atom& a = f.as_atom();
      if (a.negated) out += "not(";
      out += to_string(a.lhs);
      out += a.predicate == Predicate::LE ? " <= " : " != ";
      out += to_string(a.rhs);
      if (a.negated) out += ")";
      return;
    }
    case Formula::Kind::Neg:
      out += "not(";
      print(f.negated_child(), out);
      out += ")";
      return;
    case Formula::Kind::Conj: {
      const Conjunction& c = f.as_conj();
      if (c.negated) out += "not(";
      out += c.spelling == ConjSpelling::Binary ? "and(" : "andM(";
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i) out += ", ";
        print(c.children[i], out);
      }
      out += ")";
      if (c.negated) out += ")";
      return;
    }
  }
}

double term_value(const Term& t, const Env& env) {
  return t.is_variable() ? env.at(t.name()) : t.constant_value();
}

void collect_vars(const Formula& f, std::set<std::string>& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      const Atom& a = f.as_atom();
      if (a.lhs.is_variable()) out.insert(a.lhs.name());
      if (a.rhs.is_variable()) out.insert(a.rhs.name());
      return;
    }
    case Formula::Kind::Neg:
      collect_vars(f.negated_child(), out);
      return;
    case Formula::Kind::Conj:
      for (const auto& c : f.as_conj().children) collect_vars(c, out);
      return;
  }
}

Formula nnf(const Formula& f, bool negate) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      Atom a = f.as_atom();
      a.negated = a.negated != negate;
      return Formula::atom(std::move(a));
    }
    case Formula::Kind::Neg:
      return nnf(f.negated_child(), !negate);
    case Formula::Kind::Conj: {
      const Conjunction& c = f.as_conj();
      std::vector<Formula> children;
      children.reserve(c.children.size());
      for (const auto& child : c.children) children.push_back(nnf(child, false));
      return Formula::conj(std::move(children), c.spelling, c.negated != negate);
    }
  }
  return f;
}

}  // namespace

Formula parse_formula(std::string_view text) { return Parser(text).parse(); }

std::string to_string(const Term& t) {
  if (t.is_variable()) return t.name();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", t.constant_value());
  return buf;
}

std::string pretty_print(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

Formula to_nnf(const Formula& f) { return nnf(f, false); }

bool has_negated_conjunction(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return false;
    case Formula::Kind::Neg:
      return f.negated_child().kind() == Formula::Kind::Conj ||
             has_negated_conjunction(f.negated_child());
    case Formula::Kind::Conj: {
      const Conjunction& c = f.as_conj();
      if (c.negated) return true;
      for (const auto& child : c.children) {
        if (has_negated_conjunction(child)) return true;
      }
      return false;
    }
  }
  return false;
}

bool interpret_bool(const Atom& a, const Env& env) {
  double l = term_value(a.lhs, env);
  double r = term_value(a.rhs, env);
  bool v = a.predicate == Predicate::LE ? l <= r : l != r;
  return v != a.negated;
}

bool interpret_bool(const Formula& f, const Env& env) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return interpret_bool(f.as_atom(), env);
    case Formula::Kind::Neg:
      return !interpret_bool(f.negated_child(), env);
    case Formula::Kind::Conj: {
      const Conjunction& c = f.as_conj();
      // Evaluate every child so an unbound variable is reported regardless of order.
      bool all = true;
      for (const auto& child : c.children) all = interpret_bool(child, env) && all;
      return all != c.negated;
    }
  }
  return false;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  collect_vars(f, out);
  return out;
}

Env parse_env_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("env: ") + e.what(), 1, e.byte);
  }
  if (!j.is_object()) throw ParseError("env: expected a JSON object", 1, 1);
  Env env;
  for (const auto& [name, value] : j.items()) {
    if (!is_identifier(name)) throw ParseError("env: invalid variable name '" + name + "'", 1, 1);
    if (!value.is_number()) throw ParseError("env: value of '" + name + "' is not a number", 1, 1);
    env.bind(name, value.get<double>());
  }
  return env;
}

}  // namespace dlc
