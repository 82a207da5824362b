#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace kgmas {

inline constexpr std::string_view kVocabNamespace = "http://kgmas.example/vocab#";
inline constexpr std::string_view kXsdNamespace = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kRdfNamespace = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

struct Iri {
  std::string value;
  auto operator<=>(const Iri&) const = default;
};

/// Lexical form plus optional datatype IRI (empty when plain).
struct Literal {
  std::string lexical;
  std::string datatype;
  auto operator<=>(const Literal&) const = default;
};

/// Query variable; never stored.
struct Variable {
  std::string name;
  auto operator<=>(const Variable&) const = default;
};

/// Ordering: every Iri sorts before every Literal, which sorts before every
/// Variable; within a kind, lexicographic on the fields.
class Term {
 public:
  Term() = default;
  Term(Iri iri) : value_(std::move(iri)) {}
  Term(Literal literal) : value_(std::move(literal)) {}
  Term(Variable variable) : value_(std::move(variable)) {}

  bool is_iri() const { return std::holds_alternative<Iri>(value_); }
  bool is_literal() const { return std::holds_alternative<Literal>(value_); }
  bool is_variable() const { return std::holds_alternative<Variable>(value_); }

  const Iri& iri() const { return std::get<Iri>(value_); }
  const Literal& literal() const { return std::get<Literal>(value_); }
  const Variable& variable() const { return std::get<Variable>(value_); }

  /// Iri value, literal lexical form, or variable name.
  const std::string& text() const;

  /// N-Triples style rendering, for diagnostics and error messages.
  std::string to_string() const;

  auto operator<=>(const Term&) const = default;

 private:
  std::variant<Iri, Literal, Variable> value_;
};

Term iri(std::string value);
/// Iri in the kgmas vocabulary namespace.
Term vocab(std::string_view local);
Term literal(std::string lexical, std::string datatype = {});
Term integer_literal(long long value);
Term var(std::string name);

/// Portion after the last '#' or '/', or the whole text.
std::string local_name(std::string_view iri_text);

/// Throws ValidationError unless the IRI is non-empty and contains neither
/// whitespace nor the characters Turtle forbids inside <...>.
void validate_iri(std::string_view text);

struct Triple {
  Term subject;
  Term predicate;
  Term object;
  auto operator<=>(const Triple&) const = default;
};

/// Throws ValidationError unless subject/predicate are valid IRIs and the
/// object is a valid IRI or a literal.
void validate_triple(const Triple& t);

/// Triple whose positions may hold Variables.
struct Pattern {
  Term subject;
  Term predicate;
  Term object;
};

using Solution = std::map<std::string, Term>;

}  // namespace kgmas
