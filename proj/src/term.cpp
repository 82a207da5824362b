#include "kgmas/term.hpp"

#include "kgmas/error.hpp"

namespace kgmas {

const std::string& Term::text() const {
  return std::visit(
      [](const auto& v) -> const std::string& {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Iri>) return v.value;
        else if constexpr (std::is_same_v<T, Literal>) return v.lexical;
        else return v.name;
      },
      value_);
}

std::string Term::to_string() const {
  if (is_iri()) return "<" + iri().value + ">";
  if (is_variable()) return "?" + variable().name;
  std::string out = "\"" + literal().lexical + "\"";
  if (!literal().datatype.empty()) out += "^^<" + literal().datatype + ">";
  return out;
}

Term iri(std::string value) { return Term(Iri{std::move(value)}); }

Term vocab(std::string_view local) {
  return Term(Iri{std::string(kVocabNamespace) + std::string(local)});
}

Term literal(std::string lexical, std::string datatype) {
  return Term(Literal{std::move(lexical), std::move(datatype)});
}

Term integer_literal(long long value) {
  return literal(std::to_string(value), std::string(kXsdNamespace) + "integer");
}

Term var(std::string name) { return Term(Variable{std::move(name)}); }

std::string local_name(std::string_view iri_text) {
  const auto pos = iri_text.find_last_of("#/");
  if (pos == std::string_view::npos) return std::string(iri_text);
  return std::string(iri_text.substr(pos + 1));
}

void validate_iri(std::string_view text) {
  if (text.empty()) throw ValidationError("empty IRI");
  for (unsigned char c : text) {
    if (c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
        c == '^' || c == '`' || c == '\\') {
      throw ValidationError("invalid character in IRI <" + std::string(text) + ">");
    }
  }
}

void validate_triple(const Triple& t) {
  if (!t.subject.is_iri()) throw ValidationError("triple subject must be an IRI: " + t.subject.to_string());
  if (!t.predicate.is_iri()) {
    throw ValidationError("triple predicate must be an IRI: " + t.predicate.to_string());
  }
  if (t.object.is_variable()) throw ValidationError("triple object must be ground: " + t.object.to_string());
  validate_iri(t.subject.iri().value);
  validate_iri(t.predicate.iri().value);
  if (t.object.is_iri()) validate_iri(t.object.iri().value);
  if (t.object.is_literal() && !t.object.literal().datatype.empty()) validate_iri(t.object.literal().datatype);
}

}  // namespace kgmas
