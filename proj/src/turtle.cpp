#include "kgmas/turtle.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

#include "kgmas/error.hpp"

namespace kgmas {
namespace {

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<Triple> run() {
    std::vector<Triple> out;
    while (true) {
      skip_space();
      if (at_end()) break;
      if (peek() == '@') {
        parse_prefix();
        continue;
      }
      const auto line = line_;
      const auto col = col_;
      Triple t{parse_term(), {}, {}};
      skip_space();
      t.predicate = parse_term();
      skip_space();
      t.object = parse_term();
      skip_space();
      expect('.');
      if (!t.subject.is_iri()) fail_at("subject must be an IRI", line, col);
      if (!t.predicate.is_iri()) fail_at("predicate must be an IRI", line, col);
      try {
        validate_triple(t);
      } catch (const ValidationError& e) {
        fail_at(e.what(), line, col);
      }
      out.push_back(std::move(t));
    }
    return out;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t line, std::size_t col) const {
    throw ParseError(what, line, col);
  }

  void skip_space() {
    while (!at_end()) {
      const char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (at_end()) fail(std::string("expected '") + c + "' but reached end of input");
    if (peek() != c) fail(std::string("expected '") + c + "' but found '" + peek() + "'");
    advance();
  }

  void parse_prefix() {
    const std::string keyword = "@prefix";
    if (text_.substr(pos_, keyword.size()) != keyword) fail("unknown directive");
    for (std::size_t i = 0; i < keyword.size(); ++i) advance();
    skip_space();
    std::string name;
    while (!at_end() && is_name_char(peek())) name += advance();
    expect(':');
    skip_space();
    const std::string target = parse_iri_ref();
    skip_space();
    expect('.');
    prefixes_[name] = target;
  }

  std::string parse_iri_ref() {
    const auto line = line_;
    const auto col = col_;
    expect('<');
    std::string value;
    while (!at_end() && peek() != '>') {
      if (peek() == '\n') fail("unterminated IRI");
      value += advance();
    }
    expect('>');
    try {
      validate_iri(value);
    } catch (const ValidationError& e) {
      fail_at(e.what(), line, col);
    }
    return value;
  }

  std::string parse_prefixed_name() {
    const auto line = line_;
    const auto col = col_;
    std::string prefix;
    while (!at_end() && is_name_char(peek())) prefix += advance();
    if (at_end() || peek() != ':') fail_at("expected a term", line, col);
    advance();
    std::string local;
    while (!at_end() && is_name_char(peek())) local += advance();
    const auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) fail_at("undeclared prefix '" + prefix + ":'", line, col);
    return it->second + local;
  }

  std::string parse_string() {
    expect('"');
    std::string value;
    while (true) {
      if (at_end()) fail("unterminated string literal");
      const char c = advance();
      if (c == '"') break;
      if (c == '\n') fail("newline inside string literal");
      if (c != '\\') {
        value += c;
        continue;
      }
      if (at_end()) fail("unterminated escape");
      switch (advance()) {
        case 'n': value += '\n'; break;
        case 'r': value += '\r'; break;
        case 't': value += '\t'; break;
        case '"': value += '"'; break;
        case '\\': value += '\\'; break;
        default: fail("unsupported escape sequence");
      }
    }
    return value;
  }

  Term parse_term() {
    if (at_end()) fail("unexpected end of input");
    const char c = peek();
    if (c == '<') return iri(parse_iri_ref());
    if (c == '"') {
      std::string lexical = parse_string();
      std::string datatype;
      if (!at_end() && peek() == '^') {
        advance();
        expect('^');
        datatype = (!at_end() && peek() == '<') ? parse_iri_ref() : parse_prefixed_name();
      }
      return literal(std::move(lexical), std::move(datatype));
    }
    if (c == '_') fail("blank nodes are not supported");
    if (is_name_char(c) || c == ':') return iri(parse_prefixed_name());
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::map<std::string, std::string> prefixes_;
};

struct PrefixDecl {
  std::string_view name;
  std::string_view ns;
};

constexpr PrefixDecl kPrefixes[] = {
    {"kgmas", kVocabNamespace},
    {"rdf", kRdfNamespace},
    {"xsd", kXsdNamespace},
};

std::string compact_iri(const std::string& value) {
  for (const auto& p : kPrefixes) {
    if (value.size() <= p.ns.size() || value.compare(0, p.ns.size(), p.ns) != 0) continue;
    const std::string_view local(value.data() + p.ns.size(), value.size() - p.ns.size());
    if (is_name_start(local.front()) && std::all_of(local.begin(), local.end(), is_name_char)) {
      return std::string(p.name) + ":" + std::string(local);
    }
  }
  return "<" + value + ">";
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render(const Term& t) {
  if (t.is_iri()) return compact_iri(t.iri().value);
  std::string out = "\"" + escape(t.literal().lexical) + "\"";
  if (!t.literal().datatype.empty()) out += "^^" + compact_iri(t.literal().datatype);
  return out;
}

}  // namespace

std::vector<Triple> parse_turtle(std::string_view text) { return Parser(text).run(); }

std::string write_turtle(std::vector<Triple> triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  std::string out;
  for (const auto& p : kPrefixes) {
    out += "@prefix " + std::string(p.name) + ": <" + std::string(p.ns) + "> .\n";
  }
  for (const auto& t : triples) {
    out += render(t.subject) + " " + render(t.predicate) + " " + render(t.object) + " .\n";
  }
  return out;
}

}  // namespace kgmas
