#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kgmas/triple_store.hpp"
#include "kgmas/turtle.hpp"
#include "support.hpp"

using namespace kgmas;
using kgmas::testing::Rng;

namespace {

const Iri g{"http://kgmas.example/graph/test"};

std::pair<std::size_t, std::size_t> error_position(std::string_view text) {
  try {
    parse_turtle(text);
  } catch (const ParseError& e) {
    return {e.line(), e.column()};
  }
  FAIL("expected a parse error");
  return {0, 0};
}

}  // namespace

TEST_CASE("prefixed names, full iris and typed literals") {
  const auto triples = parse_turtle(
      "@prefix kgmas: <http://kgmas.example/vocab#> .\n"
      "@prefix ex: <http://ex.example/> .\n"
      "# comment line\n"
      "kgmas:A ex:p <http://full.example/o> .  # trailing comment\n"
      "kgmas:A kgmas:n \"3\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
      "kgmas:A kgmas:s \"say \\\"hi\\\"\\n\" .\n");
  REQUIRE(triples.size() == 3);
  CHECK(triples[0] == Triple{vocab("A"), iri("http://ex.example/p"), iri("http://full.example/o")});
  CHECK(triples[1].object == integer_literal(3));
  CHECK(triples[2].object == literal("say \"hi\"\n"));
}

TEST_CASE("writer output is canonical: prefixes then sorted statements") {
  const std::vector<Triple> triples = {{vocab("b"), vocab("p"), literal("x")},
                                       {vocab("a"), vocab("p"), iri("http://other.example/1")},
                                       {vocab("a"), vocab("p"), iri("http://other.example/1")}};
  const auto text = write_turtle(triples);
  CHECK(text ==
        "@prefix kgmas: <http://kgmas.example/vocab#> .\n"
        "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
        "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"
        "kgmas:a kgmas:p <http://other.example/1> .\n"
        "kgmas:b kgmas:p \"x\" .\n");
}

TEST_CASE("local names that are not valid prefixed names fall back to full iris") {
  const std::vector<Triple> triples = {{iri("http://kgmas.example/vocab#1abc"), vocab("p"), vocab("o")}};
  const auto text = write_turtle(triples);
  CHECK(text.find("<http://kgmas.example/vocab#1abc>") != std::string::npos);
  CHECK(parse_turtle(text) == triples);
}

TEST_CASE("parse errors carry line and column") {
  CHECK(error_position("@prefix kgmas: <http://kgmas.example/vocab#> .\nkgmas:a kgmas:b kgmas:c\n") ==
        std::pair<std::size_t, std::size_t>{3, 1});
  CHECK(error_position("unknown:a <http://x.example/p> <http://x.example/o> .") ==
        std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(error_position("<http://x.example/s> <http://x.example/p> \"a\" ; .").first == 1);
  CHECK_THROWS_AS(parse_turtle("<http://x.example/s> <http://x.example/p> \"a\"@en ."), ParseError);
  CHECK_THROWS_AS(parse_turtle("_:b <http://x.example/p> \"a\" ."), ParseError);
  CHECK_THROWS_AS(parse_turtle("\"lit\" <http://x.example/p> \"a\" ."), ParseError);
}

TEST_CASE("a failed load leaves the store untouched") {
  TripleStore store;
  store.load_turtle(g, "<http://x.example/s> <http://x.example/p> \"a\" .\n");
  const auto revision = store.revision();
  CHECK_THROWS_AS(store.load_turtle(g, "<http://x.example/s> <http://x.example/p> \"b\" .\n<oops"), ParseError);
  CHECK(store.revision() == revision);
  CHECK(store.size(g) == 1);
}

TEST_CASE("load counts distinct triples") {
  TripleStore store;
  CHECK(store.load_turtle(g, "<http://x.example/s> <http://x.example/p> \"a\" .\n"
                             "<http://x.example/s> <http://x.example/p> \"a\" .\n") == 1);
}

TEST_CASE("the fixture setup graph parses") {
  const auto triples = parse_turtle(testing::read_text(testing::fixture_path("warehouse_setup.ttl")));
  CHECK(triples.size() > 40);
}

TEST_CASE("property: dump then load is the identity on random graphs") {
  Rng rng(3);
  for (int round = 0; round < 100; ++round) {
    const auto graph = testing::random_graph(rng, 80);
    TripleStore a;
    a.atomic_update(g, {}, graph);
    const auto text = a.dump_turtle(g);
    TripleStore b;
    b.load_turtle(g, text);
    CHECK(b.snapshot().graph(g) == a.snapshot().graph(g));
    CHECK(b.dump_turtle(g) == text);
  }
}
