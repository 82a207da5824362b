#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kgmas/agent.hpp"
#include "kgmas/rami_model.hpp"
#include "kgmas/vocabulary.hpp"
#include "support.hpp"

using namespace kgmas;
using kgmas::testing::Rng;

namespace {

const Iri setup = vocabulary::setup_graph();

Snapshot load(const std::string& turtle) {
  TripleStore store;
  store.load_turtle(setup, turtle);
  return store.snapshot();
}

Snapshot fixture(const std::string& name) { return load(testing::read_text(testing::fixture_path(name))); }

std::set<std::string> rules(const ValidationReport& report) {
  std::set<std::string> out;
  for (const auto& v : report.violations) out.insert(v.rule);
  return out;
}

// The fixture with every line mentioning `needle` removed.
std::string fixture_without(const std::string& needle) {
  std::istringstream in(testing::read_text(testing::fixture_path("warehouse_setup.ttl")));
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.find(needle) == std::string::npos) out += line + "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("the fixture setup validates") {
  const auto s = fixture("warehouse_setup.ttl");
  CHECK(validate_setup(s, setup).ok());
  CHECK(list_assets(s, setup) == std::vector<Iri>{vocab("RoboticArm").iri(), vocab("Turtlebot").iri()});
}

TEST_CASE("blueprint joins every layer of an asset") {
  const auto bp = extract_blueprint(fixture("warehouse_setup.ttl"), setup, vocab("Turtlebot").iri());
  CHECK(bp.asset_kind == vocab("Mobile_Robot").iri());
  CHECK(bp.realm == Realm::physical);
  CHECK(bp.binding == CommunicationBinding{"ros+ws", "localhost:9090"});
  REQUIRE(bp.channels.size() == 2);
  REQUIRE(bp.command_channel());
  CHECK(bp.command_channel()->topic == "/cmd_vel");
  CHECK(bp.command_channel()->message_kind == vocab("Twist").iri());
  REQUIRE(bp.state_channel());
  CHECK(bp.state_channel()->topic == "/odom");
  CHECK(bp.capabilities == std::vector<Iri>{vocab("MotionControl").iri()});
  CHECK(bp.has_capability(vocab("MotionControl").iri()));
  CHECK_FALSE(bp.has_capability(vocab("GripperControl").iri()));
  CHECK(bp.system_id == vocab("WarehouseSystem").iri());
  CHECK(bp.coordination_role == vocab("mover").iri());
}

TEST_CASE("extracting a missing asset or layer fails") {
  CHECK_THROWS_AS(extract_blueprint(fixture("warehouse_setup.ttl"), setup, vocab("Nobody").iri()), NotFoundError);
  const auto s = load(fixture_without("Turtlebot kgmas:hasProtocol"));
  try {
    extract_blueprint(s, setup, vocab("Turtlebot").iri());
    FAIL("expected IncompleteBlueprintError");
  } catch (const IncompleteBlueprintError& e) {
    CHECK(e.layer() == "Communication");
  }
}

TEST_CASE("each layer rule reports its violation") {
  CHECK(rules(validate_setup(load(fixture_without("Turtlebot kgmas:hasRealm")), setup)).contains("realm-required"));
  CHECK(rules(validate_setup(load(fixture_without("Turtlebot kgmas:hasProtocol")), setup)).contains("protocol-required"));
  CHECK(rules(validate_setup(load(fixture_without("Turtlebot kgmas:hasEndpoint")), setup)).contains("endpoint-required"));
  CHECK(rules(validate_setup(load(fixture_without("Turtlebot kgmas:subscribesTo")), setup))
            .contains("information-subscribes-required"));
  CHECK(rules(validate_setup(load(fixture_without("Turtlebot kgmas:hasCapability")), setup)).contains("capability-required"));
  CHECK(rules(validate_setup(load(fixture_without("aggregates kgmas:Turtlebot")), setup)).contains("system-membership"));
  CHECK(rules(validate_setup(load(fixture_without("Turtlebot kgmas:hasCoordinationRole")), setup)).contains("role-required"));
  CHECK(rules(validate_setup(load(fixture_without("TurtlebotOdom kgmas:hasTopic")), setup)).contains("channel-topic-required"));

  const auto extra = testing::read_text(testing::fixture_path("warehouse_setup.ttl")) +
                     "kgmas:Turtlebot kgmas:hasProtocol \"mqtt\" .\n"
                     "kgmas:RoboticArm kgmas:hasRealm kgmas:imaginary .\n"
                     "kgmas:OtherSystem kgmas:aggregates kgmas:RoboticArm .\n";
  const auto r = rules(validate_setup(load(extra), setup));
  CHECK(r.contains("protocol-unique"));
  CHECK(r.contains("realm-unique"));
  CHECK(r.contains("system-membership"));
}

TEST_CASE("unregistered schemes are rejected unless made known") {
  auto text = testing::read_text(testing::fixture_path("warehouse_setup.ttl"));
  text.replace(text.find("\"ros+ws\""), 8, "\"zenoh\"");
  const auto s = load(text);
  CHECK(rules(validate_setup(s, setup)).contains("protocol-recognized"));
  CHECK(validate_setup(s, setup, {"zenoh", "ros+ws"}).ok());
}

TEST_CASE("generation yields one agent per asset") {
  const auto specs = generate_agents(fixture("warehouse_setup.ttl"), setup);
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].agent_id == "roboticarm");
  CHECK(specs[0].behavior == vocab("placer").iri());
  CHECK(specs[1].agent_id == "turtlebot");
  CHECK(specs[1].behavior == vocab("mover").iri());
  const auto bindings = role_bindings(specs);
  CHECK(bindings.at(vocab("mover").iri()) == "turtlebot");
  CHECK(bindings.at(vocab("kg").iri()) == "kg");
}

TEST_CASE("generation refuses an invalid setup with its report") {
  try {
    generate_agents(load(fixture_without("Turtlebot kgmas:hasRealm")), setup);
    FAIL("expected GenerationError");
  } catch (const GenerationError& e) {
    CHECK(rules(e.report()).contains("realm-required"));
  }
}

TEST_CASE("agent id clashes are rejected") {
  const auto text = testing::read_text(testing::fixture_path("warehouse_setup.ttl"));
  auto clash = text;
  for (std::size_t at; (at = clash.find("kgmas:RoboticArm")) != std::string::npos;) clash.replace(at, 16, "kgmas:TURTLEBOT");
  CHECK_THROWS_AS(generate_agents(load(clash), setup), DuplicateError);
}

TEST_CASE("adding an asset to the fixture adds exactly one agent") {
  const auto base = generate_agents(fixture("warehouse_setup.ttl"), setup);
  const auto extended = generate_agents(fixture("warehouse_setup_extended.ttl"), setup);
  CHECK(extended.size() == base.size() + 1);
  for (const auto& spec : base) CHECK(std::find(extended.begin(), extended.end(), spec) != extended.end());
}

TEST_CASE("property: k random valid assets give k agents") {
  Rng rng(21);
  for (int round = 0; round < 50; ++round) {
    const int k = std::uniform_int_distribution<int>(0, 10)(rng);
    const auto s = load(testing::random_setup(rng, k));
    INFO("k = " << k);
    CHECK(validate_setup(s, setup).ok());
    const auto specs = generate_agents(s, setup);
    CHECK(specs.size() == static_cast<std::size_t>(k));
  }
}

TEST_CASE("property: spec json round-trips") {
  Rng rng(5);
  for (int round = 0; round < 20; ++round) {
    for (const auto& spec : generate_agents(load(testing::random_setup(rng, 4)), setup)) {
      CHECK(spec_from_json(Json::parse(to_json(spec).dump())) == spec);
    }
  }
  CHECK_THROWS_AS(spec_from_json(Json::parse(R"({"agent_id": 3})")), ValidationError);
}
