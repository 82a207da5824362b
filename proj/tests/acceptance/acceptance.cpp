// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "kgmas/acl.hpp"
#include "kgmas/agent.hpp"
#include "kgmas/cli.hpp"
#include "kgmas/coordination.hpp"
#include "kgmas/rami_model.hpp"
#include "kgmas/system.hpp"
#include "kgmas/triple_store.hpp"
#include "kgmas/vocabulary.hpp"
#include "support.hpp"

using namespace kgmas;
using kgmas::testing::Rng;
namespace fs = std::filesystem;
namespace v = vocabulary;

namespace {

// Criterion body: returns an empty string on success, else the reason.
using Check = std::function<std::string()>;

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;
  Check check;
};

const std::string kSetup = testing::fixture_path("warehouse_setup.ttl");
const std::string kWorld = testing::fixture_path("warehouse_world.json");

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("kgmas_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the fixture scenario through the command line entry point.
int run_scenario(const fs::path& out, const std::vector<std::string>& extra = {}) {
  std::vector<std::string> args = {"run",     "--setup", kSetup,    "--world", kWorld,  "--task", "move_pallet",
                                   "--param", "from=P1", "--param", "to=P2",   "--seed", "0",     "--out",
                                   out.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  std::ostringstream sink_out, sink_err;
  return run_cli(args, sink_out, sink_err);
}

std::string read(const fs::path& p) { return testing::read_text(p.string()); }

// Task node and event node statements of a data graph dump.
std::string task_state(const std::string& dump) {
  std::istringstream in(dump);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("<http://kgmas.example/task/", 0) == 0) out += line + "\n";
  }
  return out;
}

std::string criterion_scenario() {
  const auto dir = scratch("c1");
  if (const int code = run_scenario(dir); code != 0) return "run exited with " + std::to_string(code);

  TripleStore data;
  data.load_turtle(v::data_graph(), read(dir / "data.ttl"));
  const auto placed = data.query(v::data_graph(), {{var("e"), v::eventName(), literal("pallet_placed")}});
  if (placed.size() != 1) return "expected one pallet_placed event, found " + std::to_string(placed.size());
  if (!data.contains(v::data_graph(), {vocab("pallet1"), v::atPosition(), literal("P2")})) return "pallet not at P2";

  TripleStore setup;
  setup.load_turtle(v::setup_graph(), read(kSetup));
  const auto snapshot = setup.snapshot();
  const auto protocol = load_protocol(snapshot, v::setup_graph(), find_protocol(snapshot, v::setup_graph(), "move_pallet"));
  const auto bindings = role_bindings(generate_agents(snapshot, v::setup_graph()));
  const auto trace = parse_trace(read(dir / "trace.tsv"));
  if (project_trace(trace, bindings) != expected_skeleton(protocol)) return "trace projection differs from the protocol";
  if (protocol.size() != 7) return "protocol has " + std::to_string(protocol.size()) + " steps";
  return "";
}

std::string criterion_generation() {
  TripleStore base;
  base.load_turtle(v::setup_graph(), read(kSetup));
  if (const auto n = generate_agents(base.snapshot(), v::setup_graph()).size(); n != 2) {
    return "fixture gave " + std::to_string(n) + " agents";
  }
  Rng rng(2024);
  for (int i = 0; i < 50; ++i) {
    const int k = std::uniform_int_distribution<int>(0, 10)(rng);
    TripleStore store;
    store.load_turtle(v::setup_graph(), testing::random_setup(rng, k));
    const auto n = generate_agents(store.snapshot(), v::setup_graph()).size();
    if (n != static_cast<std::size_t>(k)) return "random setup " + std::to_string(i) + ": " + std::to_string(n) + " != " + std::to_string(k);
  }
  TripleStore extended;
  extended.load_turtle(v::setup_graph(), read(testing::fixture_path("warehouse_setup_extended.ttl")));
  if (const auto n = generate_agents(extended.snapshot(), v::setup_graph()).size(); n != 3) {
    return "extended fixture gave " + std::to_string(n) + " agents";
  }
  return "";
}

std::string criterion_query_oracle() {
  Rng rng(77);
  const Iri g{"http://kgmas.example/graph/acceptance"};
  int queries = 0;
  for (int graph_no = 0; graph_no < 20; ++graph_no) {
    const auto graph = testing::random_graph(rng, 500);
    TripleStore store;
    store.atomic_update(g, {}, graph);
    const int count = graph_no < 10 ? 3 : 2;  // 50 queries in total
    for (int q = 0; q < count; ++q, ++queries) {
      const auto patterns = testing::random_query(rng, graph, 4);
      if (store.query(g, patterns) != testing::nested_loop_query(graph, patterns)) {
        return "query " + std::to_string(queries) + " on graph " + std::to_string(graph_no) + " differs";
      }
    }
  }
  return queries == 50 ? "" : "ran " + std::to_string(queries) + " queries";
}

std::string criterion_round_trips() {
  Rng rng(99);
  const Iri g{"http://kgmas.example/graph/acceptance"};
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    TripleStore a;
    a.atomic_update(g, {}, testing::random_graph(rng, 200));
    TripleStore b;
    b.load_turtle(g, a.dump_turtle(g));
    mismatches += b.snapshot().graph(g) != a.snapshot().graph(g);
  }
  std::vector<AclMessage> messages;
  for (const auto& content : {testing::move_request_content(), testing::placed_report_content()}) {
    AclMessage m;
    m.performative = Performative::inform;
    m.sender = "turtlebot";
    m.receiver = "roboticarm";
    m.conversation_id = "move_pallet-1";
    m.content = content;
    messages.push_back(m);
  }
  while (messages.size() < 1000) messages.push_back(testing::random_message(rng));
  for (const auto& m : messages) mismatches += !(deserialize(serialize(m)) == m);
  return mismatches == 0 ? "" : std::to_string(mismatches) + " mismatches";
}

std::string criterion_transports() {
  const std::vector<std::string> schemes = {"ros+ws", "rest+http", "mqtt"};
  std::string reference;
  for (const auto& mover : schemes) {
    for (const auto& placer : schemes) {
      const auto dir = scratch("c5_" + std::to_string(&mover - schemes.data()) + std::to_string(&placer - schemes.data()));
      const int code = run_scenario(dir, {"--transport-override", "Turtlebot=" + mover, "--transport-override",
                                          "RoboticArm=" + placer});
      if (code != 0) return mover + "/" + placer + " exited with " + std::to_string(code);
      const auto state = task_state(read(dir / "data.ttl"));
      if (state.empty()) return mover + "/" + placer + " left no task state";
      if (reference.empty()) reference = state;
      if (state != reference) return mover + "/" + placer + " task state differs";
    }
  }
  return "";
}

std::string criterion_consistency() {
  Rng rng(5150);
  for (int i = 0; i < 200; ++i) {
    const auto placed = testing::random_placement(rng);
    TripleStore store;
    store.load_turtle(v::data_graph(), testing::placement_turtle(placed));
    std::vector<testing::OracleViolation> got;
    for (const auto& c : check_world_consistency(store.snapshot(), v::data_graph())) {
      got.push_back({c.first.value, c.second.value, c.position, to_string(c.rule)});
    }
    if (got != testing::pairwise_violations(placed)) return "placement " + std::to_string(i) + " differs from the oracle";
  }
  System sys(WarehouseWorld::from_json(Json::parse(read(kWorld))));
  sys.load_setup(read(kSetup));
  sys.start();
  const auto result = sys.run_task("move_pallet", {{"from", "P1"}, {"to", "P2"}});
  if (!result.completed()) return "scenario did not complete";
  if (result.ticks == 0) return "scenario published no ticks";
  if (!result.violations.empty()) return std::to_string(result.violations.size()) + " violations during the scenario";
  return "";
}

std::string criterion_determinism() {
  const auto a = scratch("c7a");
  const auto b = scratch("c7b");
  if (run_scenario(a) != 0 || run_scenario(b) != 0) return "a run failed";
  if (read(a / "trace.tsv") != read(b / "trace.tsv")) return "traces differ";
  if (read(a / "data.ttl") != read(b / "data.ttl")) return "data graph dumps differ";
  return "";
}

std::string criterion_bus_ordering() {
  MessageBus bus;
  bus.register_agent("sink");
  std::vector<std::thread> senders;
  for (int s = 0; s < 4; ++s) {
    const auto id = "sender" + std::to_string(s);
    bus.register_agent(id);
    senders.emplace_back([&bus, id] {
      for (int i = 0; i < 250; ++i) {
        AclMessage m;
        m.sender = id;
        m.receiver = "sink";
        m.conversation_id = id;
        m.content = {{"i", i}};
        bus.send(m);
      }
    });
  }
  std::vector<AclMessage> received;
  while (received.size() < 1000) {
    const auto m = bus.receive("sink", std::chrono::milliseconds(2000));
    if (!m) return "timed out after " + std::to_string(received.size()) + " messages";
    received.push_back(*m);
  }
  for (auto& t : senders) t.join();
  if (bus.receive("sink", std::chrono::milliseconds(0))) return "extra delivery";

  std::map<std::string, int> next;
  for (const auto& m : received) {
    if (m.content.at("i").get<int>() != next[m.sender]++) return "FIFO broken for " + m.sender;
  }
  std::multiset<std::string> got, sent;
  for (const auto& m : received) got.insert(serialize(m));
  for (const auto& e : bus.log()) sent.insert(serialize(e.message));
  return got == sent ? "" : "delivered multiset differs from the send log";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "end-to-end move_pallet scenario", 5, criterion_scenario},
      {2, "agent generation count", 10, criterion_generation},
      {3, "query engine vs nested-loop oracle", 30, criterion_query_oracle},
      {4, "turtle and ACL round-trips", 1e9, criterion_round_trips},
      {5, "transport neutrality (9 assignments)", 60, criterion_transports},
      {6, "consistency checker vs pairwise oracle", 1e9, criterion_consistency},
      {7, "determinism of trace and data dump", 1e9, criterion_determinism},
      {8, "bus per-sender FIFO and exactly-once", 1e9, criterion_bus_ordering},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string reason;
    try {
      reason = c.check();
    } catch (const std::exception& e) {
      reason = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (reason.empty() && seconds >= c.budget_seconds) {
      std::ostringstream why;
      why << "took " << seconds << " s, budget " << c.budget_seconds << " s";
      reason = why.str();
    }
    const bool pass = reason.empty();
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.name << " (" << std::fixed
              << std::setprecision(3) << seconds << " s)";
    if (!pass) std::cout << ": " << reason;
    std::cout << "\n";
  }
  fs::remove_all(fs::temp_directory_path() / ("kgmas_acceptance_" + std::to_string(::getpid())));
  return failures == 0 ? 0 : 1;
}
