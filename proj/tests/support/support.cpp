#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kgmas::testing {

namespace {

constexpr const char* kNs = "http://kgmas.example/vocab#";

template <class T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces = {"a", "b", "pallet", " ", "\"", "\\", "\n", "\t", "\r",
                                                  "é", "→", "{", "}", "#", ".", "<x>", "0", "42"};
  std::string out;
  const int n = uniform(rng, 0, 6);
  for (int i = 0; i < n; ++i) out += pick(rng, pieces);
  return out;
}

Term random_iri(Rng& rng) {
  if (coin(rng, 0.8)) return Term(Iri{std::string(kNs) + "n" + std::to_string(uniform(rng, 0, 11))});
  return Term(Iri{"http://other.example/path/" + std::to_string(uniform(rng, 0, 3)) + "-x"});
}

Term random_predicate(Rng& rng) { return Term(Iri{std::string(kNs) + "p" + std::to_string(uniform(rng, 0, 4))}); }

Term random_object(Rng& rng) {
  switch (uniform(rng, 0, 3)) {
    case 0:
    case 1: return random_iri(rng);
    case 2: return Term(Literal{random_text(rng), ""});
    default:
      return Term(Literal{std::to_string(uniform(rng, -5, 5)), "http://www.w3.org/2001/XMLSchema#integer"});
  }
}

// Binds `pattern_term` against `value` under `binding`; false on conflict.
bool unify(const Term& pattern_term, const Term& value, Solution& binding) {
  if (!pattern_term.is_variable()) return pattern_term == value;
  const auto& name = pattern_term.variable().name;
  const auto it = binding.find(name);
  if (it != binding.end()) return it->second == value;
  binding.emplace(name, value);
  return true;
}

void enumerate(const std::vector<Triple>& graph, const std::vector<Pattern>& patterns, std::size_t index,
               Solution binding, std::set<Solution>& out) {
  if (index == patterns.size()) {
    out.insert(binding);
    return;
  }
  const auto& p = patterns[index];
  for (const auto& t : graph) {
    Solution next = binding;
    if (unify(p.subject, t.subject, next) && unify(p.predicate, t.predicate, next) && unify(p.object, t.object, next)) {
      enumerate(graph, patterns, index + 1, std::move(next), out);
    }
  }
}

}  // namespace

std::string fixture_path(const std::string& name) { return std::string(KGMAS_FIXTURE_DIR) + "/" + name; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Triple> random_graph(Rng& rng, std::size_t max_triples) {
  const auto n = std::uniform_int_distribution<std::size_t>(0, max_triples)(rng);
  std::vector<Triple> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({random_iri(rng), random_predicate(rng), random_object(rng)});
  return out;
}

std::vector<Pattern> random_query(Rng& rng, const std::vector<Triple>& graph, int max_patterns) {
  static const std::vector<std::string> names = {"a", "b", "c", "d"};
  const int n = uniform(rng, 1, max_patterns);
  auto slot = [&](const Term& from_graph, const Term& fresh) -> Term {
    const int r = uniform(rng, 0, 9);
    if (r < 6) return Term(Variable{pick(rng, names)});
    if (r < 9 || graph.empty()) return graph.empty() ? fresh : from_graph;
    return fresh;
  };
  std::vector<Pattern> out;
  for (int i = 0; i < n; ++i) {
    const Triple seed = graph.empty() ? Triple{random_iri(rng), random_predicate(rng), random_object(rng)} : pick(rng, graph);
    Pattern p;
    p.subject = slot(seed.subject, random_iri(rng));
    p.predicate = coin(rng, 0.3) ? Term(Variable{pick(rng, names)}) : seed.predicate;
    p.object = slot(seed.object, random_object(rng));
    // Keep one constant per pattern so enumeration stays tractable.
    if (p.subject.is_variable() && p.predicate.is_variable() && p.object.is_variable()) p.predicate = seed.predicate;
    out.push_back(p);
  }
  return out;
}

std::vector<Solution> nested_loop_query(const std::vector<Triple>& graph, const std::vector<Pattern>& patterns) {
  std::set<Triple> distinct(graph.begin(), graph.end());
  std::vector<Triple> unique(distinct.begin(), distinct.end());
  std::set<Solution> out;
  enumerate(unique, patterns, 0, {}, out);
  return {out.begin(), out.end()};
}

Json random_json(Rng& rng, int depth) {
  switch (depth <= 0 ? uniform(rng, 0, 3) : uniform(rng, 0, 5)) {
    case 0: return random_text(rng);
    case 1: return uniform(rng, -1000, 1000);
    case 2: return coin(rng);
    case 3: return nullptr;
    case 4: {
      Json arr = Json::array();
      for (int i = uniform(rng, 0, 3); i > 0; --i) arr.push_back(random_json(rng, depth - 1));
      return arr;
    }
    default: {
      Json obj = Json::object();
      for (int i = uniform(rng, 0, 3); i > 0; --i) obj[random_text(rng)] = random_json(rng, depth - 1);
      return obj;
    }
  }
}

AclMessage random_message(Rng& rng) {
  static const std::vector<Performative> performatives = {Performative::request, Performative::inform,
                                                          Performative::confirm, Performative::refuse,
                                                          Performative::failure};
  static const std::vector<std::string> ids = {"turtlebot", "roboticarm", "kg", "operator", "agent-7"};
  AclMessage m;
  m.performative = pick(rng, performatives);
  m.sender = pick(rng, ids);
  do {
    m.receiver = pick(rng, ids);
  } while (m.receiver == m.sender);
  m.conversation_id = "task-" + std::to_string(uniform(rng, 0, 99));
  Json content = Json::object();
  for (int i = uniform(rng, 0, 4); i > 0; --i) content[random_text(rng)] = random_json(rng, 2);
  m.content = content;
  if (coin(rng, 0.3)) m.reply_with = "r" + std::to_string(uniform(rng, 0, 999));
  if (coin(rng, 0.3)) m.in_reply_to = "r" + std::to_string(uniform(rng, 0, 999));
  return m;
}

Json move_request_content() { return Json::parse(R"({"task": "move_pallet", "from": "P1", "to": "P2"})"); }

Json placed_report_content() { return Json::parse(R"({"event": "pallet_placed"})"); }

std::string random_setup(Rng& rng, int k) {
  static const std::vector<std::string> kinds = {"Mobile_Robot", "Robotic_Arm", "Conveyor", "Sensor"};
  static const std::vector<std::string> schemes = {"ros+ws", "rest+http", "mqtt"};
  static const std::vector<std::string> capabilities = {"MotionControl", "GripperControl", "Sensing"};
  std::ostringstream ttl;
  ttl << "@prefix kgmas: <" << kNs << "> .\n";
  for (int i = 0; i < k; ++i) {
    const std::string a = "kgmas:Asset" + std::to_string(i);
    ttl << a << " kgmas:hasAssetKind kgmas:" << pick(rng, kinds) << " .\n";
    ttl << a << " kgmas:hasRealm kgmas:" << (coin(rng) ? "physical" : "digital") << " .\n";
    ttl << a << " kgmas:hasProtocol \"" << pick(rng, schemes) << "\" .\n";
    ttl << a << " kgmas:hasEndpoint \"host" << i << ":" << uniform(rng, 1000, 9999) << "\" .\n";
    const int channels = uniform(rng, 1, 3);
    for (int c = 0; c < channels; ++c) {
      for (const char* dir : {"subscribesTo", "publishesOn"}) {
        if (c > 0 && coin(rng)) continue;
        const std::string node = "kgmas:Asset" + std::to_string(i) + dir + std::to_string(c);
        ttl << a << " kgmas:" << dir << " " << node << " .\n";
        ttl << node << " kgmas:hasTopic \"/asset" << i << "/" << dir << c << "\" .\n";
        ttl << node << " kgmas:hasMessageKind kgmas:Kind" << uniform(rng, 0, 3) << " .\n";
      }
    }
    const int caps = uniform(rng, 1, 3);
    for (int c = 0; c < caps; ++c) ttl << a << " kgmas:hasCapability kgmas:" << capabilities[c] << " .\n";
    ttl << "kgmas:System kgmas:aggregates " << a << " .\n";
    ttl << a << " kgmas:hasCoordinationRole kgmas:role" << uniform(rng, 0, 2) << " .\n";
  }
  return ttl.str();
}

std::vector<Placed> random_placement(Rng& rng) {
  const int n = uniform(rng, 2, 6);
  std::vector<Placed> out;
  for (int i = 0; i < n; ++i) {
    Placed p;
    p.name = "E" + std::to_string(i);
    p.physical = coin(rng);
    p.position = coin(rng, 0.2) ? "P" + std::to_string(uniform(rng, 1, 2))
                                : "cell:" + std::to_string(uniform(rng, 0, 2)) + "," + std::to_string(uniform(rng, 0, 1));
    out.push_back(p);
  }
  return out;
}

std::string placement_turtle(const std::vector<Placed>& entities) {
  std::ostringstream ttl;
  ttl << "@prefix kgmas: <" << kNs << "> .\n";
  for (const auto& e : entities) {
    ttl << "kgmas:" << e.name << " kgmas:hasRealm kgmas:" << (e.physical ? "physical" : "digital") << " .\n";
    ttl << "kgmas:" << e.name << " kgmas:atPosition \"" << e.position << "\" .\n";
  }
  return ttl.str();
}

std::vector<OracleViolation> pairwise_violations(const std::vector<Placed>& entities) {
  std::vector<OracleViolation> out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    for (std::size_t j = i + 1; j < entities.size(); ++j) {
      const auto& a = entities[i];
      const auto& b = entities[j];
      if (a.position != b.position || (!a.physical && !b.physical)) continue;
      OracleViolation v;
      v.first = std::string(kNs) + std::min(a.name, b.name);
      v.second = std::string(kNs) + std::max(a.name, b.name);
      v.position = a.position;
      v.rule = a.physical && b.physical ? "physical_colocation" : "physical_digital_colocation";
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.position, x.first, x.second) < std::tie(y.position, y.first, y.second);
  });
  return out;
}

std::vector<std::tuple<std::string, std::string, std::string>> move_pallet_reference_shapes() {
  return {
      {"request", "mover", "kg"},    // 1 mover asks for its next action
      {"inform", "kg", "mover"},     // 2 told to contact the placer
      {"request", "mover", "placer"},  // 3 the move request itself
      {"request", "placer", "kg"},   // 4 placer asks how to handle it
      {"inform", "kg", "placer"},    // 4 answer: perform GripperControl
                                     // 5 perform_action exchanges nothing
      {"inform", "placer", "kg"},    // 6 pallet_placed
      {"request", "placer", "kg"},   // 7 next action
      {"inform", "kg", "placer"},    // 7 done
  };
}

}  // namespace kgmas::testing
