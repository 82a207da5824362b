#include "kgmas/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kgmas/agent.hpp"
#include "kgmas/coordination.hpp"
#include "kgmas/rami_model.hpp"
#include "kgmas/system.hpp"
#include "kgmas/triple_store.hpp"
#include "kgmas/turtle.hpp"
#include "kgmas/vocabulary.hpp"

namespace kgmas {

namespace {

namespace fs = std::filesystem;
namespace v = vocabulary;

// Missing files and unreadable input map to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
}

Snapshot load_graph(const std::string& path, const Iri& graph) {
  TripleStore store;
  store.load_turtle(graph, read_file(path));
  return store.snapshot();
}

std::string dump(const Snapshot& snapshot, const Iri& graph) {
  const auto& triples = snapshot.graph(graph);
  return write_turtle({triples.begin(), triples.end()});
}

std::pair<std::string, std::string> split_pair(const std::string& text, const std::string& option) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError(option + " expects key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string describe(const Violation& violation) {
  return "<" + violation.subject.value + "> " + violation.rule + ": " + violation.message;
}

std::string describe(const ConsistencyViolation& violation) {
  return violation.position + "\t<" + violation.first.value + ">\t<" + violation.second.value + ">\t" +
         to_string(violation.rule);
}

std::string describe(const AgentSpec& spec) {
  const auto& bp = spec.blueprint;
  return spec.agent_id + "\t" + local_name(bp.asset_kind.value) + "\t" + to_string(bp.realm) + "\t" +
         bp.binding.protocol_scheme + "\t" + local_name(spec.behavior.value);
}

// Rebinds the named asset to another scheme. The asset is matched by IRI local
// name or by agent id.
void override_transport(TripleStore& store, const std::string& asset, const std::string& scheme) {
  for (const auto& id : list_assets(store.snapshot(), v::setup_graph())) {
    if (local_name(id.value) != asset && agent_id_for(id) != asset) continue;
    store.replace_properties(v::setup_graph(), Term(id), {{v::hasProtocol(), {literal(scheme)}}});
    return;
  }
  throw InputError("--transport-override names unknown asset '" + asset + "'");
}

int cmd_validate(const std::string& setup, std::ostream& out) {
  const auto snapshot = load_graph(setup, v::setup_graph());
  const auto report = validate_setup(snapshot, v::setup_graph());
  for (const auto& violation : report.violations) out << describe(violation) << "\n";
  if (!report.ok()) return kExitDomainFailure;
  out << "ok: " << list_assets(snapshot, v::setup_graph()).size() << " assets\n";
  return kExitOk;
}

int cmd_generate(const std::string& setup, const std::string& emit, std::ostream& out) {
  const auto snapshot = load_graph(setup, v::setup_graph());
  std::vector<AgentSpec> specs;
  try {
    specs = generate_agents(snapshot, v::setup_graph());
  } catch (const GenerationError& e) {
    for (const auto& violation : e.report().violations) out << describe(violation) << "\n";
    return kExitDomainFailure;
  }
  if (!emit.empty()) fs::create_directories(emit);
  for (const auto& spec : specs) {
    out << describe(spec) << "\n";
    if (!emit.empty()) write_file(fs::path(emit) / (spec.agent_id + ".json"), canonical(to_json(spec)) + "\n");
  }
  return kExitOk;
}

struct RunOptions {
  std::string setup;
  std::string world;
  std::string task;
  std::vector<std::string> params;
  std::optional<std::uint64_t> seed;
  int deadline_ms = 2000;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::vector<std::string> protocols;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  Json world_doc;
  try {
    world_doc = Json::parse(read_file(opts.world));
  } catch (const Json::parse_error& e) {
    throw InputError("world '" + opts.world + "': " + e.what());
  }
  if (opts.seed) world_doc["seed"] = *opts.seed;

  std::map<std::string, std::string> params;
  for (const auto& p : opts.params) params.insert(split_pair(p, "--param"));

  System system(WarehouseWorld::from_json(world_doc));
  system.load_setup(read_file(opts.setup));
  for (const auto& path : opts.protocols) system.load_setup(read_file(path));
  for (const auto& o : opts.overrides) {
    const auto [asset, scheme] = split_pair(o, "--transport-override");
    override_transport(system.store(), asset, scheme);
  }

  try {
    system.start();
  } catch (const GenerationError& e) {
    for (const auto& violation : e.report().violations) err << describe(violation) << "\n";
    return kExitDomainFailure;
  }
  const auto result = system.run_task(opts.task, params, std::chrono::milliseconds(opts.deadline_ms));
  system.shutdown();

  std::string consistency;
  for (const auto& violation : result.violations) consistency += describe(violation) + "\n";
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    const fs::path dir(opts.out_dir);
    write_file(dir / "trace.tsv", to_trace(result.trace));
    write_file(dir / "data.ttl", system.store().dump_turtle(v::data_graph()));
    write_file(dir / "consistency.txt", consistency);
  }

  out << result.state.task_id << "\t" << to_string(result.state.status) << "\t" << result.trace.size()
      << " messages\t" << result.ticks << " ticks\n";
  if (!result.completed()) {
    err << result.failure << "\n";
    return kExitDomainFailure;
  }
  if (!result.violations.empty()) {
    err << consistency;
    return kExitDomainFailure;
  }
  return kExitOk;
}

int cmd_dump(const std::string& file, std::ostream& out) {
  const auto snapshot = load_graph(file, v::data_graph());
  out << dump(snapshot, v::data_graph());
  return kExitOk;
}

std::string task_of(const std::string& conversation) {
  const auto dash = conversation.rfind('-');
  return dash == std::string::npos ? conversation : conversation.substr(0, dash);
}

int cmd_trace(const std::string& file, const std::string& setup, std::ostream& out) {
  const auto entries = parse_trace(read_file(file));
  if (setup.empty()) {
    for (const auto& e : entries) out << to_trace_line(e) << "\n";
    return kExitOk;
  }

  const auto snapshot = load_graph(setup, v::setup_graph());
  const auto bindings = role_bindings(generate_agents(snapshot, v::setup_graph()));
  const auto task = entries.empty() ? std::string() : task_of(entries.front().message.conversation_id);
  const auto protocol = load_protocol(snapshot, v::setup_graph(), find_protocol(snapshot, v::setup_graph(), task));

  const auto expected = expected_messages(protocol);
  const auto shapes = project_trace(entries, bindings);
  std::size_t cursor = 0;
  bool matches = true;
  for (const auto& step : protocol.steps) {
    out << "step " << step.index << "\t" << to_string(step.kind) << "\t" << local_name(step.role.value) << "\n";
    bool any = false;
    for (const auto& e : expected) {
      if (e.step != step.index) continue;
      any = true;
      if (cursor >= entries.size()) {
        out << "  (missing)\n";
        matches = false;
        continue;
      }
      if (!(shapes[cursor] == e.shape)) matches = false;
      out << "  " << to_trace_line(entries[cursor]) << "\n";
      ++cursor;
    }
    if (!any) out << "  (no message exchange)\n";
  }
  for (; cursor < entries.size(); ++cursor) {
    out << "unmatched\t" << to_trace_line(entries[cursor]) << "\n";
    matches = false;
  }
  return matches ? kExitOk : kExitDomainFailure;
}

int cmd_check(const std::string& file, std::ostream& out) {
  const auto snapshot = load_graph(file, v::data_graph());
  const auto violations = check_world_consistency(snapshot, v::data_graph());
  for (const auto& violation : violations) out << describe(violation) << "\n";
  if (!violations.empty()) return kExitDomainFailure;
  out << "consistent\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge-graph driven multi-agent warehouse control", "kgmas"};
  app.require_subcommand(1);

  std::string setup, emit, file;
  RunOptions run;

  auto* validate = app.add_subcommand("validate", "Validate a setup graph");
  validate->add_option("--setup", setup, "Setup graph (Turtle)")->required();

  auto* generate = app.add_subcommand("generate", "List the agents a setup graph yields");
  generate->add_option("--setup", setup, "Setup graph (Turtle)")->required();
  generate->add_option("--emit", emit, "Directory for one JSON spec per agent");

  auto* run_cmd = app.add_subcommand("run", "Run one task in the simulated warehouse");
  run_cmd->add_option("--setup", run.setup, "Setup graph (Turtle)")->required();
  run_cmd->add_option("--world", run.world, "World layout (JSON)")->required();
  run_cmd->add_option("--task", run.task, "Task name")->required();
  run_cmd->add_option("--param", run.params, "Task parameter key=value");
  run_cmd->add_option("--seed", run.seed, "Override the world seed");
  run_cmd->add_option("--deadline-ms", run.deadline_ms, "Per-step deadline")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--out", run.out_dir, "Directory for trace.tsv, data.ttl and consistency.txt");
  run_cmd->add_option("--transport-override", run.overrides, "Rebind an asset: asset=scheme");
  run_cmd->add_option("--protocol", run.protocols, "Extra Turtle merged into the setup graph");

  auto* dump = app.add_subcommand("dump", "Print a Turtle file in canonical form");
  dump->add_option("file", file, "Turtle file")->required();

  auto* trace = app.add_subcommand("trace", "Print a message trace, annotated with protocol steps");
  trace->add_option("file", file, "Trace file (TSV)")->required();
  trace->add_option("--setup", setup, "Setup graph with the protocol");

  auto* check = app.add_subcommand("check", "Check a data graph dump for colocation conflicts");
  check->add_option("file", file, "Data graph (Turtle)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*validate) return cmd_validate(setup, out);
    if (*generate) return cmd_generate(setup, emit, out);
    if (*run_cmd) return cmd_run(run, out, err);
    if (*dump) return cmd_dump(file, out);
    if (*trace) return cmd_trace(file, setup, out);
    if (*check) return cmd_check(file, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const InputError& e) {
    err << e.what() << "\n";
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
  return kExitInputError;
}

}  // namespace kgmas
