#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "kgmas/cli.hpp"
#include "support.hpp"

using namespace kgmas;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("kgmas_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

const std::string kSetup = testing::fixture_path("warehouse_setup.ttl");
const std::string kWorld = testing::fixture_path("warehouse_world.json");

std::vector<std::string> run_args(const fs::path& out) {
  return {"run", "--setup", kSetup, "--world", kWorld, "--task", "move_pallet",
          "--param", "from=P1", "--param", "to=P2", "--seed", "0", "--out", out.string()};
}

}  // namespace

TEST_CASE("validate") {
  auto r = cli({"validate", "--setup", kSetup});
  CHECK(r.code == 0);
  CHECK(r.out == "ok: 2 assets\n");

  const auto dir = scratch("validate");
  auto text = testing::read_text(kSetup);
  const std::string realm = "kgmas:Turtlebot kgmas:hasRealm kgmas:physical .";
  text.replace(text.find(realm), realm.size(), "");
  r = cli({"validate", "--setup", write(dir / "bad.ttl", text)});
  CHECK(r.code == 1);
  CHECK(r.out.find("realm-required") != std::string::npos);

  r = cli({"validate", "--setup", write(dir / "broken.ttl", "kgmas:a kgmas:b .\n")});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 1") != std::string::npos);
  CHECK(cli({"validate", "--setup", (dir / "missing.ttl").string()}).code == 2);
}

TEST_CASE("generate lists agents and emits specs") {
  const auto dir = scratch("generate");
  const auto r = cli({"generate", "--setup", kSetup, "--emit", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out ==
        "roboticarm\tRobotic_Arm\tdigital\tros+ws\tplacer\n"
        "turtlebot\tMobile_Robot\tphysical\tros+ws\tmover\n");
  CHECK(fs::exists(dir / "turtlebot.json"));
  const auto spec = Json::parse(testing::read_text((dir / "roboticarm.json").string()));
  CHECK(spec.at("agent_id") == "roboticarm");
}

TEST_CASE("run writes trace, data dump and consistency report") {
  const auto dir = scratch("run");
  const auto r = cli(run_args(dir));
  CHECK(r.code == 0);
  CHECK(r.out.rfind("move_pallet-1\tcompleted\t8 messages", 0) == 0);
  CHECK(fs::exists(dir / "trace.tsv"));
  CHECK(testing::read_text((dir / "consistency.txt").string()).empty());
  const auto data = testing::read_text((dir / "data.ttl").string());
  CHECK(data.find("kgmas:pallet1 kgmas:atPosition \"P2\" .") != std::string::npos);
  CHECK(data.find("kgmas:eventName \"pallet_placed\"") != std::string::npos);

  const auto traced = cli({"trace", (dir / "trace.tsv").string(), "--setup", kSetup});
  CHECK(traced.code == 0);
  CHECK(traced.out.find("step 5\tperform_action\tplacer\n  (no message exchange)\n") != std::string::npos);
  CHECK(cli({"trace", (dir / "trace.tsv").string()}).out == testing::read_text((dir / "trace.tsv").string()));

  CHECK(cli({"check", (dir / "data.ttl").string()}).code == 0);
  const auto dumped = cli({"dump", (dir / "data.ttl").string()});
  CHECK(dumped.out == data);
}

TEST_CASE("run honours transport overrides and reports failures") {
  const auto dir = scratch("override");
  auto args = run_args(dir);
  args.insert(args.end(), {"--transport-override", "turtlebot=mqtt", "--transport-override", "RoboticArm=rest+http"});
  CHECK(cli(args).code == 0);

  args = run_args(dir);
  args.insert(args.end(), {"--transport-override", "nobody=mqtt"});
  CHECK(cli(args).code == 2);

  args = run_args(dir);
  args.insert(args.end(), {"--transport-override", "turtlebot=carrier-pigeon"});
  CHECK(cli(args).code == 1);

  args = run_args(dir);
  args.insert(args.end(), {"--deadline-ms", "0"});
  const auto failed = cli(args);
  CHECK(failed.code == 1);
  CHECK(failed.err == "failed at step 1\n");

  args = run_args(dir);
  args[6] = "fly";
  CHECK(cli(args).code == 1);
}

TEST_CASE("trace flags a message that does not fit the protocol") {
  const auto dir = scratch("trace");
  const auto path = write(dir / "t.tsv",
                          "1\tinform\tturtlebot\tkg\tmove_pallet-1\t{\"query\":\"next_action\"}\n");
  const auto r = cli({"trace", path, "--setup", kSetup});
  CHECK(r.code == 1);
  CHECK(r.out.find("(missing)") != std::string::npos);
}

TEST_CASE("check lists colocated pairs") {
  const auto r = cli({"check", testing::fixture_path("colocation_data.ttl")});
  CHECK(r.code == 1);
  CHECK(r.out ==
        "cell:2,1\t<http://kgmas.example/vocab#RobotA>\t<http://kgmas.example/vocab#RobotB>\tphysical_colocation\n");
}

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"teleport"}).code == 2);
  CHECK(cli({"run", "--setup", kSetup}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}
