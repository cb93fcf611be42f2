#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cyglue/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace cyg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CYGLUE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cyglue_test_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing defaults and errors") {
  const RunConfig d = parse_config(json::object());
  CHECK(d.command == Command::Pointwise);
  CHECK(d.workers == 1);
  CHECK(d.ale_scale() == 1.0);
  CHECK(std::isnan(d.alpha));

  const RunConfig g = parse_config({{"command", "glue-scan"}, {"grid", {{"n_r", 2}}}});
  CHECK(g.command == Command::GlueScan);
  CHECK(g.ale_scale() == 0.25);
  CHECK(g.grid.n_r == 2);
  CHECK(g.grid.n_mu == 3);
  CHECK(g.gluing().alpha_value() == doctest::Approx(0.8));

  CHECK_THROWS_AS(parse_config(json::array()), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"bogus", 1}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "nope"}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"workers", 0}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"seed", "abc"}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"grid", {{"n_x", 2}}}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "cone-verify"}, {"cone", "conifold"}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "moser"}, {"flow_steps", 8}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "glue-scan"}, {"lambda", -2.5}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "glue-scan"}, {"lambda", -5.0}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "glue-scan"}, {"t_list", {0.4, 0.3, 0.2}}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "glue-scan"}, {"t_list", {0.4, 0.2, 0.3, 0.1}}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "glue-scan"}, {"nu", 3.0}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "glue-scan"}, {"cone", "c3"}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "glue-scan"}, {"singular_point", 27}}), ConfigInvalid);
  CHECK_THROWS_AS(parse_config({{"command", "thm52"}, {"alpha", 1.5}}), ConfigInvalid);
}

TEST_CASE("geometry catalogue") {
  const auto all = list_geometries();
  std::vector<std::string> names;
  for (const auto& d : all) names.push_back(d.name);
  for (const char* n : {"flat_c3", "c3_mod_z3", "calabi_ale_o3", "t6_z3_patch"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  for (const auto& d : all)
    if (d.name == "calabi_ale_o3") CHECK(d.rate == -6.0);
  CHECK(list_geometries("z3").size() == 2);
  CHECK(list_geometries("nothing").empty());
  const json j = to_json(all.front());
  CHECK(j.contains("name"));
  CHECK(j.contains("kind"));
  CHECK(j.contains("rate"));
  CHECK(j.contains("parameters"));
  CHECK(j.contains("sampling_hints"));
}

TEST_CASE("check records") {
  CHECK(check_close("a", 1.05, 1.0, 0.1).pass);
  CHECK_FALSE(check_close("a", 1.2, 1.0, 0.1).pass);
  CHECK(check_below("b", 1e-9, 1e-8).pass);
  CHECK_FALSE(check_below("b", 1e-7, 1e-8).pass);
  CHECK(check_above("c", 0.7, 0.3).pass);
  CHECK_FALSE(check_above("c", std::nan(""), 0.3).pass);
  CHECK_FALSE(check_below("b", std::nan(""), 1.0).pass);
}

TEST_CASE("reports") {
  const RunReport rep = run(parse_config({{"command", "thm52"}}));
  CHECK(rep.pass());
  const json j = rep.to_json();
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["csv_layout_version"] == kCsvLayoutVersion);
  CHECK(j["command"] == "thm52");
  CHECK(j["pass"] == true);
  CHECK(j["checks"].is_array());
  CHECK(j["config"]["resolved"]["lambda"] == -6.0);
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("kind"));
    CHECK(c.contains("measured"));
    CHECK(c.contains("predicted"));
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("pass"));
  }
  CHECK_FALSE(RunReport{}.pass());
}

TEST_CASE("command line exit codes and outputs") {
  const fs::path ok = scratch("ok");
  CHECK(run_cli("--command thm52 --out " + ok.string()) == 0);
  const json rep = json::parse(slurp(ok / "report.json"));
  CHECK(rep["pass"] == true);
  CHECK(!fs::exists(ok / "defect_scan.csv"));

  CHECK(run_cli("--command cone-verify --quiet --out " + scratch("cone").string()) == 0);
  // The ALE chart step does not resolve the zero section at a = 0.25.
  CHECK(run_cli("--command ale-verify --set ale_a=0.25 --out " + scratch("fail").string()) == 1);
  CHECK(run_cli("--command nope --out " + scratch("bad").string()) == 2);
  CHECK(run_cli("--set bogus=1 --out " + scratch("bad2").string()) == 2);
  CHECK(run_cli("--command glue-scan --set nu=3 --out " + scratch("bad3").string()) == 2);

  const fs::path cfg = scratch("cfg") / "run.json";
  std::ofstream(cfg) << R"({"command": "thm52", "seed": 7})";
  const fs::path cfgout = scratch("cfgout");
  CHECK(run_cli("--config " + cfg.string() + " --out " + cfgout.string()) == 0);
  CHECK(json::parse(slurp(cfgout / "report.json"))["seed"] == 7);
  CHECK(run_cli("--config " + cfg.string() + " --seed 9 --out " + cfgout.string()) == 0);
  CHECK(json::parse(slurp(cfgout / "report.json"))["seed"] == 9);

  const fs::path env = scratch("env");
  CHECK(std::system(("CYGLUE_WORKERS=3 " + std::string(CYGLUE_CLI) + " --command thm52 --quiet --out " +
                     env.string() + " > /dev/null")
                        .c_str()) == 0);
  CHECK(json::parse(slurp(env / "report.json"))["config"]["resolved"]["workers"] == 3);
  CHECK(std::system(("CYGLUE_WORKERS=3 " + std::string(CYGLUE_CLI) + " --command thm52 --workers 2 --quiet --out " +
                     env.string() + " > /dev/null")
                        .c_str()) == 0);
  CHECK(json::parse(slurp(env / "report.json"))["config"]["resolved"]["workers"] == 2);
  CHECK(std::system(("CYGLUE_WORKERS=zero " + std::string(CYGLUE_CLI) + " --command thm52 --out " + env.string() +
                     " > /dev/null 2>&1")
                        .c_str()) != 0);
}
