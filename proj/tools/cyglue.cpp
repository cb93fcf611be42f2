// Batch runner: cyglue --config run.json --out results/
#include "cyglue/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// key=value with value parsed as JSON when possible, else as a string.
void apply_override(json& doc, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw cyg::ConfigInvalid("--set expects key=value, got '" + kv + "'");
  const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = value;
  if (v.is_object()) throw cyg::ConfigInvalid("--set overrides top-level scalar or list fields only");
  doc[key] = v;
}

bool write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
  return static_cast<bool>(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification suites and gluing scans for conical Calabi-Yau gluing"};
  std::string config_path, out_dir, command, list_filter;
  int workers = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  bool list = false, quiet = false;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory for report.json and defect_scan.csv");
  app.add_option("--workers", workers, "worker threads (overrides CYGLUE_WORKERS and the config)")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed for randomized checks");
  app.add_option("--command", command, "pointwise | cone-verify | ale-verify | moser | glue-scan | thm52");
  app.add_option("--set", sets, "override a top-level field, key=value (repeatable)");
  auto* list_opt = app.add_flag("--list-geometries", list, "print the geometry catalogue and exit");
  app.add_option("--filter", list_filter, "substring filter for --list-geometries")->needs(list_opt);
  app.add_flag("--quiet", quiet, "suppress the per-check summary");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    json cat = json::array();
    for (const auto& d : cyg::list_geometries(list_filter)) cat.push_back(cyg::to_json(d));
    std::cout << cat.dump(2) << "\n";
    return 0;
  }

  cyg::RunConfig cfg;
  try {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      doc = json::parse(f, nullptr, false);
      if (doc.is_discarded()) throw cyg::ConfigInvalid("config file is not valid JSON: " + config_path);
    }
    for (const auto& kv : sets) apply_override(doc, kv);
    if (!command.empty()) doc["command"] = command;
    if (*seed_opt) doc["seed"] = seed;
    if (const char* env = std::getenv("CYGLUE_WORKERS")) {
      char* end = nullptr;
      const long n = std::strtol(env, &end, 10);
      if (end == env || *end || n < 1) throw cyg::ConfigInvalid("CYGLUE_WORKERS must be a positive integer");
      doc["workers"] = n;
    }
    if (workers > 0) doc["workers"] = workers;
    if (!out_dir.empty()) doc["out_dir"] = out_dir;
    cfg = cyg::parse_config(doc);
  } catch (const cyg::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const cyg::RunReport rep = cyg::run(cfg);
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  bool io_ok = write_file(dir / "report.json", rep.to_json().dump(2) + "\n");
  if (cfg.command == cyg::Command::GlueScan && !rep.csv.empty())
    io_ok = write_file(dir / "defect_scan.csv", rep.csv) && io_ok;
  if (!io_ok) std::cerr << "could not write outputs to " << dir << "\n";

  if (!quiet) {
    for (const auto& c : rep.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured=" << c.measured
                << "  predicted=" << c.predicted << "  tol=" << c.tolerance << "\n";
    std::cout << (rep.pass() ? "overall PASS" : "overall FAIL") << " (" << rep.wall_time << " s)\n";
  }
  return rep.pass() && io_ok ? 0 : 1;
}
