// Configuration-driven verification suites and the gluing scan, with JSON
// reports and the DefectScan CSV.
#pragma once

#include "cyglue/cones.hpp"
#include "cyglue/gluing.hpp"

#include "json.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyg {

constexpr int kReportSchemaVersion = 1;
constexpr int kCsvLayoutVersion = 1;
constexpr const char* kVersion = "cyglue 1.0.0";

struct ConfigInvalid : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CheckRecord {
  std::string name;
  std::string kind;  // close | below | above
  double measured = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// close: |measured - predicted| <= tolerance; below / above: measured <= or >=
// predicted (the bound).
CheckRecord check_close(std::string name, double measured, double predicted, double tolerance);
CheckRecord check_below(std::string name, double measured, double bound);
CheckRecord check_above(std::string name, double measured, double bound);

enum class Command { Pointwise, ConeVerify, AleVerify, Moser, GlueScan, Thm52 };
const char* command_name(Command c);

struct RunConfig {
  Command command = Command::Pointwise;
  std::uint64_t seed = 20240607;
  int workers = 1;
  // Geometry names.
  std::string cone = "c3_mod_z3";
  std::string ac = "calabi_ale_o3";
  std::string conical = "t6_z3_patch";
  // Numeric parameters.
  double nu = 2.0;
  double lambda = -6.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> t_list = {0.4, 0.283, 0.2, 0.141, 0.1};
  // ALE scale; NaN picks the command default (1 for ale-verify, 0.25 for glue-scan).
  double ale_a = std::numeric_limits<double>::quiet_NaN();
  double amplitude = 1e-5;
  int singular_point = 0;
  double R = 1.0;
  double eps = 1.0;
  ConeGrid grid{4, 3, 4, 3};
  ConeGrid hessian_grid{3, 2, 3, 3};
  int samples = 200;
  int flow_steps = 64;
  double moser_nu = 3.0;
  double moser_amplitude = 0.2;
  std::string out_dir = ".";
  nlohmann::json raw;

  GluingConfig gluing() const;
  double ale_scale() const;
};

// Parses a config document; unknown keys, unknown geometry names and
// inadmissible parameters raise ConfigInvalid.
RunConfig parse_config(const nlohmann::json& doc);

struct RunReport {
  RunConfig config;
  std::vector<CheckRecord> checks;
  nlohmann::json fitted = nlohmann::json::object();
  std::string csv;  // glue-scan only
  double wall_time = 0.0;
  bool pass() const;
  nlohmann::json to_json() const;
};

RunReport run(const RunConfig& cfg);

// Suites, also used directly by the acceptance binary.
std::vector<CheckRecord> suite_g2_frame();
std::vector<CheckRecord> suite_su3_recovery(std::uint64_t seed, int conjugations);
std::vector<CheckRecord> suite_torsion_ladder(std::uint64_t seed, nlohmann::json& fitted);
std::vector<CheckRecord> suite_cone(const ConeGeometry& cone, std::uint64_t seed, nlohmann::json& fitted);
std::vector<CheckRecord> suite_ale(double a, nlohmann::json& fitted);
std::vector<CheckRecord> suite_moser(std::uint64_t seed, int steps, double nu, double amplitude, int workers,
                                     nlohmann::json& fitted);
std::vector<CheckRecord> suite_glue_scan(const RunConfig& cfg, std::string& csv, nlohmann::json& fitted);
std::vector<CheckRecord> suite_thm52(const RunConfig& cfg, nlohmann::json& fitted);

// Registered cones, AC spaces and conical testbeds whose name contains `filter`.
std::vector<GeometryDescriptor> list_geometries(const std::string& filter = "");
nlohmann::json to_json(const GeometryDescriptor& d);

}  // namespace cyg
