#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanoplate/error.hpp"
#include "nanoplate/estimates.hpp"
#include "nanoplate/geometry.hpp"
#include "nanoplate/loads.hpp"
#include "nanoplate/materials.hpp"
#include "nanoplate/solver.hpp"
#include "nanoplate/ucp.hpp"

namespace nanoplate {

using json = nlohmann::json;

inline constexpr const char* kScenarioSchema = "nanoplate.scenario/1";
inline constexpr const char* kReportSchema = "nanoplate.report/1";
inline constexpr const char* kSummarySchema = "nanoplate.summary/1";

struct MaterialSpec {
  IsotropicModuli moduli;
  LengthScales scales;
  std::optional<QSplit> q_split;
};

struct EstimateOptions {
  double p = 2.0;
  std::vector<double> p_curve = {1.25, 1.5, 2.0, 3.0};
  double slack = 0.1;
  int f_samples = 4096;
};

/// Parsed scenario file. `raw` keeps the (override-applied) JSON for echoing in reports.
struct Scenario {
  json raw;
  std::string name = "scenario";
  std::string base_dir = ".";
  std::uint64_t seed = 0;

  RectDomain domain;
  int degree = 3;
  int cells_x = 32;
  int cells_y = 32;

  MaterialSpec background;
  std::optional<double> contrast;        // inclusion = contrast x background
  std::optional<MaterialSpec> inclusion;  // independent inclusion material
  std::vector<Primitive> inclusions;
  double d0 = 0.0;
  double h1 = 0.05;

  json loads;
  SolverOptions solver;
  EstimateOptions estimates;
  UcpConfig ucp;
  std::string synthetic;  // "" or "quadratic"
  json sweep;
  json convergence;
};

/// key=value with a dotted path; the value is parsed as JSON when possible, else taken as a string.
void apply_override(json& doc, const std::string& assignment);

Scenario parse_scenario(const json& doc, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {},
                       std::optional<std::uint64_t> seed = std::nullopt);

BendingOperators background_operators(const Scenario& s);
BendingOperators inclusion_operators(const Scenario& s);
InclusionSet inclusion_set(const Scenario& s);
LoadSpec build_loads(const Scenario& s, const BendingOperators& background);

/// Everything run_solve computes, before serialization.
struct SolveOutcome {
  JumpClassification jump;
  CompatibilityResiduals compatibility;
  WorkReport works;
  FRatio f;
  double area = 0.0;
  std::optional<FatnessResult> fatness;
  SolveDiagnostics diag_u;
  SolveDiagnostics diag_u0;
  Eigen::Vector3d normalization_u = Eigen::Vector3d::Zero();
  Eigen::Vector3d normalization_u0 = Eigen::Vector3d::Zero();
  double normalization_scale_u = 0.0;
  double normalization_scale_u0 = 0.0;
  std::shared_ptr<Solution> u;
  std::shared_ptr<Solution> u0;
  double seconds = 0.0;
};

/// Runs compatibility, both solves, works, energy lemma, estimators and F. Errors name the failing stage.
SolveOutcome solve_scenario(const Scenario& s);

struct RunOptions {
  std::string out_dir;  // empty: do not write files
  int threads = 1;
};

json solve_record(const Scenario& s, const SolveOutcome& o);
json run_solve(Scenario s, const RunOptions& opt);

/// Sweep over "radius" (disk radii as fractions of the domain width) or "contrast".
json run_sweep(Scenario s, const RunOptions& opt);

/// Runs the calibration over records produced by a sweep (each needs "area" and "works").
json calibrate_records(const std::vector<json>& records);
/// Calibrates from a JSONL file of sweep records, or runs the scenario's sweep when `table` is empty.
json run_calibrate(Scenario s, const RunOptions& opt, const std::string& table = {});

json ucp_record(const UcpReport& r);
json run_diagnose(Scenario s, const RunOptions& opt);

json run_convergence(Scenario s, const RunOptions& opt);

/// Line-delimited JSON records and a flat CSV table (files are overwritten).
void write_jsonl(const std::string& path, const std::vector<json>& records);
void write_csv(const std::string& path, const std::vector<std::string>& columns, const std::vector<json>& rows);

/// Process exit code of an error kind.
int exit_code(ErrorKind kind);

}  // namespace nanoplate
