#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "nanoplate/harness.hpp"

using namespace nanoplate;

#ifndef NANOPLATE_SOURCE_DIR
#define NANOPLATE_SOURCE_DIR "."
#endif

namespace {

std::string scenario_path(const std::string& name) { return std::string(NANOPLATE_SOURCE_DIR) + "/scenarios/" + name; }

Scenario small_reference(std::vector<std::string> extra = {}) {
  std::vector<std::string> o = {"space.cells_x=12", "space.cells_y=12"};
  o.insert(o.end(), extra.begin(), extra.end());
  return load_scenario(scenario_path("reference.json"), o);
}

ErrorKind kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidInput;
}

}  // namespace

TEST_CASE("dotted overrides") {
  json doc = {{"a", {{"b", 1}}}};
  apply_override(doc, "a.b=2.5");
  apply_override(doc, "a.c=[1,2]");
  apply_override(doc, "name=plain text");
  apply_override(doc, "x.y.z=true");
  CHECK(doc["a"]["b"] == 2.5);
  CHECK(doc["a"]["c"] == json::array({1, 2}));
  CHECK(doc["name"] == "plain text");
  CHECK(doc["x"]["y"]["z"] == true);
  CHECK(kind_of([&] { apply_override(doc, "novalue"); }) == ErrorKind::InvalidInput);
}

TEST_CASE("scenario parsing") {
  const Scenario s = load_scenario(scenario_path("reference.json"), {}, 7);
  CHECK(s.seed == 7);
  CHECK(s.cells_x == 32);
  CHECK(s.inclusions.size() == 1);
  REQUIRE(s.contrast);
  CHECK(*s.contrast == 2.0);
  CHECK(s.ucp.probes.size() == 6);
  const Scenario t = load_scenario(scenario_path("reference.json"), {}, 7);
  CHECK(t.ucp.probes[5] == s.ucp.probes[5]);
  const Scenario u = load_scenario(scenario_path("reference.json"), {}, 8);
  CHECK(u.ucp.probes[5] != s.ucp.probes[5]);

  CHECK(kind_of([] { (void)small_reference({"geometry.inclusions=[{\"type\":\"blob\"}]"}); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { (void)small_reference({"solver.method=\"gauss\""}); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { (void)load_scenario(scenario_path("missing.json")); }) == ErrorKind::InvalidInput);
}

TEST_CASE("errors name the failing stage and map to exit codes") {
  std::string msg;
  const auto k = kind_of([] { (void)solve_scenario(small_reference({"loads={\"preset\":\"constant_shear\",\"shear\":1.0}"})); },
                         &msg);
  CHECK(k == ErrorKind::IncompatibleLoads);
  CHECK(msg.find("stage compatibility") != std::string::npos);
  CHECK(msg.find("total force integral") != std::string::npos);

  const auto g = kind_of(
      [] {
        (void)solve_scenario(
            small_reference({"geometry.inclusions=[{\"type\":\"disk\",\"center\":[0.02,0.5],\"radius\":0.1}]"}));
      },
      &msg);
  CHECK(g == ErrorKind::InvalidInput);
  CHECK(msg.find("stage geometry") != std::string::npos);

  CHECK(exit_code(ErrorKind::InvalidInput) == 2);
  CHECK(exit_code(ErrorKind::IncompatibleLoads) == 3);
  CHECK(exit_code(ErrorKind::SolverFailure) == 4);
  CHECK(exit_code(ErrorKind::DiagnosticsFailure) == 5);
}

TEST_CASE("solve record carries works, units and the scenario echo") {
  const Scenario s = small_reference();
  const json r = run_solve(s, {});
  CHECK(r["schema_id"] == kReportSchema);
  CHECK(r["works"]["bracket_ok"] == true);
  CHECK(r["works"]["gap"].get<double>() > 0.0);
  CHECK(r["jump"]["kind"] == "stiffer");
  CHECK(r.contains("units"));
  CHECK(r["scenario_echo"]["space"]["cells_x"] == 12);
  CHECK(r["fatness"]["fat"] == false);
}

TEST_CASE("sweeps need at least three points") {
  CHECK(kind_of([] { (void)run_sweep(small_reference({"sweep.values=[0.1]"}), {}); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { (void)run_sweep(small_reference({"sweep.values=[0.1,0.12]"}), {}); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { (void)calibrate_records({}); }) == ErrorKind::InvalidInput);
}

TEST_CASE("convergence on the manufactured cosine") {
  const json r = run_convergence(load_scenario(scenario_path("manufactured.json"), {"convergence.meshes=[8,16]"}), {});
  const auto& rows = r["rows"];
  REQUIRE(rows.size() == 2);
  CHECK(rows[1]["order_H3"].get<double>() >= 0.7);
  CHECK(rows[1]["H2"].get<double>() < rows[0]["H2"].get<double>());
  CHECK(r["monotone"] == true);

  const json p = run_convergence(
      load_scenario(scenario_path("manufactured.json"), {"convergence.case=\"paraboloid\"", "convergence.meshes=[4,8]"}),
      {});
  for (const auto& row : p["rows"]) {
    CHECK(row["L2"].get<double>() <= 1e-9);
    CHECK(row["H2"].get<double>() <= 1e-9);
  }
}

TEST_CASE("output files") {
  const auto dir = std::filesystem::temp_directory_path() / "nanoplate_harness_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_jsonl((dir / "a.jsonl").string(), {json{{"x", 1}}, json{{"x", 2}}});
  write_csv((dir / "a.csv").string(), {"x", "y"}, {json{{"x", 1}}, json{{"x", 2.5}, {"y", "q"}}});
  std::ifstream j(dir / "a.jsonl"), c(dir / "a.csv");
  std::string line;
  int n = 0;
  while (std::getline(j, line)) {
    CHECK(json::parse(line)["x"].get<int>() == ++n);
  }
  CHECK(n == 2);
  std::getline(c, line);
  CHECK(line == "x,y");
  std::getline(c, line);
  CHECK(line == "1,");
  std::filesystem::remove_all(dir);
}
