// nanoplate: batch driver for plate scenarios.
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nanoplate/error.hpp"
#include "nanoplate/harness.hpp"

namespace {

void print_summary(const std::string& command, const nanoplate::json& r) {
  if (command == "solve") {
    const auto& w = r["works"];
    std::cout << "W = " << w["W"] << "  W0 = " << w["W0"] << "  gap = " << w["gap"] << "\n"
              << "regime " << w["regime"] << "  bracket [" << w["bracket_low"] << ", " << w["bracket_high"]
              << "] ok=" << w["bracket_ok"] << "\n"
              << "rho_lower = " << w["rho_lower"] << "  rho_upper_fat = " << w["rho_upper_fat"]
              << "  rho_upper_general = " << w["rho_upper_general"] << "  F = " << w["F"] << "\n";
  } else if (command == "sweep") {
    for (const auto& p : r["points"]) {
      std::cout << p["sweep"]["axis"].get<std::string>() << " " << p["sweep"]["value"] << ": area " << p["area"]
                << " gap " << p["works"]["gap"] << "\n";
    }
    std::cout << "monotone=" << r["monotone"] << " all_fat=" << r["all_fat"] << "\n";
    if (!r["calibration"].is_null()) std::cout << "calibration " << r["calibration"].dump() << "\n";
  } else if (command == "convergence") {
    for (const auto& row : r["rows"]) std::cout << row.dump() << "\n";
    std::cout << "monotone=" << r["monotone"] << "\n";
  } else if (command == "diagnose") {
    for (const auto& p : r["probes"]) {
      std::cout << "probe " << p["center"] << ": ";
      if (!p["error"].get<std::string>().empty()) {
        std::cout << "error: " << p["error"].get<std::string>() << "\n";
      } else {
        std::cout << "K_emp " << p["K_emp"] << " N " << p["N"] << " N_bar " << p["N_bar"] << " monotone "
                  << p["monotone"] << " ap_min " << p["ap_min"] << "\n";
      }
    }
    for (const auto& w : r["warnings"]) std::cout << "warning: " << w.get<std::string>() << "\n";
  } else {
    std::cout << r.dump(1) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Size estimates and unique-continuation diagnostics for gradient-elastic plates"};
  app.require_subcommand(1, 1);

  std::string scenario;
  std::string out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string table;

  const std::vector<std::string> commands = {"solve", "sweep", "diagnose", "convergence", "calibrate"};
  const std::vector<std::string> help = {
      "solve u and u0, report works, bracket, estimators and F",
      "run the scenario's sweep block and calibrate",
      "unique-continuation diagnostics on u0 (or a synthetic field)",
      "manufactured-solution convergence table",
      "calibration constants from a sweep (or a --table of sweep records)",
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(commands[i], help[i]);
    sub->add_option("--scenario", scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory for reports");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for randomized probe grids");
    sub->add_option("--override", overrides, "dotted.key=value (repeatable)")->take_all();
    if (commands[i] == "calibrate") {
      sub->add_option("--table", table, "JSONL file of sweep records")->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto s = nanoplate::load_scenario(scenario, overrides, seed);
    nanoplate::RunOptions opt{out_dir, threads};
    nanoplate::json result;
    if (command == "solve") {
      result = nanoplate::run_solve(std::move(s), opt);
    } else if (command == "sweep") {
      result = nanoplate::run_sweep(std::move(s), opt);
    } else if (command == "diagnose") {
      result = nanoplate::run_diagnose(std::move(s), opt);
    } else if (command == "convergence") {
      result = nanoplate::run_convergence(std::move(s), opt);
    } else {
      result = nanoplate::run_calibrate(std::move(s), opt, table);
    }
    print_summary(command, result);
    return 0;
  } catch (const nanoplate::Error& e) {
    std::cerr << "nanoplate " << command << ": " << e.what() << "\n";
    return nanoplate::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "nanoplate " << command << ": " << e.what() << "\n";
    return 4;
  }
}
