// Command-line front end: run experiments from config files, sweep one
// parameter over a list of values, validate configurations without running,
// and print the trapped-qubit magnitude table.
//
// Exit codes: 0 ok, 2 config error, 3 solver error.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flyq/runner.hpp"
#include "flyq/version.hpp"

namespace {

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    double v = std::stod(item, &pos);
    if (pos != item.size()) throw flyq::ConfigError("bad sweep value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flyq - reservoir-free decoherence of flying qubits"};
  app.set_version_flag("--version", flyq::kVersion);
  app.require_subcommand(1);

  std::string config_path, axis, values_csv, output_override;
  int workers = 1;

  auto* run_cmd = app.add_subcommand("run", "run a config through its solver tiers");
  run_cmd->add_option("config", config_path, "config file")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "rerun a config over an axis of values");
  sweep_cmd->add_option("config", config_path, "config file")->required();
  sweep_cmd->add_option("--axis", axis, "numeric config field, e.g. gate.delta_x")
      ->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated list")->required();
  sweep_cmd->add_option("--workers", workers, "worker threads (result-identical)");

  auto* validate_cmd =
      app.add_subcommand("validate", "report diagnostics without running solvers");
  validate_cmd->add_option("config", config_path, "config file")->required();

  auto* table_cmd = app.add_subcommand("table", "print built-in tables");
  std::string table_name;
  table_cmd->add_option("name", table_name, "table name (trapped)")->required();

  auto* fig2_cmd = app.add_subcommand("fig2", "run the built-in qubit-flight preset");
  fig2_cmd->add_option("--output", output_override, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      flyq::ExperimentConfig cfg = flyq::parse_config_file(config_path);
      flyq::RunArtifacts artifacts = flyq::run_experiment(cfg);
      std::cout << "wrote " << artifacts.csv_path << "\n";
      std::cout << "wrote " << artifacts.manifest_path << "\n";
      return 0;
    }
    if (sweep_cmd->parsed()) {
      flyq::ExperimentConfig cfg = flyq::parse_config_file(config_path);
      std::vector<double> values = parse_value_list(values_csv);
      std::string path = flyq::sweep_experiment(cfg, axis, values, workers);
      std::cout << "wrote " << path << "\n";
      return 0;
    }
    if (validate_cmd->parsed()) {
      flyq::ExperimentConfig cfg = flyq::parse_config_file(config_path);
      flyq::ValidationReport report = flyq::validate_scenario(cfg);
      for (const auto& line : report.lines) std::cout << line << "\n";
      std::cout << (report.ok ? "all checks passed" : "checks FAILED") << "\n";
      return 0;
    }
    if (table_cmd->parsed()) {
      if (table_name != "trapped") {
        std::cerr << "unknown table '" << table_name << "'\n";
        return 2;
      }
      for (const auto& line : flyq::magnitude_table_lines()) std::cout << line << "\n";
      return 0;
    }
    if (fig2_cmd->parsed()) {
      flyq::ExperimentConfig cfg;
      cfg.scenario = flyq::ScenarioKind::fig2;
      cfg.tier_grid = true;
      if (!output_override.empty()) cfg.output = output_override;
      flyq::RunArtifacts artifacts = flyq::run_experiment(cfg);
      std::cout << "wrote " << artifacts.csv_path << "\n";
      std::cout << "wrote " << artifacts.manifest_path << "\n";
      return 0;
    }
  } catch (const flyq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const flyq::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
