#pragma once

// Experiment orchestration: runs a parsed configuration through the selected
// solver tiers, emits deterministic CSV plus a run manifest, fans sweeps out
// over a worker pool and produces dry-run diagnostics.

#include <string>
#include <utility>
#include <vector>

#include "flyq/config.hpp"

namespace flyq {

struct TrajectoryRecord {
  std::vector<double> times;
  // NaN marks a disabled tier; emitted as an empty CSV field
  std::vector<double> f_pert, s_pert_nats, s_pert_bits;
  std::vector<double> f_clock, s_clock_nats;
  std::vector<double> fid_approx_vs_grid;

  double epsilon = 0.0;
  std::vector<std::pair<std::string, std::string>> metadata;  // manifest lines
  std::vector<std::pair<std::string, double>> summary;        // sweep metrics
};

/// Run the configured scenario through its tiers. Flight scenarios fill the
/// trajectory columns; trapped scenarios fill times/deviation via the same
/// record (deviation stored in f_clock's place is not done -- they use the
/// summary plus an optional time series written separately).
TrajectoryRecord run_scenario(const ExperimentConfig& cfg);

struct RunArtifacts {
  std::string csv_path;
  std::string manifest_path;
};

/// run_scenario + CSV + manifest under cfg.output (created if needed).
RunArtifacts run_experiment(const ExperimentConfig& cfg);

struct SweepRow {
  int index = 0;
  double value = 0.0;
  bool ok = false;
  std::string error;
  std::vector<std::pair<std::string, double>> metrics;
};

/// One scenario run per value of the named axis; failed points become error
/// rows and the sweep continues. Points are independent, so rows do not
/// depend on the worker count, and output order follows the input order.
std::vector<SweepRow> sweep_scenario(const ExperimentConfig& cfg, const std::string& axis,
                                     const std::vector<double>& values, int workers = 1);

/// sweep_scenario + CSV under cfg.output.
std::string sweep_experiment(const ExperimentConfig& cfg, const std::string& axis,
                             const std::vector<double>& values, int workers = 1);

struct ValidationReport {
  std::vector<std::string> lines;
  bool ok = true;        // hard checks passed
  bool warnings = false; // soft regime warnings
};

/// Diagnostics without running any solver: epsilon, clock-approximation
/// ratio, support clearance, stability bounds, regime warnings.
ValidationReport validate_scenario(const ExperimentConfig& cfg);

/// Text rows of the trapped-qubit magnitude table.
std::vector<std::string> magnitude_table_lines();

std::string format_double(double v);  // 17 significant digits

}  // namespace flyq
