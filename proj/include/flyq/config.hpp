#pragma once

// Experiment configuration: a small key = value format with [sections],
// comments, quoted "magnitude unit" strings and lists. Every physical
// quantity carries an explicit unit; files either declare SI unit scales or
// run in natural units (hbar = 1). Unknown keys are rejected and parse
// errors carry line numbers.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flyq/scenarios.hpp"
#include "flyq/trapped.hpp"

namespace flyq {

enum class ScenarioKind { fig2, gate, twobody, trapped };

struct GateScenario {
  enum class Kind { not_gate, phase_gate };
  Kind kind = Kind::not_gate;
  NotProfile profile = NotProfile::gaussian;
  double length = 1.0;   // potential width (internal units)
  double omega_q = 0.5;  // qubit angular frequency
  double v0 = 1.0;
  double delta_x = 0.05;
  double a0 = 0.5, a1 = 0.5, theta = 0.0;
  double phase = M_PI / 2.0;  // PHASE gate angle
  double k0_dx = 0.0;         // optional; enables the grid tier when > 0
  int samples = 80;
};

struct Fig2Overrides {
  Fig2Params params;
};

struct TwoBodyScenario {
  enum class Gate { cnot, cphase };
  Gate gate = Gate::cnot;
  double m1 = 1.0, m2 = 1.0;
  double v1 = 1.0, v2 = 0.0;
  double dx1 = 0.05, dx2 = 0.05;
  double x1 = 0.0, x2 = 0.0;
  double correlation = 0.0;
  double omega_q = 0.5;  // target qubit
  double omega_c = 0.3;  // control qubit
  double length = 1.0;   // interaction width in the relative coordinate
  double p = 0.5;        // control excited population
  double phase = M_PI / 2.0;  // cPHASE angle
  int samples = 60;
};

struct TrappedScenario {
  enum class Preset { surfing, shuttling, rydberg, custom };
  Preset preset = Preset::custom;
  TrapConfig::Kind kind = TrapConfig::Kind::harmonic;
  double delta_x = 0.0;     // harmonic ground-state spread
  double box_length = 0.0;  // box alternative
  double mass = 0.0, v0 = 0.0, tau = 0.0;
  bool integrate = false;  // also integrate the Dyson deviation time series
};

struct ExperimentConfig {
  ScenarioKind scenario = ScenarioKind::fig2;
  long seed = 0;
  std::string output = "out";
  bool tier_clock = true;
  bool tier_perturbative = true;
  bool tier_grid = false;

  bool natural_units = true;
  double length_scale_si = 1.0;  // meters per internal length unit
  double time_scale_si = 1.0;    // seconds per internal time unit

  std::optional<GateScenario> gate;
  std::optional<Fig2Overrides> fig2;
  std::optional<TwoBodyScenario> twobody;
  std::optional<TrappedScenario> trapped;

  // unit factor used when each numeric field was parsed, for sweep overrides
  std::map<std::string, double> field_units;
};

/// Parse and schema-check; ConfigError messages carry "line N:" anchors.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct SweepAxis {
  std::string name;
  double* target = nullptr;
  double unit = 1.0;  // multiply CLI values by this before writing
};

/// Numeric fields addressable as "<section>.<key>" for sweeps.
std::vector<SweepAxis> sweep_axes(ExperimentConfig& cfg);

}  // namespace flyq
