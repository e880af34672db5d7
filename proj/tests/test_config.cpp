#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flyq/config.hpp"
#include "flyq/runner.hpp"

using namespace flyq;

namespace {

const char* kGateConfig = R"(
scenario = "gate"
seed = 9
output = "x"
tiers = ["clock"]

[units]
system = "SI"
length = "1 um"
time = "1 ns"

[gate]
kind = "NOT"
length = "2 um"
omega_q = "0.25 rad/ns"
v0 = "1 um/ns"
delta_x = "100 nm"
)";

}  // namespace

TEST_CASE("gate config parses with SI units") {
  ExperimentConfig cfg = parse_config_text(kGateConfig);
  CHECK(cfg.scenario == ScenarioKind::gate);
  CHECK(cfg.seed == 9);
  CHECK(cfg.tier_clock);
  CHECK_FALSE(cfg.tier_perturbative);
  CHECK_FALSE(cfg.natural_units);
  REQUIRE(cfg.gate.has_value());
  CHECK(cfg.gate->length == doctest::Approx(2.0));       // 2 um in um
  CHECK(cfg.gate->omega_q == doctest::Approx(0.25));     // rad/ns in 1/ns
  CHECK(cfg.gate->v0 == doctest::Approx(1.0));
  CHECK(cfg.gate->delta_x == doctest::Approx(0.1));      // 100 nm in um
  CHECK(cfg.gate->a0 == doctest::Approx(0.5));           // default
}

TEST_CASE("unit conversions cover the cross tables") {
  std::string text = R"(
scenario = "gate"
[units]
system = "SI"
length = "1 nm"
time = "1 ps"
[gate]
kind = "NOT"
length = "0.001 um"
omega_q = "2 rad/ns"
v0 = "1000 m/s"
delta_x = "1 A"
)";
  ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.gate->length == doctest::Approx(1.0));            // 0.001 um = 1 nm
  CHECK(cfg.gate->omega_q == doctest::Approx(0.002));         // 2/ns = 0.002/ps
  CHECK(cfg.gate->v0 == doctest::Approx(1.0));                // 1000 m/s = 1 nm/ps
  CHECK(cfg.gate->delta_x == doctest::Approx(0.1));           // 1 A = 0.1 nm
}

TEST_CASE("natural configs require the nat token") {
  std::string good = R"(
scenario = "gate"
[gate]
kind = "PHASE"
length = "1 nat"
omega_q = "0.5 nat"
v0 = "1 nat"
delta_x = "0.05 nat"
)";
  CHECK(parse_config_text(good).gate->omega_q == doctest::Approx(0.5));

  std::string bad = good;
  bad.replace(bad.find("0.5 nat"), 7, "0.5 GHz");
  CHECK_THROWS_AS(parse_config_text(bad), ConfigError);
}

TEST_CASE("missing units on a physical quantity is an error") {
  std::string text = R"(
scenario = "gate"
[gate]
kind = "NOT"
length = 1.0
omega_q = "0.5 nat"
v0 = "1 nat"
delta_x = "0.05 nat"
)";
  try {
    parse_config_text(text);
    FAIL("should have thrown");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("line") != std::string::npos);
    CHECK(msg.find("unit") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected with line anchors") {
  std::string text = R"(
scenario = "fig2"

[fig2]
samples = 10
banana = 3
)";
  try {
    parse_config_text(text);
    FAIL("should have thrown");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("line 6") != std::string::npos);
    CHECK(msg.find("banana") != std::string::npos);
  }
}

TEST_CASE("unknown sections and scenarios are rejected") {
  CHECK_THROWS_AS(parse_config_text("scenario = \"warp\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("scenario = \"fig2\"\n[warp]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("scenario = \"fig2\"\nscenario = \"fig2\"\n"),
                  ConfigError);
}

TEST_CASE("SI system needs declared scales") {
  CHECK_THROWS_AS(parse_config_text("scenario = \"fig2\"\n[units]\nsystem = \"SI\"\n"),
                  ConfigError);
}

TEST_CASE("sweep axes resolve with their parse units") {
  ExperimentConfig cfg = parse_config_text(kGateConfig);
  bool found = false;
  for (const auto& ax : sweep_axes(cfg)) {
    if (ax.name == "gate.delta_x") {
      found = true;
      // config gave delta_x in nm; sweep values follow that unit
      CHECK(ax.unit == doctest::Approx(1e-3));
      *ax.target = 50.0 * ax.unit;
    }
  }
  CHECK(found);
  CHECK(cfg.gate->delta_x == doctest::Approx(0.05));
}

TEST_CASE("validate reports a support violation for explicit placements") {
  std::string text = R"(
scenario = "twobody"
[twobody]
gate = "cphase"
m1 = "1 nat"
m2 = "1 nat"
v1 = "1 nat"
v2 = "0 nat"
delta_x1 = "0.05 nat"
delta_x2 = "0.05 nat"
x1 = "0.5 nat"
x2 = "0.0 nat"
omega_q = "0.4 nat"
length = "1 nat"
)";
  ExperimentConfig cfg = parse_config_text(text);
  ValidationReport report = validate_scenario(cfg);
  CHECK_FALSE(report.ok);
  bool found = false;
  for (const auto& line : report.lines) {
    found = found || line.find("support_check = FAIL") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("validate warns about the strong-decoherence regime") {
  std::string text = R"(
scenario = "gate"
[gate]
kind = "NOT"
length = "1 nat"
omega_q = "10 nat"
v0 = "1 nat"
delta_x = "0.1 nat"
)";
  ExperimentConfig cfg = parse_config_text(text);
  ValidationReport report = validate_scenario(cfg);
  CHECK(report.warnings);
  bool found = false;
  for (const auto& line : report.lines) {
    found = found || line.find("strong-decoherence") != std::string::npos;
  }
  CHECK(found);
}

TEST_CASE("fig2 defaults validate cleanly") {
  ExperimentConfig cfg = parse_config_text("scenario = \"fig2\"\n");
  ValidationReport report = validate_scenario(cfg);
  CHECK(report.ok);
  CHECK_FALSE(report.warnings);
  bool eps_ok = false;
  for (const auto& line : report.lines) {
    if (line.rfind("epsilon = ", 0) == 0) {
      eps_ok = std::stod(line.substr(10)) < 0.3;
    }
  }
  CHECK(eps_ok);
}
