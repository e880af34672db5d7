#include "flyq/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace flyq {

namespace {

constexpr double kHbarSI = 1.054571817e-34;  // J s

struct RawValue {
  enum class Type { number, string, boolean, list };
  Type type = Type::number;
  double number = 0.0;
  std::string text;
  bool boolean = false;
  std::vector<std::string> list;
  int line = 0;
};

struct RawConfig {
  // section -> key -> value; top-level keys live under ""
  std::map<std::string, std::map<std::string, RawValue>> sections;
};

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& s, double* out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    *out = std::stod(s, &pos);
  } catch (...) {
    return false;
  }
  return pos == s.size();
}

RawValue parse_value(const std::string& text, int line) {
  RawValue v;
  v.line = line;
  std::string s = trim(text);
  if (s.empty()) fail(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
    v.type = RawValue::Type::string;
    v.text = s.substr(1, s.size() - 2);
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, "unterminated list");
    v.type = RawValue::Type::list;
    std::string body = s.substr(1, s.size() - 2);
    std::string item;
    std::istringstream iss(body);
    while (std::getline(iss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      if (item.front() == '"' && item.back() == '"' && item.size() >= 2) {
        item = item.substr(1, item.size() - 2);
      }
      v.list.push_back(item);
    }
    return v;
  }
  if (s == "true" || s == "false") {
    v.type = RawValue::Type::boolean;
    v.boolean = s == "true";
    return v;
  }
  if (!parse_number(s, &v.number)) fail(line, "cannot parse value '" + s + "'");
  v.type = RawValue::Type::number;
  return v;
}

RawConfig parse_raw(const std::string& text) {
  RawConfig raw;
  std::string section;
  std::istringstream iss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(iss, line)) {
    ++lineno;
    std::string s = trim(line);
    std::size_t hash = s.find('#');
    if (hash != std::string::npos) s = trim(s.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(lineno, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail(lineno, "empty section name");
      raw.sections[section];
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(lineno, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail(lineno, "empty key");
    if (raw.sections[section].count(key)) fail(lineno, "duplicate key '" + key + "'");
    raw.sections[section][key] = parse_value(s.substr(eq + 1), lineno);
  }
  return raw;
}

// ---------------------------------------------------------------------------
// units

enum class Dim { length, time, velocity, angular_frequency, energy, mass, area,
                 dimensionless };

const std::map<std::string, double>& length_units() {
  static const std::map<std::string, double> table{
      {"m", 1.0},   {"cm", 1e-2},  {"mm", 1e-3}, {"um", 1e-6},
      {"nm", 1e-9}, {"pm", 1e-12}, {"A", 1e-10}};
  return table;
}

const std::map<std::string, double>& time_units() {
  static const std::map<std::string, double> table{
      {"s", 1.0},   {"ms", 1e-3},  {"us", 1e-6},
      {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}};
  return table;
}

const std::map<std::string, double>& unit_table(Dim dim) {
  static const std::map<std::string, double> velocity = [] {
    std::map<std::string, double> v;
    for (const auto& [ln, lv] : length_units()) {
      for (const auto& [tn, tv] : time_units()) v[ln + "/" + tn] = lv / tv;
    }
    return v;
  }();
  static const std::map<std::string, double> angfreq = [] {
    std::map<std::string, double> v;
    for (const auto& [tn, tv] : time_units()) {
      v["rad/" + tn] = 1.0 / tv;
      v["1/" + tn] = 1.0 / tv;
    }
    return v;
  }();
  static const std::map<std::string, double> energy{
      {"J", 1.0},
      {"eV", 1.602176634e-19},
      {"meV", 1.602176634e-22},
      {"ueV", 1.602176634e-25},
      {"neV", 1.602176634e-28}};
  static const std::map<std::string, double> mass{
      {"kg", 1.0}, {"g", 1e-3}, {"me", 9.1093837015e-31}, {"u", 1.66053906660e-27}};
  static const std::map<std::string, double> area = [] {
    std::map<std::string, double> v;
    for (const auto& [ln, lv] : length_units()) v[ln + "^2"] = lv * lv;
    return v;
  }();
  static const std::map<std::string, double> none{{"1", 1.0}};
  switch (dim) {
    case Dim::length: return length_units();
    case Dim::time: return time_units();
    case Dim::velocity: return velocity;
    case Dim::angular_frequency: return angfreq;
    case Dim::energy: return energy;
    case Dim::mass: return mass;
    case Dim::area: return area;
    case Dim::dimensionless: return none;
  }
  return none;
}

// Conversion from one SI-expressed unit into internal (natural) units.
double internal_factor(Dim dim, double si_unit, double l0, double t0) {
  switch (dim) {
    case Dim::length: return si_unit / l0;
    case Dim::time: return si_unit / t0;
    case Dim::velocity: return si_unit * t0 / l0;
    case Dim::angular_frequency: return si_unit * t0;
    case Dim::energy: return si_unit / (kHbarSI / t0);
    case Dim::mass: return si_unit / (kHbarSI * t0 / (l0 * l0));
    case Dim::area: return si_unit / (l0 * l0);
    case Dim::dimensionless: return si_unit;
  }
  return si_unit;
}

const char* dim_name(Dim dim) {
  switch (dim) {
    case Dim::length: return "length";
    case Dim::time: return "time";
    case Dim::velocity: return "velocity";
    case Dim::angular_frequency: return "angular frequency";
    case Dim::energy: return "energy";
    case Dim::mass: return "mass";
    case Dim::area: return "area";
    case Dim::dimensionless: return "dimensionless";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// schema helpers

class SectionReader {
public:
  SectionReader(ExperimentConfig* cfg, const std::string& name,
                std::map<std::string, RawValue> values)
      : cfg_(cfg), name_(name), values_(std::move(values)) {}

  ~SectionReader() = default;

  void finish() {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) {
        fail(value.line, "unknown key '" + qualified(key) + "'");
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double quantity(const std::string& key, Dim dim, double fallback,
                  bool required = false) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      if (required) {
        throw ConfigError("missing required key '" + qualified(key) + "'");
      }
      cfg_->field_units[qualified(key)] = 1.0;
      return fallback;
    }
    used_.insert(key);
    const RawValue& v = it->second;
    if (dim == Dim::dimensionless) {
      if (v.type != RawValue::Type::number) {
        fail(v.line, "'" + qualified(key) + "' must be a plain number");
      }
      cfg_->field_units[qualified(key)] = 1.0;
      return v.number;
    }
    if (v.type != RawValue::Type::string) {
      fail(v.line, "'" + qualified(key) + "' needs a unit, e.g. \"10 nm\"");
    }
    std::istringstream iss(v.text);
    double magnitude = 0.0;
    std::string unit, extra;
    if (!(iss >> magnitude >> unit) || (iss >> extra)) {
      fail(v.line, "'" + qualified(key) + "': expected \"<magnitude> <unit>\"");
    }
    double factor = 0.0;
    if (cfg_->natural_units) {
      if (unit != "nat") {
        fail(v.line, "'" + qualified(key) + "': natural-unit configs use \"nat\"");
      }
      factor = 1.0;
    } else {
      const auto& table = unit_table(dim);
      auto uit = table.find(unit);
      if (uit == table.end()) {
        fail(v.line, "'" + qualified(key) + "': unknown " + std::string(dim_name(dim)) +
                         " unit '" + unit + "'");
      }
      factor = internal_factor(dim, uit->second, cfg_->length_scale_si,
                               cfg_->time_scale_si);
    }
    cfg_->field_units[qualified(key)] = factor;
    return magnitude * factor;
  }

  double number(const std::string& key, double fallback) {
    return quantity(key, Dim::dimensionless, fallback);
  }

  long integer(const std::string& key, long fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    used_.insert(key);
    if (it->second.type != RawValue::Type::number) {
      fail(it->second.line, "'" + qualified(key) + "' must be an integer");
    }
    return static_cast<long>(std::llround(it->second.number));
  }

  bool boolean(const std::string& key, bool fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    used_.insert(key);
    if (it->second.type != RawValue::Type::boolean) {
      fail(it->second.line, "'" + qualified(key) + "' must be true or false");
    }
    return it->second.boolean;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    used_.insert(key);
    if (it->second.type != RawValue::Type::string) {
      fail(it->second.line, "'" + qualified(key) + "' must be a string");
    }
    return it->second.text;
  }

  std::vector<std::string> list(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return {};
    used_.insert(key);
    if (it->second.type != RawValue::Type::list) {
      fail(it->second.line, "'" + qualified(key) + "' must be a list");
    }
    return it->second.list;
  }

  int line_of(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? 0 : it->second.line;
  }

private:
  std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  ExperimentConfig* cfg_;
  std::string name_;
  std::map<std::string, RawValue> values_;
  std::set<std::string> used_;
};

double parse_si_scale(const RawValue& v, Dim dim, const char* what) {
  if (v.type != RawValue::Type::string) {
    fail(v.line, std::string(what) + " must be a quoted \"<magnitude> <unit>\"");
  }
  std::istringstream iss(v.text);
  double magnitude = 0.0;
  std::string unit;
  if (!(iss >> magnitude >> unit) || magnitude <= 0.0) {
    fail(v.line, std::string(what) + ": expected \"<magnitude> <unit>\"");
  }
  const auto& table = unit_table(dim);
  auto it = table.find(unit);
  if (it == table.end()) fail(v.line, std::string(what) + ": unknown unit '" + unit + "'");
  return magnitude * it->second;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  RawConfig raw = parse_raw(text);
  ExperimentConfig cfg;

  // [units] first: it decides how every other quantity is read.
  if (raw.sections.count("units")) {
    auto& sec = raw.sections["units"];
    std::string system = "natural";
    if (sec.count("system")) {
      if (sec["system"].type != RawValue::Type::string) {
        fail(sec["system"].line, "units.system must be \"natural\" or \"SI\"");
      }
      system = sec["system"].text;
    }
    if (system == "natural") {
      cfg.natural_units = true;
    } else if (system == "SI") {
      cfg.natural_units = false;
      if (!sec.count("length") || !sec.count("time")) {
        throw ConfigError("SI configs must declare units.length and units.time scales");
      }
      cfg.length_scale_si = parse_si_scale(sec["length"], Dim::length, "units.length");
      cfg.time_scale_si = parse_si_scale(sec["time"], Dim::time, "units.time");
    } else {
      fail(sec["system"].line, "units.system must be \"natural\" or \"SI\"");
    }
    for (const auto& [key, value] : sec) {
      if (key != "system" && key != "length" && key != "time") {
        fail(value.line, "unknown key 'units." + key + "'");
      }
    }
    raw.sections.erase("units");
  }

  {
    SectionReader top(&cfg, "", raw.sections[""]);
    std::string scenario = top.text("scenario", "");
    if (scenario == "fig2") {
      cfg.scenario = ScenarioKind::fig2;
    } else if (scenario == "gate") {
      cfg.scenario = ScenarioKind::gate;
    } else if (scenario == "twobody") {
      cfg.scenario = ScenarioKind::twobody;
    } else if (scenario == "trapped") {
      cfg.scenario = ScenarioKind::trapped;
    } else {
      throw ConfigError(scenario.empty()
                            ? "missing required key 'scenario'"
                            : "line " + std::to_string(top.line_of("scenario")) +
                                  ": unknown scenario '" + scenario + "'");
    }
    cfg.seed = top.integer("seed", 0);
    cfg.output = top.text("output", "out");
    std::vector<std::string> tiers = top.list("tiers");
    if (!tiers.empty()) {
      cfg.tier_clock = cfg.tier_perturbative = cfg.tier_grid = false;
      for (const auto& t : tiers) {
        if (t == "clock") cfg.tier_clock = true;
        else if (t == "perturbative") cfg.tier_perturbative = true;
        else if (t == "grid") cfg.tier_grid = true;
        else fail(top.line_of("tiers"), "unknown tier '" + t + "'");
      }
    }
    top.finish();
    raw.sections.erase("");
  }

  auto take_section = [&raw](const std::string& name) {
    std::map<std::string, RawValue> out;
    auto it = raw.sections.find(name);
    if (it != raw.sections.end()) {
      out = std::move(it->second);
      raw.sections.erase(it);
    }
    return out;
  };

  switch (cfg.scenario) {
    case ScenarioKind::fig2: {
      SectionReader sec(&cfg, "fig2", take_section("fig2"));
      Fig2Overrides f;
      f.params.length = sec.quantity("length", Dim::length, f.params.length);
      f.params.v0 = sec.quantity("v0", Dim::velocity, f.params.v0);
      f.params.omega_q = sec.quantity("omega_q", Dim::angular_frequency, f.params.omega_q);
      f.params.chi0 = sec.quantity("chi0", Dim::angular_frequency, f.params.chi0);
      f.params.dx = sec.number("delta_x_over_length", f.params.dx);
      f.params.k0_dx = sec.number("k0_dx", f.params.k0_dx);
      f.params.samples = static_cast<int>(sec.integer("samples", f.params.samples));
      f.params.quad_nodes = static_cast<int>(sec.integer("nodes", f.params.quad_nodes));
      sec.finish();
      cfg.fig2 = f;
      break;
    }
    case ScenarioKind::gate: {
      SectionReader sec(&cfg, "gate", take_section("gate"));
      GateScenario g;
      std::string kind = sec.text("kind", "NOT");
      if (kind == "NOT") g.kind = GateScenario::Kind::not_gate;
      else if (kind == "PHASE") g.kind = GateScenario::Kind::phase_gate;
      else fail(sec.line_of("kind"), "gate.kind must be \"NOT\" or \"PHASE\"");
      std::string profile = sec.text("profile", "gaussian");
      if (profile == "gaussian") g.profile = NotProfile::gaussian;
      else if (profile == "smoothrect") g.profile = NotProfile::smoothed_rect;
      else fail(sec.line_of("profile"), "gate.profile must be \"gaussian\" or \"smoothrect\"");
      g.length = sec.quantity("length", Dim::length, g.length, true);
      g.omega_q = sec.quantity("omega_q", Dim::angular_frequency, g.omega_q, true);
      g.v0 = sec.quantity("v0", Dim::velocity, g.v0, true);
      g.delta_x = sec.quantity("delta_x", Dim::length, g.delta_x, true);
      g.a0 = sec.number("a0", g.a0);
      g.a1 = sec.number("a1", g.a1);
      g.theta = sec.number("theta", g.theta);
      g.phase = sec.number("phase", g.phase);
      g.k0_dx = sec.number("k0_dx", g.k0_dx);
      g.samples = static_cast<int>(sec.integer("samples", g.samples));
      if (std::abs(g.a0 + g.a1 - 1.0) > 1e-12 || g.a0 < 0.0 || g.a1 < 0.0) {
        throw ConfigError("gate.a0 and gate.a1 must be populations summing to 1");
      }
      sec.finish();
      cfg.gate = g;
      break;
    }
    case ScenarioKind::twobody: {
      SectionReader sec(&cfg, "twobody", take_section("twobody"));
      TwoBodyScenario t;
      std::string gate = sec.text("gate", "cnot");
      if (gate == "cnot") t.gate = TwoBodyScenario::Gate::cnot;
      else if (gate == "cphase") t.gate = TwoBodyScenario::Gate::cphase;
      else fail(sec.line_of("gate"), "twobody.gate must be \"cnot\" or \"cphase\"");
      t.m1 = sec.quantity("m1", Dim::mass, t.m1, true);
      t.m2 = sec.quantity("m2", Dim::mass, t.m2, true);
      t.v1 = sec.quantity("v1", Dim::velocity, t.v1, true);
      t.v2 = sec.quantity("v2", Dim::velocity, t.v2, true);
      t.dx1 = sec.quantity("delta_x1", Dim::length, t.dx1, true);
      t.dx2 = sec.quantity("delta_x2", Dim::length, t.dx2, true);
      t.x1 = sec.quantity("x1", Dim::length, t.x1, true);
      t.x2 = sec.quantity("x2", Dim::length, t.x2, true);
      t.correlation = sec.quantity("correlation", Dim::area, t.correlation);
      t.omega_q = sec.quantity("omega_q", Dim::angular_frequency, t.omega_q, true);
      t.omega_c = sec.quantity("omega_c", Dim::angular_frequency, t.omega_c);
      t.length = sec.quantity("length", Dim::length, t.length, true);
      t.p = sec.number("p", t.p);
      t.phase = sec.number("phase", t.phase);
      t.samples = static_cast<int>(sec.integer("samples", t.samples));
      if (t.p < 0.0 || t.p > 1.0) throw ConfigError("twobody.p must be in [0, 1]");
      sec.finish();
      cfg.twobody = t;
      break;
    }
    case ScenarioKind::trapped: {
      SectionReader sec(&cfg, "trapped", take_section("trapped"));
      TrappedScenario t;
      std::string preset = sec.text("preset", "custom");
      if (preset == "surfing") t.preset = TrappedScenario::Preset::surfing;
      else if (preset == "shuttling") t.preset = TrappedScenario::Preset::shuttling;
      else if (preset == "rydberg") t.preset = TrappedScenario::Preset::rydberg;
      else if (preset == "custom") t.preset = TrappedScenario::Preset::custom;
      else fail(sec.line_of("preset"), "unknown trapped.preset '" + preset + "'");
      std::string kind = sec.text("kind", "harmonic");
      if (kind == "harmonic") t.kind = TrapConfig::Kind::harmonic;
      else if (kind == "box") t.kind = TrapConfig::Kind::box;
      else fail(sec.line_of("kind"), "trapped.kind must be \"harmonic\" or \"box\"");
      bool custom = t.preset == TrappedScenario::Preset::custom;
      t.delta_x = sec.quantity("delta_x", Dim::length, t.delta_x,
                               custom && kind == "harmonic");
      t.box_length = sec.quantity("box_length", Dim::length, t.box_length,
                                  custom && kind == "box");
      t.mass = sec.quantity("mass", Dim::mass, t.mass, custom);
      t.v0 = sec.quantity("v0", Dim::velocity, t.v0, custom);
      t.tau = sec.quantity("tau", Dim::time, t.tau, custom);
      t.integrate = sec.boolean("integrate", t.integrate);
      sec.finish();
      cfg.trapped = t;
      break;
    }
  }

  for (const auto& [name, section] : raw.sections) {
    int line = section.empty() ? 0 : section.begin()->second.line;
    throw ConfigError("line " + std::to_string(line) + ": unknown section [" + name +
                      "]");
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<SweepAxis> sweep_axes(ExperimentConfig& cfg) {
  std::vector<SweepAxis> axes;
  auto add = [&cfg, &axes](const std::string& name, double* target) {
    double unit = 1.0;
    auto it = cfg.field_units.find(name);
    if (it != cfg.field_units.end() && it->second != 0.0) unit = it->second;
    axes.push_back({name, target, unit});
  };
  if (cfg.gate) {
    add("gate.length", &cfg.gate->length);
    add("gate.omega_q", &cfg.gate->omega_q);
    add("gate.v0", &cfg.gate->v0);
    add("gate.delta_x", &cfg.gate->delta_x);
    add("gate.a0", &cfg.gate->a0);
    add("gate.a1", &cfg.gate->a1);
    add("gate.theta", &cfg.gate->theta);
    add("gate.phase", &cfg.gate->phase);
    add("gate.k0_dx", &cfg.gate->k0_dx);
  }
  if (cfg.fig2) {
    add("fig2.length", &cfg.fig2->params.length);
    add("fig2.v0", &cfg.fig2->params.v0);
    add("fig2.omega_q", &cfg.fig2->params.omega_q);
    add("fig2.chi0", &cfg.fig2->params.chi0);
    add("fig2.delta_x_over_length", &cfg.fig2->params.dx);
    add("fig2.k0_dx", &cfg.fig2->params.k0_dx);
  }
  if (cfg.twobody) {
    add("twobody.m1", &cfg.twobody->m1);
    add("twobody.m2", &cfg.twobody->m2);
    add("twobody.v1", &cfg.twobody->v1);
    add("twobody.v2", &cfg.twobody->v2);
    add("twobody.delta_x1", &cfg.twobody->dx1);
    add("twobody.delta_x2", &cfg.twobody->dx2);
    add("twobody.correlation", &cfg.twobody->correlation);
    add("twobody.omega_q", &cfg.twobody->omega_q);
    add("twobody.p", &cfg.twobody->p);
  }
  if (cfg.trapped) {
    add("trapped.delta_x", &cfg.trapped->delta_x);
    add("trapped.box_length", &cfg.trapped->box_length);
    add("trapped.mass", &cfg.trapped->mass);
    add("trapped.v0", &cfg.trapped->v0);
    add("trapped.tau", &cfg.trapped->tau);
  }
  return axes;
}

}  // namespace flyq
