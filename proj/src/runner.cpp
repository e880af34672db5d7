#include "flyq/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "flyq/grid.hpp"
#include "flyq/version.hpp"

namespace flyq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kHbarSI = 1.054571817e-34;

Matrix sigma_x() {
  Matrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

Matrix sigma_z() {
  Matrix s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

std::vector<double> linear_grid(double t_end, int samples) {
  std::vector<double> g;
  g.reserve(samples + 1);
  for (int i = 0; i <= samples; ++i) g.push_back(t_end * i / samples);
  return g;
}

struct FlightSetup {
  FlightConfig cfg;
  DensityMatrix rho0;
  Vector psi0;        // pure initial internal state
  double mass = 0.0;  // > 0 enables the grid tier
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::pair<std::string, double>> extra_summary;
};

FlightSetup setup_fig2(const ExperimentConfig& cfg) {
  Fig2Params params = cfg.fig2 ? cfg.fig2->params : Fig2Params{};
  Fig2Scenario sc = fig2_preset(params);
  FlightSetup s;
  s.cfg = sc.config;
  s.rho0 = sc.rho0;
  Vector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  s.psi0 = plus;
  s.mass = sc.mass;
  s.metadata = {
      {"fig2.length", format_double(params.length)},
      {"fig2.omega_q", format_double(params.omega_q)},
      {"fig2.chi0", format_double(params.chi0)},
      {"fig2.delta_x", format_double(params.dx * params.length)},
      {"fig2.k0", format_double(params.k0_dx / (params.dx * params.length))},
      {"fig2.mass", format_double(sc.mass)},
  };
  return s;
}

FlightSetup setup_gate(const ExperimentConfig& cfg) {
  const GateScenario& g = *cfg.gate;
  FlightSetup s;
  Vector psi(2);
  psi << std::sqrt(g.a0), std::exp(Complex(0.0, g.theta)) * std::sqrt(g.a1);
  s.psi0 = psi;
  s.rho0 = DensityMatrix::pure(psi);

  if (g.kind == GateScenario::Kind::not_gate) {
    CalibratedNotGate gate =
        calibrate_not_gate(g.profile, g.length, g.omega_q, g.v0, g.delta_x, g.samples);
    s.cfg = gate.config;
    NotGateMetrics m = not_gate_metrics(g.a0, g.a1, g.theta, g.omega_q, g.delta_x, g.v0);
    s.metadata = {
        {"gate.kind", "NOT"},
        {"gate.chi0", format_double(gate.chi0)},
        {"gate.t_final", format_double(gate.t_final)},
        {"gate.K", format_double(m.k)},
    };
    s.extra_summary = {{"k", m.k},
                       {"fidelity_formula", m.fidelity},
                       {"entropy_formula_nats", m.entropy_nats}};
    if (m.out_of_validity) {
      s.metadata.emplace_back("gate.warning", "K >= 0.5, perturbative regime left");
    }
  } else {
    FlightConfig fc;
    fc.h0 = 0.5 * g.omega_q * sigma_z();
    double eta = g.phase * g.v0 / g.length;  // accumulated angle = phase
    fc.potential = gaussian_profile(g.length, 0.0, 0.5 * eta, sigma_z());
    fc.packet = Wavepacket::gaussian(
        fc.potential.support_min() - 5.0 * g.delta_x - 0.25 * g.length, g.delta_x, 0.0);
    fc.v0 = g.v0;
    fc.e0 = g.omega_q;
    fc.time_grid = linear_grid(fc.exit_time(), g.samples);
    s.cfg = validate_flight(fc);
    s.metadata = {{"gate.kind", "PHASE"}, {"gate.phase", format_double(g.phase)}};
    auto [f, ent] = phase_gate_metrics(g.phase, s.rho0);
    s.extra_summary = {{"fidelity_formula", f}, {"entropy_formula_nats", ent}};
  }

  if (g.k0_dx > 0.0) {
    double k0 = g.k0_dx / g.delta_x;
    s.cfg.packet.k0 = k0;
    s.mass = k0 / g.v0;  // hbar = 1
    s.metadata.emplace_back("gate.mass", format_double(s.mass));
  }
  return s;
}

FlightSetup setup_twobody(const ExperimentConfig& cfg) {
  const TwoBodyScenario& t = *cfg.twobody;
  Matrix id2 = Matrix::Identity(2, 2);
  Matrix p1 = Matrix::Zero(2, 2);
  p1(1, 1) = 1.0;

  double v_rel = t.v1 - t.v2;
  if (v_rel == 0.0) throw ConfigError("twobody: v1 and v2 must differ");
  double dx_rel = std::sqrt(t.dx1 * t.dx1 + t.dx2 * t.dx2 - 2.0 * t.correlation);

  FlightSetup s;
  double chi0 = 0.0;
  PotentialProfile v_pot;
  if (t.gate == TwoBodyScenario::Gate::cnot) {
    CalibratedNotGate cal = calibrate_not_gate(NotProfile::gaussian, t.length, t.omega_q,
                                               std::abs(v_rel), dx_rel);
    chi0 = cal.chi0;
    v_pot = gate_drive_potential(NotProfile::gaussian, t.length, t.omega_q, chi0,
                                 kron(p1, sigma_x()), kron(p1, sigma_z()));
  } else {
    double eta = t.phase * std::abs(v_rel) / t.length;
    Matrix p11 = kron(p1, p1);
    v_pot = gaussian_profile(t.length, 0.0, eta, p11);
  }

  TwoBodyConfig tb;
  tb.m1 = t.m1;
  tb.m2 = t.m2;
  tb.v1 = t.v1;
  tb.v2 = t.v2;
  tb.dx1 = t.dx1;
  tb.dx2 = t.dx2;
  tb.correlation = t.correlation;
  tb.h1 = 0.5 * t.omega_c * sigma_z();
  tb.h2 = 0.5 * t.omega_q * sigma_z();
  tb.v_rel = v_pot;
  tb.e0 = t.omega_q;
  if (t.x1 == 0.0 && t.x2 == 0.0) {
    // place the pair so the relative coordinate starts left of the support
    double x_rel = (v_rel > 0.0 ? v_pot.support_min() : -v_pot.support_max()) -
                   5.0 * dx_rel - 0.25 * t.length;
    tb.x1_0 = v_rel > 0.0 ? x_rel : -x_rel;
    tb.x2_0 = 0.0;
  } else {
    tb.x1_0 = t.x1;
    tb.x2_0 = t.x2;
  }
  FlightConfig fc = two_body_reduce(tb);
  fc.time_grid = linear_grid(fc.exit_time() + 0.1 * t.length / std::abs(v_rel), t.samples);
  s.cfg = fc;

  Vector control(2), target(2);
  control << std::sqrt(1.0 - t.p), std::sqrt(t.p);
  target << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  Vector psi(4);
  for (int c = 0; c < 2; ++c)
    for (int q = 0; q < 2; ++q) psi(2 * c + q) = control(c) * target(q);
  s.psi0 = psi;
  s.rho0 = DensityMatrix::pure(psi);

  double k = std::pow(t.omega_q * dx_rel / v_rel, 2);
  CnotMetrics metrics =
      t.gate == TwoBodyScenario::Gate::cnot ? cnot_metrics(t.p, k) : CnotMetrics{};
  s.metadata = {
      {"twobody.gate", t.gate == TwoBodyScenario::Gate::cnot ? "cnot" : "cphase"},
      {"twobody.delta_x_rel", format_double(dx_rel)},
      {"twobody.v_rel", format_double(v_rel)},
      {"twobody.K", format_double(k)},
  };
  if (chi0 != 0.0) s.metadata.emplace_back("twobody.chi0", format_double(chi0));
  s.extra_summary = {{"k", k},
                     {"p_times_k", t.p * k},
                     {"fidelity_formula", metrics.fidelity}};
  return s;
}

// Grid-tier fidelities of the second-order approximate state against the
// reduced state of the full propagation, one value per record time.
std::vector<double> grid_tier_fidelities(const FlightConfig& fc, const Vector& psi0,
                                         double mass,
                                         const std::vector<Matrix>& rho_approx,
                                         std::vector<std::pair<std::string, std::string>>*
                                             metadata) {
  const std::vector<double>& times = fc.time_grid;
  if (times.size() < 2) throw GridTooSmall("grid tier needs at least two record times");
  double dt_record = times[1] - times[0];
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    if (std::abs(times[i + 1] - times[i] - dt_record) > 1e-9 * dt_record) {
      throw GridTooSmall("grid tier needs a uniform time grid");
    }
  }

  double dx = fc.packet.dx, x0 = fc.packet.x0, k0 = fc.packet.k0, t_end = times.back();
  double spread_end = dx * std::sqrt(1.0 + std::pow(t_end / (2.0 * mass * dx * dx), 2));
  double margin = std::max(16.0 * spread_end, 0.5 * (fc.potential.support_max() -
                                                     fc.potential.support_min()) * 0.25);
  double xmin = x0 - margin;
  double xmax = x0 + fc.v0 * t_end + margin;
  double span = xmax - xmin;

  double k_occ = k0 + 5.0 / dx;
  double dx_grid_max = M_PI / (1.35 * k_occ);
  int n = 256;
  while (n < span / dx_grid_max && n < 16384) n *= 2;
  if (span / n > dx_grid_max) {
    throw GridTooSmall("grid tier would need more than 2^14 points");
  }
  double dx_grid = span / n;

  GridState state = make_gaussian_grid_state(xmin, dx_grid, n, x0, dx, k0, psi0, mass);
  double dt_max = suggest_dt(state, k0);
  int steps_per_record = static_cast<int>(std::ceil(dt_record / dt_max));
  double dt = dt_record / steps_per_record;
  GridSolver solver(state, fc.h0, fc.potential, dt);

  if (metadata) {
    metadata->emplace_back("grid.n", std::to_string(n));
    metadata->emplace_back("grid.dx", format_double(dx_grid));
    metadata->emplace_back("grid.dt", format_double(dt));
    metadata->emplace_back("grid.steps_per_record", std::to_string(steps_per_record));
  }

  std::vector<double> fid;
  fid.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) solver.step(state, steps_per_record);
    DensityMatrix reduced = reduce_internal(state);
    fid.push_back(state_fidelity(rho_approx[i], reduced.matrix()));
  }
  return fid;
}

TrajectoryRecord run_flight(const ExperimentConfig& cfg, FlightSetup setup) {
  TrajectoryRecord rec;
  const FlightConfig& fc = setup.cfg;
  rec.times = fc.time_grid;
  rec.epsilon = fc.epsilon();
  rec.metadata = std::move(setup.metadata);
  rec.metadata.emplace_back("epsilon", format_double(rec.epsilon));
  rec.metadata.emplace_back("quad_nodes", std::to_string(fc.quad_nodes));
  rec.metadata.emplace_back("integrator_tol", format_double(fc.integrator_tol));

  const std::size_t n_times = rec.times.size();
  double lambda = std::pow(fc.packet.dx / (fc.hbar * fc.v0), 2);

  // Point-like unitaries are needed by every tier; the exact quadrature only
  // when the clock tier (or the grid comparison) is on.
  ClockTrajectory clock;
  std::vector<Matrix> u_na;
  if (cfg.tier_clock) {
    clock = trajectory(fc, setup.rho0);
    u_na = clock.u_na;
  } else {
    Matrix u = Matrix::Identity(fc.h0.rows(), fc.h0.cols());
    double t_prev = 0.0;
    for (double t : rec.times) {
      double x = fc.packet.x0;
      auto h = [&fc, x](double s) { return fc.hamiltonian_at(x + fc.v0 * s); };
      u = propagate_ordered(h, t_prev, t, fc.hbar, fc.integrator_tol) * u;
      t_prev = t;
      u_na.push_back(u);
    }
  }

  std::vector<Matrix> rho_approx(n_times);
  rec.f_pert.assign(n_times, kNaN);
  rec.s_pert_nats.assign(n_times, kNaN);
  rec.s_pert_bits.assign(n_times, kNaN);
  rec.f_clock.assign(n_times, kNaN);
  rec.s_clock_nats.assign(n_times, kNaN);
  rec.fid_approx_vs_grid.assign(n_times, kNaN);

  bool need_approx = cfg.tier_perturbative || (cfg.tier_grid && setup.mass > 0.0);
  for (std::size_t i = 0; i < n_times; ++i) {
    double t = rec.times[i];
    if (need_approx) {
      BoundaryHamiltonians b = boundary_hamiltonians(fc, t);
      CorrectionTerm c = correction_term(u_na[i], b, setup.rho0, t, fc.hbar, fc.v0);
      Matrix rho_na = u_na[i] * setup.rho0.matrix() * u_na[i].adjoint();
      rho_approx[i] = rho_na + lambda * c.matrix;
      if (cfg.tier_perturbative) {
        Vector psi_na = u_na[i] * setup.psi0;
        // dimensionless form: eps^2 C / e0^2 = lambda C
        Matrix c_dim = c.matrix / (fc.e0 * fc.e0);
        double eps = fc.epsilon();
        rec.f_pert[i] = fidelity_pure_perturbative(c_dim, psi_na, eps);
        rec.s_pert_nats[i] =
            entropy_perturbative(c_dim, DensityMatrix::pure(psi_na), eps);
        rec.s_pert_bits[i] = rec.s_pert_nats[i] / std::log(2.0);
      }
    }
    if (cfg.tier_clock) {
      rec.f_clock[i] = clock.fidelity[i];
      rec.s_clock_nats[i] = clock.entropy_nats[i];
    }
  }

  if (cfg.tier_grid) {
    if (setup.mass <= 0.0) {
      throw ConfigError("grid tier requested but the scenario defines no mass/k0");
    }
    rec.fid_approx_vs_grid = grid_tier_fidelities(fc, setup.psi0, setup.mass, rho_approx,
                                                  &rec.metadata);
  }

  // summary metrics for sweeps
  rec.summary = std::move(setup.extra_summary);
  rec.summary.emplace_back("epsilon", rec.epsilon);
  if (cfg.tier_clock && n_times > 0) {
    rec.summary.emplace_back("f_clock_final", rec.f_clock.back());
    rec.summary.emplace_back("s_clock_final_nats", rec.s_clock_nats.back());
    rec.summary.emplace_back("one_minus_f_clock_final", 1.0 - rec.f_clock.back());
    double smax = 0.0, fmin = 1.0;
    for (std::size_t i = 0; i < n_times; ++i) {
      smax = std::max(smax, rec.s_clock_nats[i]);
      fmin = std::min(fmin, rec.f_clock[i]);
    }
    rec.summary.emplace_back("s_clock_max_nats", smax);
    rec.summary.emplace_back("f_clock_min", fmin);
  }
  if (cfg.tier_grid && n_times > 0) {
    double gmin = 1.0;
    for (double f : rec.fid_approx_vs_grid) gmin = std::min(gmin, f);
    rec.summary.emplace_back("fid_approx_vs_grid_min", gmin);
  }
  return rec;
}

TrapConfig preset_trap(const TrappedScenario& t) {
  switch (t.preset) {
    case TrappedScenario::Preset::surfing:
      return TrapConfig::harmonic(10e-9, 1e-31, 1e4, 1e-10, kHbarSI);
    case TrappedScenario::Preset::shuttling:
      return TrapConfig::harmonic(10e-9, 1e-31, 10.0, 1e-7, kHbarSI);
    case TrappedScenario::Preset::rydberg:
      return TrapConfig::harmonic(10e-6, 1e-31, 1e4, 1e-6, kHbarSI);
    case TrappedScenario::Preset::custom:
      break;
  }
  if (t.kind == TrapConfig::Kind::harmonic) {
    return TrapConfig::harmonic(t.delta_x, t.mass, t.v0, t.tau);
  }
  return TrapConfig::box(t.box_length, t.mass, t.v0, t.tau);
}

TrajectoryRecord run_trapped(const ExperimentConfig& cfg) {
  const TrappedScenario& t = *cfg.trapped;
  TrapConfig trap = preset_trap(t);
  double bound = worst_case_bound(trap);

  TrajectoryRecord rec;
  rec.metadata = {
      {"trap.kind", trap.kind == TrapConfig::Kind::harmonic ? "harmonic" : "box"},
      {"trap.delta_x", format_double(trap.dx)},
      {"trap.e_eg", format_double(trap.e_eg)},
      {"trap.r_eg", format_double(trap.r_eg)},
      {"trap.mass", format_double(trap.mass)},
      {"trap.v0", format_double(trap.v0)},
      {"trap.tau", format_double(trap.tau)},
      {"trap.hbar", format_double(trap.hbar)},
  };
  rec.summary = {{"bound", bound}};

  if (t.integrate) {
    // Work in trap-natural units (lengths in dx, times in tau) and drive a
    // smooth pi pulse; the deviation is dimensionless.
    double l0 = trap.dx, t0 = trap.tau;
    TrapConfig nat;
    nat.kind = trap.kind;
    nat.hbar = 1.0;
    nat.dx = 1.0;
    nat.tau = 1.0;
    nat.r_eg = trap.r_eg / l0;
    nat.e_eg = trap.e_eg * t0 / trap.hbar;
    nat.v0 = trap.v0 * t0 / l0;
    nat.mass = trap.mass * l0 * l0 / (trap.hbar * t0);

    double sigma = 0.25;
    auto omega = [sigma](double s) {
      double u = (s - 0.5) / sigma;
      return M_PI / (std::sqrt(2.0 * M_PI) * sigma) * std::exp(-0.5 * u * u);
    };
    auto v_of_t = [omega](double s) { return (0.5 * omega(s) * sigma_x()).eval(); };
    auto vdot_of_t = [omega, sigma](double s) {
      double u = (s - 0.5) / sigma;
      return (-u / sigma * 0.5 * omega(s) * sigma_x()).eval();
    };
    Vector zero_state(2);
    zero_state << 1, 0;
    DensityMatrix rho0 = DensityMatrix::pure(zero_state);
    Matrix h0 = Matrix::Zero(2, 2);

    double dev_sup = 0.0;
    for (int i = 1; i <= 24; ++i) {
      double s = i / 24.0;
      DysonTerms terms = dyson_terms(h0, v_of_t, vdot_of_t, nat.e_eg, s, 1.0, 40);
      DensityMatrix rho = trapped_state(rho0, terms, nat.r_eg, nat.v0);
      double dev = spectral_norm(rho.matrix() - rho0.matrix());
      rec.times.push_back(s);
      rec.f_clock.push_back(dev);  // deviation column for trapped runs
      dev_sup = std::max(dev_sup, dev);
    }
    rec.summary.emplace_back("deviation_sup", dev_sup);
    rec.metadata.emplace_back("trap.deviation_sup", format_double(dev_sup));
  }
  rec.metadata.emplace_back("trap.bound", format_double(bound));
  return rec;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& line : lines) out << line << "\n";
}

std::string csv_field(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TrajectoryRecord run_scenario(const ExperimentConfig& cfg) {
  switch (cfg.scenario) {
    case ScenarioKind::fig2:
      return run_flight(cfg, setup_fig2(cfg));
    case ScenarioKind::gate:
      return run_flight(cfg, setup_gate(cfg));
    case ScenarioKind::twobody:
      return run_flight(cfg, setup_twobody(cfg));
    case ScenarioKind::trapped:
      return run_trapped(cfg);
  }
  throw ConfigError("unknown scenario");
}

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  TrajectoryRecord rec = run_scenario(cfg);

  std::filesystem::create_directories(cfg.output);
  RunArtifacts artifacts;
  artifacts.csv_path = cfg.output + "/trajectory.csv";
  artifacts.manifest_path = cfg.output + "/manifest.txt";

  std::vector<std::string> csv;
  if (cfg.scenario == ScenarioKind::trapped) {
    if (rec.times.empty()) {
      csv.push_back("bound");
      csv.push_back(format_double(rec.summary.front().second));
    } else {
      csv.push_back("t_over_tau,deviation,bound");
      for (std::size_t i = 0; i < rec.times.size(); ++i) {
        csv.push_back(format_double(rec.times[i]) + "," + format_double(rec.f_clock[i]) +
                      "," + format_double(rec.summary.front().second));
      }
    }
  } else {
    csv.push_back("t,F_pert,S_pert_nats,S_pert_bits,F_clock,S_clock_nats,fid_approx_vs_grid");
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      csv.push_back(format_double(rec.times[i]) + "," + csv_field(rec.f_pert[i]) + "," +
                    csv_field(rec.s_pert_nats[i]) + "," + csv_field(rec.s_pert_bits[i]) +
                    "," + csv_field(rec.f_clock[i]) + "," +
                    csv_field(rec.s_clock_nats[i]) + "," +
                    csv_field(rec.fid_approx_vs_grid[i]));
    }
  }
  write_lines(artifacts.csv_path, csv);

  auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
  std::vector<std::string> manifest;
  manifest.push_back("[run]");
  const char* names[] = {"fig2", "gate", "twobody", "trapped"};
  manifest.push_back("scenario = " + std::string(names[static_cast<int>(cfg.scenario)]));
  manifest.push_back("seed = " + std::to_string(cfg.seed));
  manifest.push_back("version = " + std::string(kVersion));
  manifest.push_back("wall_seconds = " + format_double(wall.count()));
  manifest.push_back("");
  manifest.push_back("[units]");
  manifest.push_back(std::string("system = ") + (cfg.natural_units ? "natural" : "SI"));
  if (!cfg.natural_units) {
    manifest.push_back("length_scale_si = " + format_double(cfg.length_scale_si));
    manifest.push_back("time_scale_si = " + format_double(cfg.time_scale_si));
  }
  manifest.push_back("");
  manifest.push_back("[tiers]");
  manifest.push_back(std::string("clock = ") + (cfg.tier_clock ? "true" : "false"));
  manifest.push_back(std::string("perturbative = ") +
                     (cfg.tier_perturbative ? "true" : "false"));
  manifest.push_back(std::string("grid = ") + (cfg.tier_grid ? "true" : "false"));
  manifest.push_back("");
  manifest.push_back("[parameters]");
  for (const auto& [key, value] : rec.metadata) manifest.push_back(key + " = " + value);
  write_lines(artifacts.manifest_path, manifest);
  return artifacts;
}

std::vector<SweepRow> sweep_scenario(const ExperimentConfig& cfg, const std::string& axis,
                                     const std::vector<double>& values, int workers) {
  {
    // resolve the axis once up front so bad names fail before any work
    ExperimentConfig probe = cfg;
    bool found = false;
    for (const auto& ax : sweep_axes(probe)) found = found || ax.name == axis;
    if (!found) throw ConfigError("unknown sweep axis '" + axis + "'");
  }

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      SweepRow row;
      row.index = static_cast<int>(i);
      row.value = values[i];
      try {
        ExperimentConfig point = cfg;
        point.tier_grid = false;  // sweeps stay on the fast tiers
        for (const auto& ax : sweep_axes(point)) {
          if (ax.name == axis) *ax.target = values[i] * ax.unit;
        }
        TrajectoryRecord rec = run_scenario(point);
        row.metrics = rec.summary;
        row.ok = true;
      } catch (const Error& e) {
        row.ok = false;
        row.error = e.what();
      }
      rows[i] = std::move(row);
    }
  };

  int n_workers = std::max(1, workers);
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return rows;
}

std::string sweep_experiment(const ExperimentConfig& cfg, const std::string& axis,
                             const std::vector<double>& values, int workers) {
  std::vector<SweepRow> rows = sweep_scenario(cfg, axis, values, workers);

  std::vector<std::string> metric_names;
  for (const auto& row : rows) {
    if (row.ok) {
      for (const auto& [name, value] : row.metrics) metric_names.push_back(name);
      break;
    }
  }

  std::filesystem::create_directories(cfg.output);
  std::string path = cfg.output + "/sweep.csv";
  std::vector<std::string> csv;
  std::string header = "index,value,status,message";
  for (const auto& name : metric_names) header += "," + name;
  csv.push_back(header);
  for (const auto& row : rows) {
    std::string line = std::to_string(row.index) + "," + format_double(row.value) + "," +
                       (row.ok ? "ok" : "error") + ",";
    std::string msg = row.error;
    for (auto& ch : msg) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    line += msg;
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      line += ",";
      if (row.ok && m < row.metrics.size()) line += format_double(row.metrics[m].second);
    }
    csv.push_back(line);
  }
  write_lines(path, csv);
  return path;
}

ValidationReport validate_scenario(const ExperimentConfig& cfg) {
  ValidationReport report;
  auto line = [&report](const std::string& s) { report.lines.push_back(s); };

  const char* names[] = {"fig2", "gate", "twobody", "trapped"};
  line("scenario = " + std::string(names[static_cast<int>(cfg.scenario)]));

  auto flight_checks = [&](double epsilon, double omega_ratio, double k0, double dx,
                           double x0, double support_min) {
    line("epsilon = " + format_double(epsilon));
    if (epsilon > 0.3) {
      line("warning: epsilon > 0.3, expansion accuracy degrades");
      report.warnings = true;
    }
    if (omega_ratio >= 0.5) {
      line("warning: omega_q dx / v0 = " + format_double(omega_ratio) +
           " approaches the strong-decoherence regime (~1)");
      report.warnings = true;
    }
    if (k0 > 0.0) {
      double q_ratio = 1.0 / std::pow(2.0 * k0 * dx, 2);
      line("q2_over_p0_2 = " + format_double(q_ratio));
      if (q_ratio > 1e-4) {
        line("warning: <q^2>/p0^2 > 1e-4, clock approximation degrades");
        report.warnings = true;
      }
    }
    if (x0 + 5.0 * dx < support_min) {
      line("support_check = ok");
    } else {
      line("support_check = FAIL (packet not fully outside the interaction region "
           "at t = 0)");
      report.ok = false;
    }
  };

  try {
    switch (cfg.scenario) {
      case ScenarioKind::fig2: {
        Fig2Params p = cfg.fig2 ? cfg.fig2->params : Fig2Params{};
        Fig2Scenario sc = fig2_preset(p);
        flight_checks(sc.config.epsilon(), p.omega_q * p.dx * p.length / p.v0,
                      sc.config.packet.k0, sc.config.packet.dx, sc.config.packet.x0,
                      sc.config.potential.support_min());
        double dt = 0.5 * (M_PI / 4.0) * 2.0 * sc.mass /
                    std::pow(sc.config.packet.k0 + 4.0 / sc.config.packet.dx, 2);
        line("grid_dt_bound = " + format_double(dt));
        break;
      }
      case ScenarioKind::gate: {
        const GateScenario& g = *cfg.gate;
        double ratio = g.omega_q * g.delta_x / g.v0;
        // geometry does not depend on the calibrated amplitude
        PotentialProfile pot =
            g.kind == GateScenario::Kind::not_gate
                ? gate_drive_potential(g.profile, g.length, g.omega_q,
                                       M_PI * g.v0 / g.length, sigma_x(), sigma_z())
                : gaussian_profile(g.length, 0.0, 1.0, sigma_z());
        double x0 = pot.support_min() - 5.0 * g.delta_x - 0.25 * g.length;
        double k0 = g.k0_dx > 0.0 ? g.k0_dx / g.delta_x : 0.0;
        flight_checks(ratio, ratio, k0, g.delta_x, x0, pot.support_min());
        line("K = " + format_double(4.0 * g.a0 * g.a1 * ratio * ratio));
        break;
      }
      case ScenarioKind::twobody: {
        const TwoBodyScenario& t = *cfg.twobody;
        double v_rel = t.v1 - t.v2;
        if (v_rel == 0.0) {
          line("velocity_check = FAIL (v1 == v2)");
          report.ok = false;
          break;
        }
        double dx2 = t.dx1 * t.dx1 + t.dx2 * t.dx2 - 2.0 * t.correlation;
        if (dx2 <= 0.0) {
          line("correlation_check = FAIL (relative spread collapses)");
          report.ok = false;
          break;
        }
        double dx_rel = std::sqrt(dx2);
        line("delta_x_rel = " + format_double(dx_rel));
        double k = std::pow(t.omega_q * dx_rel / v_rel, 2);
        line("K = " + format_double(k));
        line("pK = " + format_double(t.p * k));
        if (t.p * k >= 0.5) {
          line("warning: pK >= 0.5, out of perturbative validity");
          report.warnings = true;
        }
        double ratio = t.omega_q * dx_rel / std::abs(v_rel);
        double x_rel = t.x1 - t.x2;
        double support = -3.0 * t.length;  // generic drive support scale
        if (t.x1 == 0.0 && t.x2 == 0.0) {
          line("support_check = ok (auto placement)");
          line("epsilon = " + format_double(ratio));
        } else {
          flight_checks(ratio, ratio, 0.0, dx_rel, v_rel > 0 ? x_rel : -x_rel, support);
        }
        break;
      }
      case ScenarioKind::trapped: {
        TrapConfig trap = preset_trap(*cfg.trapped);
        line("bound = " + format_double(worst_case_bound(trap)));
        line("e_eg = " + format_double(trap.e_eg));
        line("tau_times_e_eg_over_hbar = " +
             format_double(trap.tau * trap.e_eg / trap.hbar));
        break;
      }
    }
  } catch (const Error& e) {
    line(std::string("check_error = ") + e.what());
    report.ok = false;
  }
  return report;
}

std::vector<std::string> magnitude_table_lines() {
  std::vector<std::string> lines;
  lines.push_back("regime,delta_x_m,mass_kg,v0_m_per_s,tau_s,bound,reported");
  for (const MagnitudeRow& row : magnitude_table()) {
    lines.push_back(row.name + "," + format_double(row.config.dx) + "," +
                    format_double(row.config.mass) + "," + format_double(row.config.v0) +
                    "," + format_double(row.config.tau) + "," + format_double(row.bound) +
                    "," + format_double(row.reported));
  }
  return lines;
}

}  // namespace flyq
