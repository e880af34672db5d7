// Python bindings for the main operations: state diagnostics, perturbative
// formulas, gate metrics, trap bounds and config-driven runs.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flyq/grid.hpp"
#include "flyq/perturbation.hpp"
#include "flyq/runner.hpp"
#include "flyq/scenarios.hpp"
#include "flyq/trapped.hpp"
#include "flyq/version.hpp"

namespace py = pybind11;
using namespace flyq;

namespace {

DensityMatrix as_state(const Matrix& rho) { return DensityMatrix(rho); }

py::dict record_to_dict(const TrajectoryRecord& rec) {
  py::dict out;
  out["t"] = rec.times;
  out["F_pert"] = rec.f_pert;
  out["S_pert_nats"] = rec.s_pert_nats;
  out["S_pert_bits"] = rec.s_pert_bits;
  out["F_clock"] = rec.f_clock;
  out["S_clock_nats"] = rec.s_clock_nats;
  out["fid_approx_vs_grid"] = rec.fid_approx_vs_grid;
  out["epsilon"] = rec.epsilon;
  py::dict summary;
  for (const auto& [k, v] : rec.summary) summary[py::str(k)] = v;
  out["summary"] = summary;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "intrinsic decoherence of flying quantum systems";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError");
  static py::exception<Error> base_error(m, "FlyqError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError&) {
      throw;  // handled by the registered exception above
    } catch (const Error& e) {
      PyErr_SetString(base_error.ptr(), e.what());
    }
  });

  // core diagnostics
  m.def("matrix_exponential",
        [](const Matrix& a, Complex scale) { return matrix_exponential(a, scale); },
        py::arg("a"), py::arg("scale") = Complex(1.0, 0.0));
  m.def("von_neumann_entropy",
        [](const Matrix& rho, const std::string& unit) {
          return von_neumann_entropy(as_state(rho), unit == "bits" ? EntropyUnit::bits
                                                                   : EntropyUnit::nats);
        },
        py::arg("rho"), py::arg("unit") = "nats");
  m.def("state_fidelity", [](const Matrix& rho, const Matrix& sigma) {
    return state_fidelity(as_state(rho), as_state(sigma));
  });
  m.def("partial_projectors",
        [](const Matrix& rho, double rank_cut) {
          Projectors p = partial_projectors(as_state(rho), rank_cut);
          return py::make_tuple(p.onto_support, p.onto_kernel, p.support_rank);
        },
        py::arg("rho"), py::arg("rank_cut") = 1e-6);

  // perturbation machinery
  m.def("u1_u2_scattering", [](const Matrix& u_na, const Matrix& h0) {
    auto [u1, u2] = u1_u2_scattering(u_na, h0);
    return py::make_tuple(u1, u2);
  });
  m.def("correction_term_scattering",
        [](const Matrix& u_na, const Matrix& h0, const Matrix& rho0) {
          return correction_term(u_na, scattering_boundaries(h0), as_state(rho0), 0.0,
                                 1.0, 1.0)
              .matrix;
        },
        py::arg("u_na"), py::arg("h0"), py::arg("rho0"),
        "Correction operator (energy^2 units) once the packet has fully crossed.");
  m.def("approx_state",
        [](const Matrix& rho_na, const Matrix& c_dimensionless, double eps) {
          return approx_state(as_state(rho_na), c_dimensionless, eps).matrix();
        },
        py::arg("rho_na"), py::arg("c"), py::arg("eps"));
  m.def("fidelity_pure_perturbative", &fidelity_pure_perturbative, py::arg("c"),
        py::arg("psi_na"), py::arg("eps"));
  m.def("entropy_perturbative",
        [](const Matrix& c, const Matrix& rho_na, double eps, double rank_cut) {
          return entropy_perturbative(c, as_state(rho_na), eps, rank_cut);
        },
        py::arg("c"), py::arg("rho_na"), py::arg("eps"), py::arg("rank_cut") = 1e-6);
  m.def("fidelity_mixed_perturbative",
        [](const Matrix& c, const Matrix& rho_na, double eps, double rank_cut) {
          MixedFidelityResult r =
              fidelity_mixed_perturbative(c, as_state(rho_na), eps, rank_cut);
          py::dict out;
          out["first_order"] = r.first_order;
          out["fourth_order"] =
              r.fourth_order ? py::object(py::float_(*r.fourth_order)) : py::none();
          out["skipped_pairs"] = r.skipped_pairs;
          return out;
        },
        py::arg("c"), py::arg("rho_na"), py::arg("eps"), py::arg("rank_cut") = 1e-6);

  // gate scenarios
  m.def("not_gate_metrics",
        [](double a0, double a1, double theta, double omega_q, double dx, double v0) {
          NotGateMetrics r = not_gate_metrics(a0, a1, theta, omega_q, dx, v0);
          py::dict out;
          out["K"] = r.k;
          out["fidelity"] = r.fidelity;
          out["entropy_nats"] = r.entropy_nats;
          out["out_of_validity"] = r.out_of_validity;
          return out;
        },
        py::arg("a0"), py::arg("a1"), py::arg("theta"), py::arg("omega_q"),
        py::arg("delta_x"), py::arg("v0"));
  m.def("phase_gate_metrics", [](double phi, const Matrix& rho0) {
    auto [f, s] = phase_gate_metrics(phi, as_state(rho0));
    return py::make_tuple(f, s);
  });
  m.def("cnot_metrics", [](double p, double k) {
    CnotMetrics r = cnot_metrics(p, k);
    py::dict out;
    out["fidelity"] = r.fidelity;
    out["entropy_nats"] = r.entropy_nats;
    out["out_of_validity"] = r.out_of_validity;
    return out;
  });
  m.def("ballistic_regime_estimate", [](double omega_q, double dx_over_v0) {
    BallisticEstimate e = ballistic_regime_estimate(omega_q, dx_over_v0);
    return py::make_tuple(e.eps_like, e.one_minus_f_scale);
  });
  m.def("calibrate_not_gate",
        [](const std::string& profile, double length, double omega_q, double v0,
           double dx) {
          CalibratedNotGate gate = calibrate_not_gate(
              profile == "smoothrect" ? NotProfile::smoothed_rect : NotProfile::gaussian,
              length, omega_q, v0, dx);
          py::dict out;
          out["chi0"] = gate.chi0;
          out["t_final"] = gate.t_final;
          out["u_final"] = gate.u_final;
          return out;
        },
        py::arg("profile"), py::arg("length"), py::arg("omega_q"), py::arg("v0"),
        py::arg("delta_x"));

  // trapped qubits
  m.def("worst_case_bound",
        [](const std::string& kind, double size, double mass, double v0, double tau,
           double hbar) {
          TrapConfig cfg = kind == "box" ? TrapConfig::box(size, mass, v0, tau, hbar)
                                         : TrapConfig::harmonic(size, mass, v0, tau, hbar);
          return worst_case_bound(cfg);
        },
        py::arg("kind"), py::arg("size"), py::arg("mass"), py::arg("v0"), py::arg("tau"),
        py::arg("hbar") = 1.0,
        "size is the ground-state spread for harmonic traps, the box length otherwise");
  m.def("magnitude_table", []() {
    py::list rows;
    for (const MagnitudeRow& row : magnitude_table()) {
      py::dict d;
      d["name"] = row.name;
      d["delta_x"] = row.config.dx;
      d["mass"] = row.config.mass;
      d["v0"] = row.config.v0;
      d["tau"] = row.config.tau;
      d["bound"] = row.bound;
      d["reported"] = row.reported;
      rows.append(d);
    }
    return rows;
  });

  // grid reference solver, minimal surface
  m.def("grid_free_flight",
        [](double xmin, double dx_grid, int npoints, double x0, double packet_dx,
           double k0, const Vector& internal, double mass, const Matrix& h0, double t) {
          GridState st = make_gaussian_grid_state(xmin, dx_grid, npoints, x0, packet_dx,
                                                  k0, internal, mass);
          // far-away stub potential; the flight is effectively free
          PotentialProfile pot = gaussian_profile(
              (npoints * dx_grid) / 16.0, xmin + npoints * dx_grid * 4.0, 0.0,
              Matrix::Zero(h0.rows(), h0.cols()));
          double dt = suggest_dt(st, k0);
          int steps = std::max(1, static_cast<int>(std::ceil(t / dt)));
          GridState out = propagate_full(st, h0, pot, t / steps, steps);
          return py::make_tuple(reduce_internal(out).matrix(), out.norm());
        },
        py::arg("xmin"), py::arg("dx_grid"), py::arg("npoints"), py::arg("x0"),
        py::arg("packet_dx"), py::arg("k0"), py::arg("internal"), py::arg("mass"),
        py::arg("h0"), py::arg("t"));

  // config-driven runs
  m.def("run_config_text",
        [](const std::string& text) { return record_to_dict(run_scenario(parse_config_text(text))); },
        "Run a config given as text; returns the trajectory columns and summary.");
  m.def("run_config_file", [](const std::string& path) {
    return record_to_dict(run_scenario(parse_config_file(path)));
  });
  m.def("validate_config_text", [](const std::string& text) {
    ValidationReport r = validate_scenario(parse_config_text(text));
    return py::make_tuple(r.ok, r.lines);
  });
}
