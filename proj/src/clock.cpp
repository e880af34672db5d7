#include "flyq/clock.hpp"

#include <algorithm>
#include <cmath>

namespace flyq {

namespace {

// Single midpoint-exponential step applied to the left of u.
Matrix midpoint_step(const std::function<Matrix(double)>& h, double a, double b,
                     double hbar, const Matrix& u) {
  Matrix hm = h(0.5 * (a + b));
  Complex scale(0.0, -(b - a) / hbar);
  return matrix_exponential(hm, scale) * u;
}

// Quadrature averages drift from unit trace only through roundoff of the
// step products; anything above the solver invariant is a real failure.
DensityMatrix normalized_state(Matrix acc, double* drift_out = nullptr) {
  double drift = std::abs(acc.trace() - Complex(1.0, 0.0));
  if (drift_out) *drift_out = drift;
  if (drift > 1e-10) {
    throw IntegrationError("internal state trace drifted by " + std::to_string(drift));
  }
  acc /= acc.trace();
  acc = 0.5 * (acc + acc.adjoint().eval());
  return DensityMatrix(acc);
}

}  // namespace

double FlightConfig::epsilon() const { return packet.dx * e0 / (hbar * v0); }

Matrix FlightConfig::hamiltonian_at(double x) const { return h0 + potential.value(x); }

Matrix FlightConfig::hamiltonian_derivative_at(double x) const {
  return potential.derivative(x);
}

double FlightConfig::exit_time() const {
  return (potential.support_max() + 5.0 * packet.dx - packet.x0) / v0;
}

FlightConfig validate_flight(FlightConfig cfg) {
  if (cfg.v0 <= 0.0) throw InvalidOperator("FlightConfig: v0 must be > 0");
  if (cfg.hbar <= 0.0) throw InvalidOperator("FlightConfig: hbar must be > 0");
  require_hermitian(cfg.h0, "FlightConfig.h0");
  if (cfg.h0.rows() != cfg.potential.dim()) {
    throw ShapeError("FlightConfig: h0 and potential dims differ");
  }
  if (cfg.packet.x0 + 5.0 * cfg.packet.dx >= cfg.potential.support_min()) {
    throw InvalidOperator(
        "FlightConfig: packet not fully outside the interaction region at t=0");
  }
  for (std::size_t i = 0; i < cfg.time_grid.size(); ++i) {
    if (i == 0) {
      if (cfg.time_grid[0] != 0.0) {
        throw InvalidOperator("FlightConfig: time grid must start at 0");
      }
    } else if (!(cfg.time_grid[i] > cfg.time_grid[i - 1])) {
      throw InvalidOperator("FlightConfig: time grid must strictly increase");
    }
  }
  return cfg;
}

Matrix propagate_ordered(const std::function<Matrix(double)>& hamiltonian, double t_begin,
                         double t_end, double hbar, double tol) {
  if (t_end < t_begin) throw IntegrationError("propagate_ordered: t_end < t_begin");
  const double span = t_end - t_begin;
  Matrix probe = hamiltonian(t_begin);
  const auto n = probe.rows();
  Matrix u = Matrix::Identity(n, n);
  if (span == 0.0) return u;

  double t = t_begin;
  double h = span / 16.0;
  const double h_min = span * 1e-13;
  int consecutive_failures = 0;

  while (t < t_end) {
    h = std::min(h, t_end - t);
    Matrix id = Matrix::Identity(n, n);
    Matrix coarse = midpoint_step(hamiltonian, t, t + h, hbar, id);
    Matrix fine = midpoint_step(hamiltonian, t + 0.5 * h, t + h, hbar,
                                midpoint_step(hamiltonian, t, t + 0.5 * h, hbar, id));
    double err = max_abs(coarse - fine);
    if (err <= tol) {
      u = fine * u;
      t += h;
      consecutive_failures = 0;
      // Second-order method: grow conservatively when well under tolerance.
      if (err < 0.1 * tol) h *= 2.0;
    } else {
      h *= 0.5;
      if (++consecutive_failures > 60 || h < h_min) {
        throw IntegrationError("propagate_ordered: step controller failed to converge");
      }
    }
  }
  return u;
}

Matrix evolve_pointlike(const FlightConfig& cfg, double x_start, double t) {
  if (t < 0.0) throw IntegrationError("evolve_pointlike: t must be >= 0");
  auto h = [&cfg, x_start](double s) { return cfg.hamiltonian_at(x_start + cfg.v0 * s); };
  return propagate_ordered(h, 0.0, t, cfg.hbar, cfg.integrator_tol);
}

DensityMatrix internal_state_exact(const FlightConfig& cfg, const DensityMatrix& rho0,
                                   double t, bool check_convergence) {
  if (rho0.dim() != cfg.h0.rows()) throw ShapeError("internal_state_exact: dim mismatch");

  auto average = [&](int nodes) {
    QuadratureRule rule = cfg.packet.quadrature(nodes);
    Matrix acc = Matrix::Zero(rho0.dim(), rho0.dim());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      Matrix u = evolve_pointlike(cfg, rule.nodes[i], t);
      acc += rule.weights[i] * (u * rho0.matrix() * u.adjoint());
    }
    return acc;
  };

  Matrix rho = average(cfg.quad_nodes);
  if (check_convergence && cfg.packet.kind == Wavepacket::Kind::gaussian &&
      cfg.packet.dx > 0.0) {
    Matrix refined = average(cfg.quad_nodes + 10);
    if (max_abs(refined - rho) > 1e-8) {
      throw QuadratureError("internal_state_exact: quadrature not converged");
    }
  }
  return normalized_state(std::move(rho));
}

ClockTrajectory trajectory(const FlightConfig& cfg, const DensityMatrix& rho0) {
  ClockTrajectory out;
  out.times = cfg.time_grid;
  if (out.times.empty()) return out;

  QuadratureRule rule = cfg.packet.quadrature(cfg.quad_nodes);
  const auto n = cfg.h0.rows();
  const std::size_t n_nodes = rule.nodes.size();

  // Incremental unitaries per quadrature node plus one for the packet center.
  std::vector<Matrix> u_node(n_nodes, Matrix::Identity(n, n));
  Matrix u_center = Matrix::Identity(n, n);

  double t_prev = 0.0;
  for (double t : out.times) {
    for (std::size_t i = 0; i < n_nodes; ++i) {
      double x = rule.nodes[i];
      auto h = [&cfg, x](double s) { return cfg.hamiltonian_at(x + cfg.v0 * s); };
      u_node[i] = propagate_ordered(h, t_prev, t, cfg.hbar, cfg.integrator_tol) * u_node[i];
    }
    {
      double x = cfg.packet.x0;
      auto h = [&cfg, x](double s) { return cfg.hamiltonian_at(x + cfg.v0 * s); };
      u_center = propagate_ordered(h, t_prev, t, cfg.hbar, cfg.integrator_tol) * u_center;
    }
    t_prev = t;

    Matrix acc = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      acc += rule.weights[i] * (u_node[i] * rho0.matrix() * u_node[i].adjoint());
    }
    double drift = 0.0;
    DensityMatrix rho_exact = normalized_state(std::move(acc), &drift);
    out.max_trace_drift = std::max(out.max_trace_drift, drift);
    Matrix rho_na = u_center * rho0.matrix() * u_center.adjoint();

    out.u_na.push_back(u_center);
    out.fidelity.push_back(state_fidelity(rho_exact.matrix(), rho_na));
    out.entropy_nats.push_back(von_neumann_entropy(rho_exact));
    out.rho_exact.push_back(std::move(rho_exact));
  }
  return out;
}

}  // namespace flyq
