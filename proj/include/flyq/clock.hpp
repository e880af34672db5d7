#pragma once

// Exact internal dynamics under the linearized-velocity Hamiltonian: the
// wavepacket translates rigidly at v0 and the internal state associated with
// position x evolves under the time-ordered product along the potential. The
// reduced internal state is the quadrature average of those unitaries over
// the initial position density.

#include <functional>
#include <vector>

#include "flyq/core.hpp"
#include "flyq/profile.hpp"
#include "flyq/wavepacket.hpp"

namespace flyq {

struct FlightConfig {
  Matrix h0;                  // position-independent internal Hamiltonian (energy)
  PotentialProfile potential;
  Wavepacket packet;
  double v0 = 0.0;            // group velocity, > 0
  double e0 = 0.0;            // declared characteristic internal energy scale
  std::vector<double> time_grid;  // strictly increasing, starting at 0
  double hbar = 1.0;
  int quad_nodes = 21;
  double integrator_tol = 1e-10;  // local step tolerance

  double epsilon() const;  // dx * e0 / (hbar v0)
  bool epsilon_warning() const { return epsilon() > 0.3; }

  /// Effective internal Hamiltonian at position x.
  Matrix hamiltonian_at(double x) const;
  Matrix hamiltonian_derivative_at(double x) const;

  /// Time after which the packet center has passed support_max + 5 dx.
  double exit_time() const;
};

/// Validates geometry (packet fully left of the support at t=0, sane grid)
/// and returns the config unchanged.
FlightConfig validate_flight(FlightConfig cfg);

/// Time-ordered product of midpoint exponentials with step-halving error
/// control: exp(-i dt H((a+b)/2)/hbar) refined until the local Richardson
/// estimate is below tol. Unitary by construction.
Matrix propagate_ordered(const std::function<Matrix(double)>& hamiltonian, double t_begin,
                         double t_end, double hbar, double tol = 1e-10);

/// Evolution operator for the wavepacket slice that starts at x_start.
Matrix evolve_pointlike(const FlightConfig& cfg, double x_start, double t);

/// Reduced internal state at time t: quadrature average of U rho0 U^dag over
/// the position density. check_convergence reruns with more nodes and
/// throws QuadratureError if the result moves by more than 1e-8.
DensityMatrix internal_state_exact(const FlightConfig& cfg, const DensityMatrix& rho0,
                                   double t, bool check_convergence = false);

struct ClockTrajectory {
  std::vector<double> times;
  std::vector<Matrix> u_na;              // point-like (center) unitaries
  std::vector<DensityMatrix> rho_exact;  // quadrature-averaged states
  std::vector<double> fidelity;          // vs the point-like state
  std::vector<double> entropy_nats;
  double max_trace_drift = 0.0;          // before renormalization
};

/// Batched internal_state_exact over the config's time grid; unitaries are
/// advanced incrementally per node so cost is O(nodes x steps).
ClockTrajectory trajectory(const FlightConfig& cfg, const DensityMatrix& rho0);

}  // namespace flyq
