#pragma once

// Named gate scenarios wrapping the solver tiers: closed-form ballistic gate
// metrics, calibrated potential realizations, the figure-2 style preset, the
// two-body reduced-mass mapping and the two-qubit controlled gates.

#include <vector>

#include "flyq/clock.hpp"
#include "flyq/core.hpp"
#include "flyq/perturbation.hpp"

namespace flyq {

Matrix kron(const Matrix& a, const Matrix& b);

struct GateSpec {
  enum class Kind { not_gate, phase_gate, custom };
  Kind kind = Kind::not_gate;
  double phase = 0.0;  // PHASE angle
  Matrix h0;           // Hermitian internal Hamiltonian at the boundaries
  Matrix u_target;     // intended point-like evolution at the final time

  static GateSpec not_gate(double omega_q);
  static GateSpec phase_gate(double omega_q, double phi);
  static GateSpec custom(const Matrix& h0, const Matrix& u_target);
};

struct NotGateMetrics {
  double k = 0.0;
  double fidelity = 1.0;
  double entropy_nats = 0.0;
  bool out_of_validity = false;  // K >= 0.5, perturbative result untrustworthy
};

/// K = 4 a0 a1 (omega_q dx / v0)^2, F = 1 - K, S = K (1 - ln K).
NotGateMetrics not_gate_metrics(double a0, double a1, double theta, double omega_q,
                                double dx, double v0);

/// Commuting gates are untouched by the packet spread: F = 1, S = 0 exactly.
std::pair<double, double> phase_gate_metrics(double phi, const DensityMatrix& rho0);

struct GateCorrection {
  CorrectionTerm term;
  /// kappa with 1 - F ~= kappa (dx / hbar v0)^2 for pure rho0 (energy^2 units).
  double infidelity_prefactor = 0.0;
};

/// Scattering-limit correction for an arbitrary gate.
GateCorrection custom_gate_correction(const GateSpec& gate, const DensityMatrix& rho0);

struct TwoBodyConfig {
  double m1 = 0.0, m2 = 0.0;
  double v1 = 0.0, v2 = 0.0;
  double dx1 = 0.0, dx2 = 0.0;
  double x1_0 = 0.0, x2_0 = 0.0;  // mean positions at t = 0
  double correlation = 0.0;       // <x1 x2> - <x1><x2>
  Matrix h1, h2;
  PotentialProfile v_rel;  // relative coordinate x1 - x2, joint internal space
  double e0 = 1.0;
  double hbar = 1.0;
  std::vector<double> time_grid;
  int quad_nodes = 21;
};

/// Center-of-mass reduction: one flying body with the reduced mass, relative
/// velocity and combined spread; H0 = H1 (x) I + I (x) H2.
FlightConfig two_body_reduce(const TwoBodyConfig& cfg);

struct CnotMetrics {
  double fidelity = 1.0;      // 1 - p K
  double entropy_nats = 0.0;  // exact diagonalization on the two-qubit space
  bool out_of_validity = false;
};

/// p: excited population of the control, K: NOT-gate noise factor of the
/// target qubit.
CnotMetrics cnot_metrics(double p, double k);

struct BallisticEstimate {
  double eps_like = 0.0;          // omega_q dx / v0
  double one_minus_f_scale = 0.0; // its square
};

BallisticEstimate ballistic_regime_estimate(double omega_q, double dx_over_v0);

enum class NotProfile { gaussian, smoothed_rect };

/// Drive profile (sigma_x-like op, amplitude chi0/2) plus a wide plateau
/// that nulls the splitting (comp_op, amplitude -omega_q/2) across the
/// drive's support. Shared by the single-qubit NOT and the controlled-NOT
/// block realizations.
PotentialProfile gate_drive_potential(NotProfile profile, double length, double omega_q,
                                      double chi0, const Matrix& drive_op,
                                      const Matrix& comp_op);

struct CalibratedNotGate {
  FlightConfig config;  // amplitude-calibrated; time grid ends at t_final
  double chi0 = 0.0;    // calibrated coupling amplitude
  double t_final = 0.0; // phase-matched final time (past the exit)
  Matrix u_final;       // point-like gate, proportional to -i sigma_x
};

/// Tunes the amplitude of a sigma_x profile so the point-like evolution is a
/// pi rotation about an equatorial axis, then picks the final time where the
/// free precession aligns the axis with x. |Tr(U^dag U_target)|/2 >= 1-1e-10.
CalibratedNotGate calibrate_not_gate(NotProfile profile, double length, double omega_q,
                                     double v0, double dx, int time_samples = 0);

struct Fig2Params {
  double length = 1.0;     // potential width L
  double v0 = 1.0;
  double omega_q = 2.0 * M_PI;  // omega_q L / v0 = 2 pi
  double chi0 = 2.0 * M_PI;     // chi0 = omega_q
  double dx = 0.04;             // packet spread in units of L
  double k0_dx = 50.0;          // k0 * dx
  int samples = 120;
  int quad_nodes = 21;
};

struct Fig2Scenario {
  FlightConfig config;
  DensityMatrix rho0;  // (|0> + |1>)/sqrt(2)
  double mass = 0.0;   // hbar k0 / v0, used by the grid tier
};

/// Qubit superposition flying through a Gaussian sigma_x bump with sigma_z
/// free Hamiltonian; parameter defaults follow the documented desk choices.
Fig2Scenario fig2_preset(const Fig2Params& params = {});

}  // namespace flyq
