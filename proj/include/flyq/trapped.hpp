#pragma once

// Qubits carried by a moving trap: second-order Dyson terms for the
// trap-induced internal-state correction, closed-form worst-case bounds for
// harmonic and box traps, and the experimental magnitude table.

#include <functional>
#include <string>
#include <vector>

#include "flyq/core.hpp"

namespace flyq {

struct TrapConfig {
  enum class Kind { harmonic, box };
  Kind kind = Kind::harmonic;
  double e_eg = 0.0;   // spatial ground-to-first-excited gap (energy)
  double r_eg = 0.0;   // transition matrix element <e|x|g> (length)
  double dx = 0.0;     // ground-state spread (length)
  double mass = 0.0;
  double v0 = 0.0;
  double tau = 0.0;    // gate duration
  double hbar = 1.0;

  /// Harmonic well: |r_eg| = dx, E_eg = hbar^2 / (2 m dx^2).
  static TrapConfig harmonic(double dx, double mass, double v0, double tau,
                             double hbar = 1.0);
  /// Box of length L: r_eg = 16 L / (9 pi^2), E_eg = 3 hbar^2 / (8 m L^2),
  /// dx = L sqrt((pi^2 - 6) / (12 pi^2)).
  static TrapConfig box(double box_length, double mass, double v0, double tau,
                        double hbar = 1.0);
};

struct DysonTerms {
  Matrix x1;  // first-order oscillatory integral (energy units)
  Matrix x2;  // second-order double integral (energy^2 units)
  double at_time = 0.0;
};

/// Oscillatory Dyson integrals of the co-moving drive:
///   X1(t) = int_0^t e^{i s E/hbar} A(s) ds,   A = U^dag(s) dV/ds U(s),
///   X2(t) = 2 int_0^t e^{-i s E/hbar} A(s) X1(s) ds,
/// evaluated on a fixed grid with >= samples_per_period points per phase
/// period and Richardson-verified against the halved step.
DysonTerms dyson_terms(const Matrix& h0, const std::function<Matrix(double)>& v_of_t,
                       const std::function<Matrix(double)>& vdot_of_t, double e_eg,
                       double t, double hbar = 1.0, int samples_per_period = 20);

/// Interaction-picture internal state
///   rho0 - |r_eg|^2/(2 hbar^2 v0^2) {X2 rho0 + rho0 X2^dag - 2 X1 rho0 X1^dag}.
DensityMatrix trapped_state(const DensityMatrix& rho0, const DysonTerms& terms,
                            double r_eg, double v0, double hbar = 1.0);

/// Generic bound 9 hbar^2 |r_eg|^2 / (v0^2 tau^4 E_eg^2); reduces to
/// 36 m^2 dx^6 / (hbar^2 v0^2 tau^4) for harmonic traps and to about
/// 6e4 m^2 dx^6 / (hbar^2 v0^2 tau^4) for a box.
double worst_case_bound(const TrapConfig& cfg);

struct MagnitudeRow {
  std::string name;
  TrapConfig config;     // SI units
  double bound = 0.0;    // full precision
  double reported = 0.0; // rounded to one significant figure, like the inputs
};

/// The three experimental regimes (surfing and shuttling spin qubits, flying
/// Rydberg atoms) with one-significant-figure inputs.
std::vector<MagnitudeRow> magnitude_table();

}  // namespace flyq
