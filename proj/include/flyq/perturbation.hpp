#pragma once

// Second-order machinery in the packet spread: scattering operators U1/U2,
// the traceless Hermitian correction term entering
//   rho_I(t) = rho_NA(t) + (dx / hbar v0)^2 C(t),
// and the perturbative fidelity/entropy formulas with support/kernel
// splitting for degenerate reference spectra.

#include <optional>
#include <utility>
#include <vector>

#include "flyq/clock.hpp"
#include "flyq/core.hpp"

namespace flyq {

/// Boundary Hamiltonians of a flight: the effective internal Hamiltonian and
/// its spatial derivative at the packet's start position and at its current
/// position. In the scattering limit both reduce to h0 and the derivatives
/// vanish.
struct BoundaryHamiltonians {
  Matrix h_start;   // H(x0)
  Matrix h_now;     // H(x0 + v0 t)
  Matrix dh_start;  // dH/dx at x0
  Matrix dh_now;    // dH/dx at x0 + v0 t
};

BoundaryHamiltonians boundary_hamiltonians(const FlightConfig& cfg, double t);
BoundaryHamiltonians scattering_boundaries(const Matrix& h0);

/// U1 = [H0, U_NA], U2 = H0 U_NA H0 - (1/2){H0^2, U_NA}.
std::pair<Matrix, Matrix> u1_u2_scattering(const Matrix& u_na, const Matrix& h0);

/// Correction term in energy^2 units; divide by E0^2 (dimensionless()) to
/// pair with epsilon = dx E0 / (hbar v0).
struct CorrectionTerm {
  Matrix matrix;  // energy^2
  double at_time = 0.0;

  Matrix dimensionless(double e0) const { return matrix / (e0 * e0); }
};

/// Traceless Hermitian correction at time t built from the point-like
/// unitary and the boundary Hamiltonians. The derivative terms contribute
/// only while the packet center is inside the interaction region.
CorrectionTerm correction_term(const Matrix& u_na, const BoundaryHamiltonians& b,
                               const DensityMatrix& rho0, double t, double hbar,
                               double v0);

/// rho_NA + eps^2 * C with C dimensionless; trace is preserved exactly and
/// the PSD floor is enforced (PerturbationTooLarge beyond it).
DensityMatrix approx_state(const DensityMatrix& rho_na, const Matrix& c_dimensionless,
                           double eps, double psd_floor = kDefaultPsdFloor);

/// F ~= 1 - eps^2 |<psi_NA| C |psi_NA>| for pure reference states.
double fidelity_pure_perturbative(const Matrix& c_dimensionless, const Vector& psi_na,
                                  double eps);

enum class SpectrumBranch { automatic, pure, full_rank, general };

/// Perturbative entropy in nats. The reference spectrum is split at rank_cut
/// into support and kernel; the kernel block carries the eps^2 ln eps^2
/// singular part. automatic picks the branch from the spectrum and raises
/// AmbiguousRank when an eigenvalue sits within x10 of the cut.
double entropy_perturbative(const Matrix& c_dimensionless, const DensityMatrix& rho_na,
                            double eps, double rank_cut = 1e-6,
                            SpectrumBranch branch = SpectrumBranch::automatic);

struct MixedFidelityResult {
  double first_order = 1.0;               // 1 + eps^2 Tr C_parallel
  std::optional<double> fourth_order;     // full-rank refinement, when defined
  std::vector<std::pair<int, int>> skipped_pairs;  // near-degenerate terms excluded
};

/// First-order mixed-state fidelity, plus the fourth-order full-rank
/// refinement when the reference state has no kernel. Degenerate eigenvalue
/// pairs make individual fourth-order terms singular; those are skipped and
/// reported (or raise DegenerateSpectrum when strict).
MixedFidelityResult fidelity_mixed_perturbative(const Matrix& c_dimensionless,
                                                const DensityMatrix& rho_na, double eps,
                                                double rank_cut = 1e-6,
                                                bool strict = false);

}  // namespace flyq
