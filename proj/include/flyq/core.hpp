#pragma once

// Dense complex linear algebra substrate shared by every solver tier:
// matrix exponentials, density matrices, entropy/fidelity diagnostics and
// support/kernel projectors.

#include <cstdint>
#include <utility>

#include "flyq/types.hpp"

namespace flyq {

double max_abs(const Matrix& a);
double spectral_norm(const Matrix& a);

bool is_hermitian(const Matrix& a, double tol = kHermitianTol);
bool is_unitary(const Matrix& u, double tol = kUnitaryTol);
void require_hermitian(const Matrix& a, const char* what, double tol = kHermitianTol);

/// exp(scale * a). Hermitian inputs go through an eigendecomposition
/// (exact up to roundoff); anything else falls back to scaling-and-squaring
/// Pade. Dense path only, dim <= 64.
Matrix matrix_exponential(const Matrix& a, Complex scale = Complex(1.0, 0.0));

/// Hermitian, unit-trace, positive-semidefinite state on the internal space.
/// Small negative eigenvalues (above -floor) are tolerated and counted, so
/// perturbative states that dip slightly below zero stay usable.
class DensityMatrix {
public:
  DensityMatrix() = default;
  explicit DensityMatrix(const Matrix& rho, double psd_floor = kDefaultPsdFloor);

  const Matrix& matrix() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }

  static DensityMatrix pure(const Vector& psi);
  static DensityMatrix maximally_mixed(int dim);

private:
  Matrix rho_;
};

/// Number of eigenvalues clipped to zero so far (negative but above the PSD
/// floor). Shared across threads.
std::uint64_t psd_clip_count();
void reset_psd_clip_count();

struct SpectralDecomposition {
  RealVector eigenvalues;  // descending
  Matrix eigenvectors;     // orthonormal columns, matching order
};

SpectralDecomposition spectral(const Matrix& hermitian);
SpectralDecomposition spectral(const DensityMatrix& rho);

enum class EntropyUnit { nats, bits };

/// S = -sum p ln p with 0 ln 0 := 0. Eigenvalues are clipped to [0,1] after
/// the PSD tolerance check; a violation beyond the floor raises NotAState.
double von_neumann_entropy(const DensityMatrix& rho, EntropyUnit unit = EntropyUnit::nats);
double von_neumann_entropy(const Matrix& rho, EntropyUnit unit = EntropyUnit::nats,
                           double psd_floor = kDefaultPsdFloor);

/// Uhlmann fidelity [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2.
double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double state_fidelity(const Matrix& rho, const Matrix& sigma);

struct Projectors {
  Matrix onto_support;  // spans eigenvectors with p > rank_cut
  Matrix onto_kernel;   // complement
  int support_rank = 0;
};

/// Split the reference state's spectrum at rank_cut. Eigenvalues within a
/// factor of 10 of the cut on either side make the split ambiguous and the
/// caller has to pick a different cut.
Projectors partial_projectors(const DensityMatrix& rho_ref, double rank_cut);

}  // namespace flyq
