#pragma once

// Reference propagation of the full Hamiltonian, kinetic term included, for a
// spinor wavefunction on a uniform 1D grid: Strang-split steps with Fourier
// kinetic half-steps and cached per-point internal exponentials.

#include <memory>
#include <string>
#include <vector>

#include "flyq/core.hpp"
#include "flyq/profile.hpp"

namespace flyq {

struct GridState {
  double xmin = 0.0;
  double dx = 0.0;       // grid spacing
  int npoints = 0;       // power of two
  int nlevels = 0;       // internal dimension
  Matrix spinor;         // npoints x nlevels, column-major (levels contiguous)
  double mass = 0.0;
  double hbar = 1.0;
  double time = 0.0;
  double packet_dx = 0.0;  // initial spread, used for edge-margin checks

  double x_at(int i) const { return xmin + dx * i; }
  double norm() const;                       // sum |psi|^2 dx
  double edge_probability(double margin) const;
};

/// Gaussian packet times a pure internal state, normalized on the grid.
GridState make_gaussian_grid_state(double xmin, double dx_grid, int npoints, double x0,
                                   double packet_dx, double k0, const Vector& internal,
                                   double mass, double hbar = 1.0);

/// Largest stable step: hbar k_occ^2 dt / (2 m) < pi/4 with safety factor 0.5,
/// where k_occ covers the packet's occupied spectrum.
double suggest_dt(const GridState& state, double k0);

/// Splits the propagation into FFT kinetic half-steps around a full internal
/// step exp(-i (H0 + V(x)) dt / hbar); the internal exponentials are sampled
/// once since the potential is static.
class GridSolver {
public:
  GridSolver(const GridState& prototype, const Matrix& h0, const PotentialProfile& pot,
             double dt);
  ~GridSolver();
  GridSolver(const GridSolver&) = delete;
  GridSolver& operator=(const GridSolver&) = delete;

  void step(GridState& state, int nsteps) const;
  double dt() const { return dt_; }

  /// <H> = <p^2/2m> + <H0 + V>; conserved by the exact flow.
  double energy(const GridState& state) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double dt_;
};

/// One-shot convenience wrapper over GridSolver.
GridState propagate_full(const GridState& state, const Matrix& h0,
                         const PotentialProfile& pot, double dt, int steps);

/// Exact partial trace over the grid: sum_x psi(x) psi(x)^dag dx.
DensityMatrix reduce_internal(const GridState& state);

/// Binary snapshot (little-endian): magic "FQGS", u32 version, u64 npoints,
/// u64 nlevels, f64 xmin, f64 dx, f64 mass, f64 hbar, f64 time, f64 packet_dx,
/// then npoints*nlevels complex64 pairs (float32 re, float32 im), row-major
/// over grid points.
void dump_snapshot(const GridState& state, const std::string& path);
GridState load_snapshot(const std::string& path);

}  // namespace flyq
