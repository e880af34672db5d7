#pragma once

// Initial spatial probability densities and the quadrature rules used to
// average position-resolved unitaries over them.

#include <vector>

#include "flyq/types.hpp"

namespace flyq {

struct QuadratureRule {
  std::vector<double> nodes;    // positions x
  std::vector<double> weights;  // sum to 1
};

struct Wavepacket {
  enum class Kind { gaussian, tabulated };

  Kind kind = Kind::gaussian;
  double x0 = 0.0;  // mean position
  double dx = 0.0;  // spatial spread (stdev)
  double k0 = 0.0;  // mean wavevector

  // tabulated density |psi(x)|^2 on an increasing sample grid
  std::vector<double> xs;
  std::vector<double> density;

  static Wavepacket gaussian(double x0, double dx, double k0);
  static Wavepacket tabulated(std::vector<double> xs, std::vector<double> density,
                              double k0 = 0.0);

  /// Quadrature over the position density. Gaussian packets use
  /// Gauss-Hermite nodes (spectrally accurate for smooth integrands),
  /// tabulated ones the trapezoid rule over their samples.
  QuadratureRule quadrature(int n_nodes = 21) const;

  double mean() const { return x0; }
  double spread() const { return dx; }
};

/// Probabilists' Gauss-Hermite rule mapped to mean/stdev (mu, sigma);
/// weights normalized to sum 1. Computed by Golub-Welsch.
QuadratureRule gauss_hermite_rule(int n, double mu, double sigma);

}  // namespace flyq
