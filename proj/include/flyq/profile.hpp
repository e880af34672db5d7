#pragma once

// Spatial potential profiles: V(x) = sum_i f_i(x) * amplitude_i * O_i with
// dimensionless shapes f_i of compact effective support and Hermitian
// internal operators O_i.

#include <functional>
#include <vector>

#include "flyq/types.hpp"

namespace flyq {

struct ProfileTerm {
  std::function<double(double)> shape;             // f_i(x), dimensionless
  std::function<double(double)> shape_derivative;  // f_i'(x); empty -> central FD
  double amplitude = 0.0;                          // energy scale
  Matrix op;                                       // Hermitian internal operator
};

class PotentialProfile {
public:
  PotentialProfile() = default;
  PotentialProfile(std::vector<ProfileTerm> terms, double support_min, double support_max);

  /// H-part at position x: sum_i f_i(x) A_i O_i.
  Matrix value(double x) const;
  /// d/dx of the above.
  Matrix derivative(double x) const;

  double support_min() const { return support_min_; }
  double support_max() const { return support_max_; }
  int dim() const { return dim_; }
  const std::vector<ProfileTerm>& terms() const { return terms_; }

  /// Rescale every term amplitude by a common factor (used by gate calibration).
  PotentialProfile with_amplitude_scale(double factor) const;

private:
  std::vector<ProfileTerm> terms_;
  double support_min_ = 0.0, support_max_ = 0.0;
  int dim_ = 0;
  double fd_step_ = 1e-5;
};

/// exp(-pi (x-center)^2 / width^2); support where the shape exceeds 1e-12.
PotentialProfile gaussian_profile(double width, double center, double amplitude,
                                  const Matrix& op);

/// Flat-top profile with tanh edges of scale `edge`, full width `width` at
/// half maximum, centered at `center`.
PotentialProfile smoothed_rect_profile(double width, double edge, double center,
                                       double amplitude, const Matrix& op);

}  // namespace flyq
