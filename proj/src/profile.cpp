#include "flyq/profile.hpp"

#include <cmath>

#include "flyq/core.hpp"

namespace flyq {

PotentialProfile::PotentialProfile(std::vector<ProfileTerm> terms, double support_min,
                                   double support_max)
    : terms_(std::move(terms)), support_min_(support_min), support_max_(support_max) {
  if (terms_.empty()) throw InvalidOperator("PotentialProfile: no terms");
  if (!(support_min_ < support_max_)) {
    throw InvalidOperator("PotentialProfile: empty support window");
  }
  dim_ = static_cast<int>(terms_.front().op.rows());
  for (const auto& t : terms_) {
    require_hermitian(t.op, "PotentialProfile term");
    if (t.op.rows() != dim_) throw ShapeError("PotentialProfile: mixed operator dims");
    if (!t.shape) throw InvalidOperator("PotentialProfile: missing shape function");
  }
  fd_step_ = 1e-5 * (support_max_ - support_min_);
}

Matrix PotentialProfile::value(double x) const {
  Matrix v = Matrix::Zero(dim_, dim_);
  for (const auto& t : terms_) v += t.shape(x) * t.amplitude * t.op;
  return v;
}

Matrix PotentialProfile::derivative(double x) const {
  Matrix v = Matrix::Zero(dim_, dim_);
  for (const auto& t : terms_) {
    double d = t.shape_derivative
                   ? t.shape_derivative(x)
                   : (t.shape(x + fd_step_) - t.shape(x - fd_step_)) / (2.0 * fd_step_);
    v += d * t.amplitude * t.op;
  }
  return v;
}

PotentialProfile PotentialProfile::with_amplitude_scale(double factor) const {
  PotentialProfile out = *this;
  for (auto& t : out.terms_) t.amplitude *= factor;
  return out;
}

PotentialProfile gaussian_profile(double width, double center, double amplitude,
                                  const Matrix& op) {
  if (width <= 0.0) throw InvalidOperator("gaussian_profile: width must be > 0");
  // exp(-pi x^2 / w^2) = 1e-12 at |x| = w sqrt(12 ln 10 / pi)
  double half_support = width * std::sqrt(12.0 * std::log(10.0) / M_PI);
  ProfileTerm term;
  term.shape = [width, center](double x) {
    double u = (x - center) / width;
    return std::exp(-M_PI * u * u);
  };
  term.shape_derivative = [width, center](double x) {
    double u = (x - center) / width;
    return -2.0 * M_PI * u / width * std::exp(-M_PI * u * u);
  };
  term.amplitude = amplitude;
  term.op = op;
  return PotentialProfile({term}, center - half_support, center + half_support);
}

PotentialProfile smoothed_rect_profile(double width, double edge, double center,
                                       double amplitude, const Matrix& op) {
  if (width <= 0.0 || edge <= 0.0) {
    throw InvalidOperator("smoothed_rect_profile: width and edge must be > 0");
  }
  // 0.5*[tanh((x+w/2)/a) - tanh((x-w/2)/a)]; tails fall off as exp(-2|x|/a),
  // reaching 1e-12 about 14 edge-lengths past the half-width.
  double half_support = 0.5 * width + 14.0 * edge;
  ProfileTerm term;
  term.shape = [width, edge, center](double x) {
    double u = x - center;
    return 0.5 * (std::tanh((u + 0.5 * width) / edge) - std::tanh((u - 0.5 * width) / edge));
  };
  term.shape_derivative = [width, edge, center](double x) {
    double u = x - center;
    double cp = std::cosh((u + 0.5 * width) / edge);
    double cm = std::cosh((u - 0.5 * width) / edge);
    return 0.5 / edge * (1.0 / (cp * cp) - 1.0 / (cm * cm));
  };
  term.amplitude = amplitude;
  term.op = op;
  return PotentialProfile({term}, center - half_support, center + half_support);
}

}  // namespace flyq
