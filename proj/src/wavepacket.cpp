#include "flyq/wavepacket.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "flyq/types.hpp"

namespace flyq {

QuadratureRule gauss_hermite_rule(int n, double mu, double sigma) {
  if (n < 1) throw QuadratureError("gauss_hermite_rule: need at least one node");
  // Jacobi matrix for physicists' Hermite polynomials: off-diagonal sqrt(i/2).
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    double b = std::sqrt(0.5 * i);
    j(i, i - 1) = b;
    j(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double xi = es.eigenvalues()(i);
    double w = es.eigenvectors()(0, i);
    w = w * w;  // normalized: plain sum over weights is 1
    rule.nodes[i] = mu + std::sqrt(2.0) * sigma * xi;
    rule.weights[i] = w;
  }
  return rule;
}

Wavepacket Wavepacket::gaussian(double x0, double dx, double k0) {
  if (dx < 0.0) throw InvalidOperator("Wavepacket: negative spread");
  Wavepacket wp;
  wp.kind = Kind::gaussian;
  wp.x0 = x0;
  wp.dx = dx;
  wp.k0 = k0;
  return wp;
}

Wavepacket Wavepacket::tabulated(std::vector<double> xs, std::vector<double> density,
                                 double k0) {
  if (xs.size() != density.size() || xs.size() < 3) {
    throw InvalidOperator("Wavepacket: tabulated needs >= 3 matching samples");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw InvalidOperator("Wavepacket: xs must increase");
  }
  Wavepacket wp;
  wp.kind = Kind::tabulated;
  wp.k0 = k0;
  wp.xs = std::move(xs);
  wp.density = std::move(density);

  // trapezoid moments; normalize the stored density in place
  double norm = 0.0, m1 = 0.0, m2 = 0.0;
  auto& x = wp.xs;
  auto& d = wp.density;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    double h = x[i + 1] - x[i];
    norm += 0.5 * h * (d[i] + d[i + 1]);
    m1 += 0.5 * h * (d[i] * x[i] + d[i + 1] * x[i + 1]);
    m2 += 0.5 * h * (d[i] * x[i] * x[i] + d[i + 1] * x[i + 1] * x[i + 1]);
  }
  if (norm <= 0.0) throw InvalidOperator("Wavepacket: density does not normalize");
  for (auto& v : d) v /= norm;
  m1 /= norm;
  m2 /= norm;
  wp.x0 = m1;
  wp.dx = std::sqrt(std::max(0.0, m2 - m1 * m1));
  return wp;
}

QuadratureRule Wavepacket::quadrature(int n_nodes) const {
  if (kind == Kind::gaussian) {
    if (dx == 0.0) {
      return QuadratureRule{{x0}, {1.0}};
    }
    return gauss_hermite_rule(n_nodes, x0, dx);
  }
  QuadratureRule rule;
  rule.nodes = xs;
  rule.weights.assign(xs.size(), 0.0);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    double h = xs[i + 1] - xs[i];
    rule.weights[i] += 0.5 * h * density[i];
    rule.weights[i + 1] += 0.5 * h * density[i + 1];
  }
  double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (auto& w : rule.weights) w /= total;
  return rule;
}

}  // namespace flyq
