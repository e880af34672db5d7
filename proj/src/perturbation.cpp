#include "flyq/perturbation.hpp"

#include <cmath>

namespace flyq {

namespace {

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix dissipator(const Matrix& x, const Matrix& rho) {
  Matrix xdx = x.adjoint() * x;
  return x * rho * x.adjoint() - 0.5 * (xdx * rho + rho * xdx);
}

struct SpectrumSplit {
  RealVector p;        // descending
  Matrix basis;        // eigenvectors
  Matrix c_eig;        // C rotated into the eigenbasis
  int support_rank;
};

SpectrumSplit split_spectrum(const Matrix& c, const DensityMatrix& rho_na, double rank_cut,
                             SpectrumBranch branch) {
  SpectrumSplit s;
  SpectralDecomposition sd = spectral(rho_na);
  s.p = sd.eigenvalues;
  s.basis = sd.eigenvectors;
  s.c_eig = s.basis.adjoint() * c * s.basis;
  const int n = static_cast<int>(s.p.size());

  switch (branch) {
    case SpectrumBranch::pure:
      s.support_rank = 1;
      break;
    case SpectrumBranch::full_rank:
      s.support_rank = n;
      break;
    default: {
      if (branch == SpectrumBranch::automatic) {
        for (int i = 0; i < n; ++i) {
          if (s.p(i) > rank_cut / 10.0 && s.p(i) < rank_cut * 10.0) {
            throw AmbiguousRank("spectrum eigenvalue " + std::to_string(s.p(i)) +
                                " within x10 of rank_cut");
          }
        }
      }
      s.support_rank = 0;
      for (int i = 0; i < n; ++i) {
        if (s.p(i) > rank_cut) ++s.support_rank;
      }
      break;
    }
  }
  if (s.support_rank < 1) throw AmbiguousRank("reference state has empty support");
  return s;
}

}  // namespace

BoundaryHamiltonians boundary_hamiltonians(const FlightConfig& cfg, double t) {
  BoundaryHamiltonians b;
  double x0 = cfg.packet.x0;
  b.h_start = cfg.hamiltonian_at(x0);
  b.h_now = cfg.hamiltonian_at(x0 + cfg.v0 * t);
  b.dh_start = cfg.hamiltonian_derivative_at(x0);
  b.dh_now = cfg.hamiltonian_derivative_at(x0 + cfg.v0 * t);
  return b;
}

BoundaryHamiltonians scattering_boundaries(const Matrix& h0) {
  BoundaryHamiltonians b;
  b.h_start = h0;
  b.h_now = h0;
  b.dh_start = Matrix::Zero(h0.rows(), h0.cols());
  b.dh_now = Matrix::Zero(h0.rows(), h0.cols());
  return b;
}

std::pair<Matrix, Matrix> u1_u2_scattering(const Matrix& u_na, const Matrix& h0) {
  if (u_na.rows() != h0.rows() || u_na.cols() != h0.cols()) {
    throw ShapeError("u1_u2_scattering: dimension mismatch");
  }
  Matrix u1 = commutator(h0, u_na);
  Matrix h0sq = h0 * h0;
  Matrix u2 = h0 * u_na * h0 - 0.5 * (h0sq * u_na + u_na * h0sq);
  return {u1, u2};
}

CorrectionTerm correction_term(const Matrix& u_na, const BoundaryHamiltonians& b,
                               const DensityMatrix& rho0, double t, double hbar,
                               double v0) {
  const auto n = u_na.rows();
  if (b.h_start.rows() != n || b.h_now.rows() != n || rho0.dim() != n) {
    throw ShapeError("correction_term: dimension mismatch");
  }
  bool inside = max_abs(b.h_now - b.h_start) > 1e-12 * std::max(1.0, max_abs(b.h_start));
  if (inside && (b.dh_now.size() == 0 || b.dh_start.size() == 0)) {
    throw IncompleteScenario(
        "correction_term: derivative terms required inside the interaction region");
  }

  const Matrix& rho = rho0.matrix();
  Matrix u_rho_ud = u_na * rho * u_na.adjoint();

  Matrix c = u_na * dissipator(b.h_start, rho) * u_na.adjoint();
  c += dissipator(b.h_now, u_rho_ud);
  c += commutator(b.h_now, u_na * commutator(b.h_start, rho) * u_na.adjoint());
  if (b.dh_now.size() != 0 && b.dh_start.size() != 0) {
    Matrix deriv = commutator(b.dh_now, u_rho_ud) -
                   u_na * commutator(b.dh_start, rho) * u_na.adjoint();
    c += Complex(0.0, -0.5 * hbar * v0) * deriv;
  }

  c = 0.5 * (c + c.adjoint().eval());  // Hermitian up to roundoff by construction
  CorrectionTerm out;
  out.matrix = std::move(c);
  out.at_time = t;

  // Tracelessness holds identically; allow roundoff at the scale of the
  // operator products even when C itself is numerically zero.
  double h_scale = max_abs(b.h_now) + max_abs(b.h_start) + max_abs(rho);
  double allowed = 1e-10 * max_abs(out.matrix) + 1e-12 * h_scale * h_scale;
  if (std::abs(out.matrix.trace()) > allowed * static_cast<double>(n)) {
    throw InvalidOperator("correction_term: trace check failed");
  }
  return out;
}

DensityMatrix approx_state(const DensityMatrix& rho_na, const Matrix& c_dimensionless,
                           double eps, double psd_floor) {
  if (eps < 0.0) throw InvalidOperator("approx_state: eps must be >= 0");
  if (c_dimensionless.rows() != rho_na.dim()) {
    throw ShapeError("approx_state: dimension mismatch");
  }
  Matrix rho = rho_na.matrix() + eps * eps * c_dimensionless;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint().eval()));
  if (es.eigenvalues().minCoeff() < -psd_floor) {
    throw PerturbationTooLarge("approx_state: state not PSD within floor, eps too large");
  }
  return DensityMatrix(rho, psd_floor);
}

double fidelity_pure_perturbative(const Matrix& c_dimensionless, const Vector& psi_na,
                                  double eps) {
  if (psi_na.size() != c_dimensionless.rows()) {
    throw ShapeError("fidelity_pure_perturbative: dimension mismatch");
  }
  double expect = std::real((psi_na.adjoint() * c_dimensionless * psi_na)(0, 0)) /
                  psi_na.squaredNorm();
  return 1.0 - eps * eps * std::abs(expect);
}

double entropy_perturbative(const Matrix& c_dimensionless, const DensityMatrix& rho_na,
                            double eps, double rank_cut, SpectrumBranch branch) {
  SpectrumSplit s = split_spectrum(c_dimensionless, rho_na, rank_cut, branch);
  const int n = static_cast<int>(s.p.size());
  const double eps2 = eps * eps;

  double s_na = 0.0;
  double support_part = 0.0;
  for (int i = 0; i < s.support_rank; ++i) {
    double p = std::min(std::max(s.p(i), 0.0), 1.0);
    if (p > 0.0) s_na -= p * std::log(p);
    double cii = std::real(s.c_eig(i, i));
    support_part += cii;
    if (p > 0.0) support_part += cii * std::log(p);
  }

  double kernel_part = 0.0;
  int m = n - s.support_rank;
  if (m > 0) {
    Matrix c_kernel = s.c_eig.bottomRightCorner(m, m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c_kernel);
    for (int j = 0; j < m; ++j) {
      double mu = es.eigenvalues()(j);
      // The kernel block must be PSD for the perturbed state to be a state;
      // roundoff-level negatives are treated as zero.
      if (mu <= 0.0) continue;
      double arg = eps2 * mu;
      if (arg > 0.0) kernel_part += mu * std::log(arg);
    }
  }

  return s_na - eps2 * (support_part + kernel_part);
}

MixedFidelityResult fidelity_mixed_perturbative(const Matrix& c_dimensionless,
                                                const DensityMatrix& rho_na, double eps,
                                                double rank_cut, bool strict) {
  SpectrumSplit s = split_spectrum(c_dimensionless, rho_na, rank_cut,
                                   SpectrumBranch::automatic);
  const int n = static_cast<int>(s.p.size());
  const double eps2 = eps * eps;

  MixedFidelityResult out;
  double trace_parallel = 0.0;
  for (int i = 0; i < s.support_rank; ++i) trace_parallel += std::real(s.c_eig(i, i));
  out.first_order = 1.0 + eps2 * trace_parallel;

  if (s.support_rank == n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double cii = std::real(s.c_eig(i, i));
      sum += cii * cii / (4.0 * s.p(i));
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        double denom = s.p(i) * s.p(i) - s.p(j) * s.p(j);
        if (std::abs(denom) < 1e-8) {
          if (i < j) out.skipped_pairs.emplace_back(i, j);
          continue;
        }
        sum -= s.p(j) * std::norm(s.c_eig(i, j)) / denom;
      }
    }
    out.fourth_order = 1.0 - eps2 * eps2 * sum;
    if (!out.skipped_pairs.empty() && strict) {
      throw DegenerateSpectrum("fidelity_mixed_perturbative: " +
                               std::to_string(out.skipped_pairs.size()) +
                               " near-degenerate pairs in the fourth-order sum");
    }
  }
  return out;
}

}  // namespace flyq
