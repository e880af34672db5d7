#include "flyq/core.hpp"

#include <atomic>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace flyq {

namespace {

std::atomic<std::uint64_t> g_psd_clips{0};

constexpr int kMaxDenseDim = 64;

void require_square_finite(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ShapeError(std::string(what) + ": operator must be square and non-empty");
  }
  if (!a.allFinite()) {
    throw InvalidOperator(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

bool is_hermitian(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  double scale = std::max(max_abs(a), 1.0);
  return max_abs(a - a.adjoint()) <= tol * scale;
}

bool is_unitary(const Matrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  Matrix gram = u.adjoint() * u;
  gram -= Matrix::Identity(u.rows(), u.cols());
  return max_abs(gram) <= tol;
}

void require_hermitian(const Matrix& a, const char* what, double tol) {
  require_square_finite(a, what);
  if (!is_hermitian(a, tol)) {
    throw InvalidOperator(std::string(what) + ": not Hermitian within tolerance");
  }
}

Matrix matrix_exponential(const Matrix& a, Complex scale) {
  require_square_finite(a, "matrix_exponential");
  if (a.rows() > kMaxDenseDim) {
    throw InvalidOperator("matrix_exponential: dim > 64 not supported (dense path)");
  }
  const auto n = a.rows();

  if (is_hermitian(a)) {
    if (n == 2) {
      // Pauli decomposition, exact closed form.
      Complex h00 = a(0, 0), h01 = a(0, 1), h11 = a(1, 1);
      double c0 = 0.5 * std::real(h00 + h11);
      double bx = std::real(h01);
      double by = -std::imag(h01);
      double bz = 0.5 * std::real(h00 - h11);
      double b = std::sqrt(bx * bx + by * by + bz * bz);
      Complex ch, shob;  // cosh(s b), sinh(s b)/b
      if (b < 1e-300) {
        ch = 1.0;
        shob = scale;  // sinh(s b)/b -> s as b -> 0
      } else {
        ch = std::cosh(scale * b);
        shob = std::sinh(scale * b) / b;
      }
      Complex pre = std::exp(scale * c0);
      Matrix r(2, 2);
      r(0, 0) = pre * (ch + shob * bz);
      r(0, 1) = pre * shob * Complex(bx, -by);
      r(1, 0) = pre * shob * Complex(bx, by);
      r(1, 1) = pre * (ch - shob * bz);
      return r;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) {
      throw InvalidOperator("matrix_exponential: eigendecomposition failed");
    }
    Vector ephase(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      ephase(i) = std::exp(scale * es.eigenvalues()(i));
    }
    return es.eigenvectors() * ephase.asDiagonal() * es.eigenvectors().adjoint();
  }

  Matrix scaled = scale * a;
  return scaled.exp();
}

DensityMatrix::DensityMatrix(const Matrix& rho, double psd_floor) {
  require_square_finite(rho, "DensityMatrix");
  double scale = std::max(max_abs(rho), 1.0);
  if (max_abs(rho - rho.adjoint()) > kHermitianTol * scale) {
    throw NotAState("DensityMatrix: not Hermitian");
  }
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-12 * std::max(1.0, scale)) {
    throw NotAState("DensityMatrix: trace != 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -psd_floor) {
    throw NotAState("DensityMatrix: eigenvalue " + std::to_string(min_eig) +
                    " below PSD floor");
  }
  if (min_eig < -1e-10) {
    g_psd_clips.fetch_add(1, std::memory_order_relaxed);
  }
  rho_ = 0.5 * (rho + rho.adjoint().eval());
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  double n2 = psi.squaredNorm();
  if (n2 <= 0.0 || !psi.allFinite()) throw NotAState("pure: invalid state vector");
  Matrix rho = psi * psi.adjoint() / n2;
  return DensityMatrix(rho);
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

std::uint64_t psd_clip_count() { return g_psd_clips.load(std::memory_order_relaxed); }
void reset_psd_clip_count() { g_psd_clips.store(0, std::memory_order_relaxed); }

SpectralDecomposition spectral(const Matrix& hermitian) {
  require_hermitian(hermitian, "spectral", 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  const auto n = hermitian.rows();
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = es.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

SpectralDecomposition spectral(const DensityMatrix& rho) { return spectral(rho.matrix()); }

namespace {

RealVector state_probabilities(const Matrix& rho, double psd_floor) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  Eigen::ComputationInfo info = es.info();
  if (info != Eigen::Success) throw NotAState("state eigendecomposition failed");
  RealVector p = es.eigenvalues();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < -psd_floor) {
      throw NotAState("state eigenvalue below PSD floor: " + std::to_string(p(i)));
    }
    if (p(i) < 0.0) {
      g_psd_clips.fetch_add(1, std::memory_order_relaxed);
      p(i) = 0.0;
    }
    if (p(i) > 1.0) p(i) = 1.0;
  }
  return p;
}

}  // namespace

double von_neumann_entropy(const Matrix& rho, EntropyUnit unit, double psd_floor) {
  RealVector p = state_probabilities(rho, psd_floor);
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) s -= p(i) * std::log(p(i));
  }
  if (s < 0.0) s = 0.0;
  return unit == EntropyUnit::bits ? s / std::log(2.0) : s;
}

double von_neumann_entropy(const DensityMatrix& rho, EntropyUnit unit) {
  return von_neumann_entropy(rho.matrix(), unit);
}

double state_fidelity(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw ShapeError("state_fidelity: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  RealVector p = es.eigenvalues();
  // Eigenvalues at roundoff level are genuine zeros; keeping them would leak
  // sqrt(eps)-sized noise into the square root.
  double p_cut = 1e-14 * std::max(p.maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = p(i) > p_cut ? p(i) : 0.0;
  Matrix sqrt_rho = es.eigenvectors() *
                    p.cwiseSqrt().cast<Complex>().asDiagonal() *
                    es.eigenvectors().adjoint();
  Matrix m = sqrt_rho * sigma * sqrt_rho;
  m = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es2(m);
  double lam_cut = 1e-15 * std::max(es2.eigenvalues().maxCoeff(), 0.0);
  double f = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double v = es2.eigenvalues()(i);
    if (v > lam_cut) f += std::sqrt(v);
  }
  f *= f;
  if (f > 1.0 && f < 1.0 + 1e-9) f = 1.0;
  return f;
}

double state_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return state_fidelity(rho.matrix(), sigma.matrix());
}

Projectors partial_projectors(const DensityMatrix& rho_ref, double rank_cut) {
  if (rank_cut <= 0.0) throw AmbiguousRank("partial_projectors: rank_cut must be > 0");
  SpectralDecomposition sd = spectral(rho_ref);
  const auto n = sd.eigenvalues.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = sd.eigenvalues(i);
    if (p > rank_cut / 10.0 && p < rank_cut * 10.0) {
      throw AmbiguousRank("partial_projectors: eigenvalue " + std::to_string(p) +
                          " within x10 of rank_cut " + std::to_string(rank_cut));
    }
  }
  Projectors out;
  out.onto_support = Matrix::Zero(n, n);
  out.onto_kernel = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix proj = sd.eigenvectors.col(i) * sd.eigenvectors.col(i).adjoint();
    if (sd.eigenvalues(i) > rank_cut) {
      out.onto_support += proj;
      ++out.support_rank;
    } else {
      out.onto_kernel += proj;
    }
  }
  return out;
}

}  // namespace flyq
