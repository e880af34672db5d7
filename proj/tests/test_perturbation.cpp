#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "flyq/perturbation.hpp"
#include "test_helpers.hpp"

using namespace flyq;

namespace {

// NOT-gate correction in the scattering limit for a qubit prepared as
// sqrt(a0)|0> + e^{i theta} sqrt(a1)|1>, in units of (hbar omega_q)^2:
// C = -2 [ e^{i theta} sqrt(a0 a1) |0><1| + h.c. ].
Matrix not_gate_c_closed_form(double a0, double a1, double theta) {
  Matrix c = Matrix::Zero(2, 2);
  Complex off = -2.0 * std::sqrt(a0 * a1) * std::exp(Complex(0.0, theta));
  c(0, 1) = off;
  c(1, 0) = std::conj(off);
  return c;
}

Vector initial_qubit(double a0, double a1, double theta) {
  Vector psi(2);
  psi << std::sqrt(a0), std::exp(Complex(0.0, theta)) * std::sqrt(a1);
  return psi;
}

// A smooth random scattering scenario used for the residual-scaling checks.
struct Scenario {
  FlightConfig cfg;
  DensityMatrix rho0;
};

Scenario random_scenario(std::mt19937_64& rng, double dx) {
  std::uniform_real_distribution<double> unif(0.6, 1.6);
  FlightConfig cfg;
  cfg.h0 = 0.5 * unif(rng) * pauli_z();
  Matrix axis = pauli_x();
  if (rng() % 2) axis = (pauli_x() + 0.7 * pauli_y()) / std::sqrt(1.49);
  cfg.potential = gaussian_profile(unif(rng), 0.0, 0.5 * unif(rng), axis);
  cfg.packet = Wavepacket::gaussian(cfg.potential.support_min() - 5.0 * dx - 0.3, dx, 200.0);
  cfg.v0 = 1.0;
  cfg.e0 = 1.0;
  cfg.quad_nodes = 31;
  cfg.integrator_tol = 1e-12;
  cfg.time_grid = {0.0};
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  double th = angle(rng);
  Vector psi = initial_qubit(0.5, 0.5, th);
  return {validate_flight(cfg), DensityMatrix::pure(psi)};
}

// Residual of the second-order expansion against the exact quadrature state.
double expansion_residual(const Scenario& sc, double t) {
  Matrix u = evolve_pointlike(sc.cfg, sc.cfg.packet.x0, t);
  Matrix rho_na = u * sc.rho0.matrix() * u.adjoint();
  BoundaryHamiltonians b = boundary_hamiltonians(sc.cfg, t);
  CorrectionTerm c = correction_term(u, b, sc.rho0, t, sc.cfg.hbar, sc.cfg.v0);
  double lambda = std::pow(sc.cfg.packet.dx / (sc.cfg.hbar * sc.cfg.v0), 2);
  DensityMatrix exact = internal_state_exact(sc.cfg, sc.rho0, t);
  return max_abs(exact.matrix() - rho_na - lambda * c.matrix);
}

}  // namespace

TEST_CASE("u1/u2 vanish for the identity gate") {
  Matrix h0 = 0.5 * pauli_z();
  auto [u1, u2] = u1_u2_scattering(Matrix::Identity(2, 2), h0);
  CHECK(max_abs(u1) < 1e-15);
  CHECK(max_abs(u2) < 1e-15);
}

TEST_CASE("u1 vanishes for a commuting gate") {
  Matrix h0 = 0.8 * pauli_z();
  Matrix u = matrix_exponential(pauli_z(), Complex(0.0, -0.45));
  auto [u1, u2] = u1_u2_scattering(u, h0);
  CHECK(max_abs(u1) < 1e-14);
}

TEST_CASE("u1/u2 against direct matrix arithmetic") {
  std::mt19937_64 rng(41);
  Matrix h0 = random_hermitian(3, rng);
  Matrix u = random_unitary(3, rng);
  auto [u1, u2] = u1_u2_scattering(u, h0);
  CHECK(max_abs(u1 - (h0 * u - u * h0)) < 1e-13);
  Matrix expected_u2 = h0 * u * h0 - 0.5 * (h0 * h0 * u + u * h0 * h0);
  CHECK(max_abs(u2 - expected_u2) < 1e-13);

  // NOT gate with sigma_z Hamiltonian: U1 = omega [sz, sx] * (-i/2) shape
  double omega = 1.3;
  Matrix u_not = Complex(0, -1) * pauli_x();
  auto [v1, v2] = u1_u2_scattering(u_not, 0.5 * omega * pauli_z());
  Matrix expected = 0.5 * omega * (pauli_z() * u_not - u_not * pauli_z());
  CHECK(max_abs(v1 - expected) < 1e-14);
}

TEST_CASE("correction term vanishes for commuting dynamics") {
  std::mt19937_64 rng(42);
  Matrix h0 = 0.7 * pauli_z();
  Matrix u = matrix_exponential(h0 + 0.4 * pauli_z(), Complex(0.0, -2.2));
  DensityMatrix rho0(random_density(2, rng));
  CorrectionTerm c = correction_term(u, scattering_boundaries(h0), rho0, 1.0, 1.0, 1.0);
  CHECK(max_abs(c.matrix) < 1e-13);
}

TEST_CASE("NOT-gate correction matches the closed form") {
  double omega = 1.0, a0 = 0.3, a1 = 0.7, theta = 0.9;
  Matrix h0 = 0.5 * omega * pauli_z();
  Matrix u = Complex(0, -1) * pauli_x();
  DensityMatrix rho0 = DensityMatrix::pure(initial_qubit(a0, a1, theta));
  CorrectionTerm c = correction_term(u, scattering_boundaries(h0), rho0, 1.0, 1.0, 1.0);
  // closed form is in units (hbar omega)^2
  Matrix expected = omega * omega * not_gate_c_closed_form(a0, a1, theta);
  CHECK(max_abs(c.matrix - expected) < 1e-12);
}

TEST_CASE("correction is traceless and Hermitian for mixed input") {
  std::mt19937_64 rng(43);
  Matrix h0 = random_hermitian(2, rng);
  Matrix u = random_unitary(2, rng);
  DensityMatrix rho0 = DensityMatrix::maximally_mixed(2);
  CorrectionTerm c = correction_term(u, scattering_boundaries(h0), rho0, 0.0, 1.0, 1.0);
  CHECK(std::abs(c.matrix.trace()) < 1e-12 * std::max(1.0, max_abs(c.matrix)));
  CHECK(is_hermitian(c.matrix, 1e-10));
  DensityMatrix rho = approx_state(DensityMatrix::maximally_mixed(2),
                                   c.dimensionless(1.0), 0.05);
  CHECK(std::abs(rho.matrix().trace() - Complex(1, 0)) < 1e-14);
}

TEST_CASE("approx_state limits") {
  std::mt19937_64 rng(44);
  DensityMatrix rho_na(random_density(2, rng));
  Matrix c = not_gate_c_closed_form(0.5, 0.5, 0.0);
  CHECK(max_abs(approx_state(rho_na, c, 0.0).matrix() - rho_na.matrix()) < 1e-15);
  CHECK(max_abs(approx_state(rho_na, Matrix::Zero(2, 2), 0.3).matrix() -
                rho_na.matrix()) < 1e-15);
}

TEST_CASE("approx_state rejects perturbations beyond the PSD floor") {
  Vector psi(2);
  psi << 1, 0;
  DensityMatrix pure = DensityMatrix::pure(psi);
  Matrix c = not_gate_c_closed_form(0.5, 0.5, 0.0);  // pushes an eigenvalue negative
  CHECK_THROWS_AS(approx_state(pure, c, 0.3), PerturbationTooLarge);
}

TEST_CASE("pure-state perturbative fidelity closed forms") {
  Matrix c0 = Matrix::Zero(2, 2);
  Vector psi = initial_qubit(0.5, 0.5, 0.0);
  CHECK(fidelity_pure_perturbative(c0, psi, 0.1) == doctest::Approx(1.0));

  // NOT gate at a0 = a1 = 1/2, omega dx / v0 = 0.1: K = 0.01, F = 0.99.
  double eps = 0.1;
  Matrix u = Complex(0, -1) * pauli_x();
  Vector psi_na = u * psi;
  Matrix c = not_gate_c_closed_form(0.5, 0.5, 0.0);
  CHECK(fidelity_pure_perturbative(c, psi_na, eps) == doctest::Approx(0.99).epsilon(1e-12));

  // eigenstates of H0 are untouched: a0 a1 = 0
  Vector ground = initial_qubit(1.0, 0.0, 0.0);
  Matrix c_ground = not_gate_c_closed_form(1.0, 0.0, 0.0);
  CHECK(fidelity_pure_perturbative(c_ground, u * ground, eps) == doctest::Approx(1.0));
}

TEST_CASE("NOT-gate entropy closed form K(1 - ln K)") {
  double eps = 0.1;
  double k = 4.0 * 0.25 * eps * eps;
  Matrix u = Complex(0, -1) * pauli_x();
  Vector psi_na = u * initial_qubit(0.5, 0.5, 0.0);
  Matrix c = not_gate_c_closed_form(0.5, 0.5, 0.0);
  double s = entropy_perturbative(c, DensityMatrix::pure(psi_na), eps);
  CHECK(s == doctest::Approx(k * (1.0 - std::log(k))).epsilon(1e-10));
}

TEST_CASE("entropy perturbation: full-rank qubit example") {
  // rho_q = diag(1-q, q), perturbation eps^2 * diag(-1, +1); for eps^2 << q
  // the full-rank branch matches exact diagonalization.
  double q = 0.1, eps2 = 1e-4;
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.0 - q;
  rho(1, 1) = q;
  Matrix c = -pauli_z();  // adds +eps^2 to the small population
  double s_pert = entropy_perturbative(c, DensityMatrix(rho), std::sqrt(eps2), 1e-3,
                                       SpectrumBranch::full_rank);
  double pa = 1.0 - q - eps2, pb = q + eps2;
  double s_exact = -(pa * std::log(pa) + pb * std::log(pb));
  CHECK(std::abs(s_pert - s_exact) < 1e-6);
}

TEST_CASE("entropy perturbation: pure-limit qubit example") {
  // q = 0: S ~= eps^2 (1 - 2 ln eps), accurate to ~10% at eps = 1e-2.
  double eps = 1e-2;
  Vector ground(2);
  ground << 1, 0;
  Matrix c = -pauli_z();
  double s_pert = entropy_perturbative(c, DensityMatrix::pure(ground), eps);
  double reference = eps * eps * (1.0 - 2.0 * std::log(eps));
  CHECK(std::abs(s_pert - reference) < 0.1 * reference);

  double p = eps * eps;
  double s_exact = -(1.0 - p) * std::log(1.0 - p) - p * std::log(p);
  CHECK(std::abs(s_pert - s_exact) < 0.05 * s_exact);
}

TEST_CASE("entropy perturbation: ambiguous split raises") {
  double q = 1e-6;
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.0 - q;
  rho(1, 1) = q;
  Matrix c = pauli_z();
  CHECK_THROWS_AS(entropy_perturbative(c, DensityMatrix(rho), 1e-3, 1e-6), AmbiguousRank);
}

TEST_CASE("mixed fidelity: pure reference matches the pure path") {
  Vector psi = initial_qubit(0.4, 0.6, 0.3);
  Matrix u = Complex(0, -1) * pauli_x();
  Vector psi_na = u * psi;
  Matrix c = not_gate_c_closed_form(0.4, 0.6, 0.3);
  double eps = 0.08;
  MixedFidelityResult r =
      fidelity_mixed_perturbative(c, DensityMatrix::pure(psi_na), eps);
  CHECK(r.first_order ==
        doctest::Approx(fidelity_pure_perturbative(c, psi_na, eps)).epsilon(1e-10));
}

TEST_CASE("mixed fidelity: full-rank first order vanishes, fourth order matches Uhlmann") {
  std::mt19937_64 rng(45);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 10; ++trial) {
    int dim = 2 + static_cast<int>(rng() % 3);
    Matrix rho = random_well_separated_density(dim, rng);
    if (rho.size() == 0) continue;
    Matrix c = random_traceless_unit_hermitian(dim, rng);
    double eps = 0.04;

    MixedFidelityResult r = fidelity_mixed_perturbative(c, DensityMatrix(rho), eps);
    CHECK(std::abs(r.first_order - 1.0) < 1e-12);  // Tr C_parallel = Tr C = 0
    REQUIRE(r.fourth_order.has_value());

    Matrix pert = rho + eps * eps * c;
    Eigen::SelfAdjointEigenSolver<Matrix> es(pert);
    if (es.eigenvalues().minCoeff() < 1e-6) continue;
    double f_exact = state_fidelity(rho, pert);  // trace 1 already, c traceless
    CHECK(std::abs(*r.fourth_order - f_exact) < 5.0 * std::pow(eps, 6));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("expansion residual scales as dx^4 for Gaussian packets") {
  std::mt19937_64 rng(46);
  int done = 0;
  for (int trial = 0; trial < 12 && done < 4; ++trial) {
    double dx = 0.08;
    Scenario sc = random_scenario(rng, dx);
    Scenario sc_half = sc;
    sc_half.cfg.packet.dx = dx / 2.0;

    double t = 0.7 * sc.cfg.exit_time();
    double r1 = expansion_residual(sc, t);
    if (r1 < 1e-9) continue;  // nearly commuting draw, ratio would be noise
    double r2 = expansion_residual(sc_half, t);
    double ratio = r2 / r1;
    CHECK(ratio > 1.0 / 24.0);
    CHECK(ratio < 1.0 / 10.0);
    ++done;
  }
  CHECK(done >= 4);
}

TEST_CASE("correction matches finite-difference assembly at interior times") {
  std::mt19937_64 rng(47);
  Scenario sc = random_scenario(rng, 0.05);
  double lambda = std::pow(sc.cfg.packet.dx / (sc.cfg.hbar * sc.cfg.v0), 2);
  double t_f = sc.cfg.exit_time();
  for (double frac : {0.3, 0.5, 0.8, 1.0}) {
    double t = frac * t_f;
    double res = expansion_residual(sc, t);
    // next order is quartic in dx
    CHECK(res < 20.0 * lambda * lambda);
  }
}

TEST_CASE("perturbative fidelity and entropy track the exact pipeline to eps^4") {
  std::mt19937_64 rng(48);
  for (int trial = 0; trial < 3; ++trial) {
    Scenario sc = random_scenario(rng, 0.06);
    double eps = sc.cfg.epsilon();
    REQUIRE(eps <= 0.1);
    double t = sc.cfg.exit_time();

    Matrix u = evolve_pointlike(sc.cfg, sc.cfg.packet.x0, t);
    BoundaryHamiltonians b = boundary_hamiltonians(sc.cfg, t);
    CorrectionTerm cterm = correction_term(u, b, sc.rho0, t, sc.cfg.hbar, sc.cfg.v0);
    Matrix c = cterm.dimensionless(sc.cfg.e0);

    DensityMatrix exact = internal_state_exact(sc.cfg, sc.rho0, t);
    Vector psi_na = u * spectral(sc.rho0).eigenvectors.col(0);

    double f_pert = fidelity_pure_perturbative(c, psi_na, eps);
    double f_exact = state_fidelity(DensityMatrix::pure(psi_na).matrix(), exact.matrix());
    CHECK(std::abs(f_pert - f_exact) < 5.0 * std::pow(eps, 4));

    double s_pert = entropy_perturbative(c, DensityMatrix::pure(psi_na), eps);
    double s_exact = von_neumann_entropy(exact);
    CHECK(std::abs(s_pert - s_exact) < 5.0 * std::pow(eps, 4) * std::abs(std::log(eps)));
  }
}
