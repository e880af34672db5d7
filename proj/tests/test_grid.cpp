#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "flyq/grid.hpp"
#include "test_helpers.hpp"

using namespace flyq;

namespace {

Vector level(int which) {
  Vector v = Vector::Zero(2);
  v(which) = 1.0;
  return v;
}

Vector plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

// Free dispersing Gaussian, closed form: width sigma(t)^2 = sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2),
// evaluated directly as the exact propagated wavefunction.
Vector free_gaussian_exact(const GridState& proto, double x0, double sigma0, double k0,
                           double t) {
  Vector psi(proto.npoints);
  double hbar = proto.hbar, m = proto.mass;
  Complex alpha(1.0, hbar * t / (2.0 * m * sigma0 * sigma0));  // 1 + i t hbar / 2 m s^2
  double xc = x0 + hbar * k0 / m * t;
  for (int i = 0; i < proto.npoints; ++i) {
    double x = proto.x_at(i);
    double u = x - xc;
    Complex phase(0.0, k0 * x - 0.5 * hbar * k0 * k0 / m * t);
    psi(i) = std::exp(-u * u / (4.0 * sigma0 * sigma0 * alpha) + phase) / std::sqrt(alpha);
  }
  double norm = std::sqrt(psi.squaredNorm() * proto.dx);
  return psi / norm;
}

}  // namespace

TEST_CASE("free Gaussian propagation matches the closed form") {
  double sigma = 0.4, k0 = 30.0, mass = 30.0;
  GridState st = make_gaussian_grid_state(-20.0, 40.0 / 2048, 2048, -8.0, sigma, k0,
                                          level(0), mass);
  // trivial potential far away so the solver has a support window
  PotentialProfile pot = gaussian_profile(0.5, 15.0, 0.0, pauli_x());

  double t_target = 6.0;
  double dt = suggest_dt(st, k0);
  int steps = static_cast<int>(std::ceil(t_target / dt));
  dt = t_target / steps;

  GridState out = propagate_full(st, Matrix::Zero(2, 2), pot, dt, steps);
  Vector exact = free_gaussian_exact(st, -8.0, sigma, k0, t_target);

  Complex overlap = 0.0;
  for (int i = 0; i < st.npoints; ++i) overlap += std::conj(exact(i)) * out.spinor(i, 0) * st.dx;
  CHECK(std::abs(overlap) > 1.0 - 1e-6);
  // spreading stays modest over this flight
  double sigma_t = sigma * std::sqrt(1.0 + std::pow(t_target / (2.0 * mass * sigma * sigma), 2));
  CHECK(sigma_t / sigma < 2.0);
}

TEST_CASE("spatial and internal dynamics factorize for uniform H0") {
  double omega = 2.0;
  GridState st = make_gaussian_grid_state(-16.0, 32.0 / 1024, 1024, -6.0, 0.5, 40.0,
                                          plus_state(), 40.0);
  PotentialProfile pot = gaussian_profile(0.4, 12.0, 0.0, pauli_x());
  Matrix h0 = 0.5 * omega * pauli_z();

  double t = 2.5;
  double dt = suggest_dt(st, 40.0);
  int steps = static_cast<int>(std::ceil(t / dt));
  dt = t / steps;
  GridState out = propagate_full(st, h0, pot, dt, steps);

  DensityMatrix rho = reduce_internal(out);
  Matrix u = matrix_exponential(h0, Complex(0.0, -t));
  Matrix expected = u * DensityMatrix::pure(plus_state()).matrix() * u.adjoint();
  CHECK(max_abs(rho.matrix() - expected) < 1e-8);
}

TEST_CASE("norm is conserved to 1e-12 per step") {
  GridState st = make_gaussian_grid_state(-12.0, 24.0 / 1024, 1024, -5.0, 0.4, 50.0,
                                          plus_state(), 50.0);
  PotentialProfile pot = gaussian_profile(1.0, 0.0, 1.2, pauli_x());
  GridSolver solver(st, 0.5 * 2.0 * pauli_z(), pot, suggest_dt(st, 50.0));
  double n0 = st.norm();
  for (int chunk = 0; chunk < 10; ++chunk) {
    solver.step(st, 20);
    CHECK(std::abs(st.norm() - n0) < 1e-12 * 20 * (chunk + 1) + 1e-13);
  }
}

TEST_CASE("energy is conserved over a full crossing") {
  double k0 = 60.0, mass = 60.0;
  GridState st = make_gaussian_grid_state(-14.0, 28.0 / 4096, 4096, -6.0, 0.35, k0,
                                          plus_state(), mass);
  PotentialProfile pot = gaussian_profile(1.0, 0.0, 1.0, pauli_x());
  Matrix h0 = 0.5 * 2.0 * pauli_z();
  GridSolver solver(st, h0, pot, suggest_dt(st, k0));

  double e0 = solver.energy(st);
  int total = static_cast<int>(std::round(10.0 / solver.dt()));
  solver.step(st, total);
  double e1 = solver.energy(st);
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 1e-6);
}

TEST_CASE("reduce_internal of product and entangled states") {
  GridState st = make_gaussian_grid_state(-10.0, 20.0 / 512, 512, -4.0, 0.3, 20.0,
                                          level(0), 20.0);
  DensityMatrix rho = reduce_internal(st);
  CHECK(max_abs(rho.matrix() - DensityMatrix::pure(level(0)).matrix()) < 1e-12);

  // two spatially orthogonal branches carrying |0> and |1>
  GridState two = st;
  GridState right = make_gaussian_grid_state(-10.0, 20.0 / 512, 512, 4.0, 0.3, 20.0,
                                             level(1), 20.0);
  two.spinor = (st.spinor + right.spinor) / std::sqrt(2.0);
  DensityMatrix mixed = reduce_internal(two);
  CHECK(max_abs(mixed.matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-6);
}

TEST_CASE("edge contamination raises GridTooSmall") {
  GridState st = make_gaussian_grid_state(-8.0, 16.0 / 512, 512, -3.0, 0.3, 40.0,
                                          level(0), 40.0);
  PotentialProfile pot = gaussian_profile(0.4, 0.0, 0.5, pauli_x());
  GridSolver solver(st, Matrix::Zero(2, 2), pot, suggest_dt(st, 40.0));
  // long enough for the packet to run off the right edge
  int steps = static_cast<int>(std::round(12.0 / solver.dt()));
  CHECK_THROWS_AS(solver.step(st, steps), GridTooSmall);
}

TEST_CASE("under-resolved potential raises GridTooSmall") {
  GridState st = make_gaussian_grid_state(-8.0, 16.0 / 256, 256, -3.0, 0.3, 40.0,
                                          level(0), 40.0);
  PotentialProfile narrow = gaussian_profile(0.05, 0.0, 0.5, pauli_x());
  CHECK_THROWS_AS(GridSolver(st, Matrix::Zero(2, 2), narrow, 1e-3), GridTooSmall);
}

TEST_CASE("snapshot round trip") {
  GridState st = make_gaussian_grid_state(-10.0, 20.0 / 512, 512, -4.0, 0.3, 25.0,
                                          plus_state(), 25.0);
  st.time = 1.25;
  std::string path = "snapshot_test.fqgs";
  dump_snapshot(st, path);
  GridState back = load_snapshot(path);
  std::remove(path.c_str());

  CHECK(back.npoints == st.npoints);
  CHECK(back.nlevels == st.nlevels);
  CHECK(back.dx == doctest::Approx(st.dx).epsilon(1e-15));
  CHECK(back.time == doctest::Approx(1.25).epsilon(1e-15));
  // float32 payload
  CHECK(max_abs(back.spinor - st.spinor) < 1e-6);
}
