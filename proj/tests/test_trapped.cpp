#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flyq/trapped.hpp"
#include "test_helpers.hpp"

using namespace flyq;

namespace {

// Smooth sigma_x pi-pulse over [0, tau]: Gaussian envelope, area pi over the
// real line, width tau/4 so the derivative scales stay at the hbar/tau^2,
// hbar/tau^3 estimate level.
struct PiPulse {
  double tau = 1.0;
  double sigma = 0.25;

  explicit PiPulse(double tau_) : tau(tau_), sigma(tau_ / 4.0) {}

  double omega(double t) const {
    double u = (t - 0.5 * tau) / sigma;
    return M_PI / (std::sqrt(2.0 * M_PI) * sigma) * std::exp(-0.5 * u * u);
  }
  double omega_dot(double t) const {
    double u = (t - 0.5 * tau) / sigma;
    return -u / sigma * omega(t);
  }
  Matrix v(double t) const { return 0.5 * omega(t) * pauli_x(); }
  Matrix vdot(double t) const { return 0.5 * omega_dot(t) * pauli_x(); }
};

DysonTerms pulse_terms(const PiPulse& pulse, const Matrix& h0, double e_eg, double t,
                       int samples = 20) {
  return dyson_terms(
      h0, [&pulse](double s) { return pulse.v(s); },
      [&pulse](double s) { return pulse.vdot(s); }, e_eg, t, 1.0, samples);
}

double deviation_sup(const TrapConfig& trap, const PiPulse& pulse, const Matrix& h0,
                     const DensityMatrix& rho0, int samples_per_period = 40) {
  double dev = 0.0;
  for (int i = 1; i <= 24; ++i) {
    double t = pulse.tau * i / 24.0;
    DysonTerms terms = pulse_terms(pulse, h0, trap.e_eg, t, samples_per_period);
    DensityMatrix rho = trapped_state(rho0, terms, trap.r_eg, trap.v0, trap.hbar);
    dev = std::max(dev, spectral_norm(rho.matrix() - rho0.matrix()));
  }
  return dev;
}

}  // namespace

TEST_CASE("constant drive produces no Dyson correction") {
  Matrix h0 = 0.4 * pauli_z();
  Matrix v_const = 0.3 * pauli_x();
  DysonTerms terms = dyson_terms(
      h0, [&](double) { return v_const; },
      [&](double) { return Matrix::Zero(2, 2).eval(); }, 200.0, 1.0);
  CHECK(max_abs(terms.x1) < 1e-12);
  CHECK(max_abs(terms.x2) < 1e-12);
}

TEST_CASE("X1 decays as 1/E_eg for smooth drives") {
  PiPulse pulse(1.0);
  Matrix h0 = Matrix::Zero(2, 2);
  double base = 150.0;
  double n1 = 0.0, n2 = 0.0, n4 = 0.0;
  // supremum over the pulse rather than the endpoint
  for (int i = 1; i <= 16; ++i) {
    double t = i / 16.0;
    n1 = std::max(n1, spectral_norm(pulse_terms(pulse, h0, base, t, 40).x1));
    n2 = std::max(n2, spectral_norm(pulse_terms(pulse, h0, 2.0 * base, t, 40).x1));
    n4 = std::max(n4, spectral_norm(pulse_terms(pulse, h0, 4.0 * base, t, 40).x1));
  }
  CHECK(n2 / n1 == doctest::Approx(0.5).epsilon(0.25));
  CHECK(n4 / n2 == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("X1 magnitude sits at the 3 hbar^2/(tau^2 E) estimate") {
  PiPulse pulse(1.0);
  Matrix h0 = Matrix::Zero(2, 2);
  double e_eg = 300.0;
  double sup = 0.0;
  for (int i = 1; i <= 24; ++i) {
    sup = std::max(sup, spectral_norm(pulse_terms(pulse, h0, e_eg, i / 24.0, 40).x1));
  }
  double estimate = 3.0 / (e_eg);  // hbar = tau = 1
  CHECK(sup < 3.0 * estimate);
  CHECK(sup > estimate / 3.0);
}

TEST_CASE("X2 anti-Hermitian structure is consistent with trace preservation") {
  PiPulse pulse(1.0);
  Matrix h0 = 0.3 * pauli_z();
  DysonTerms terms = pulse_terms(pulse, h0, 250.0, 1.0, 60);
  Matrix residual = terms.x2 + terms.x2.adjoint() - 2.0 * terms.x1.adjoint() * terms.x1;
  double scale = std::max(max_abs(terms.x2), 1e-300);
  CHECK(max_abs(residual) < 1e-4 * scale);
}

TEST_CASE("trapped_state limits") {
  DysonTerms zero;
  zero.x1 = Matrix::Zero(2, 2);
  zero.x2 = Matrix::Zero(2, 2);
  std::mt19937_64 rng(61);
  DensityMatrix rho0(random_density(2, rng));
  CHECK(max_abs(trapped_state(rho0, zero, 0.1, 1.0).matrix() - rho0.matrix()) < 1e-14);

  PiPulse pulse(1.0);
  DysonTerms terms = pulse_terms(pulse, Matrix::Zero(2, 2), 200.0, 1.0, 40);
  DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  DensityMatrix out = trapped_state(mixed, terms, 0.05, 1.0);
  CHECK(max_abs(out.matrix() - mixed.matrix()) < 1e-8);
}

TEST_CASE("deviation stays within 10x of the worst-case bound") {
  PiPulse pulse(1.0);
  TrapConfig trap = TrapConfig::harmonic(1.0 / std::sqrt(600.0), 1.0, 1.0, 1.0);
  Vector zero_state(2);
  zero_state << 1, 0;
  DensityMatrix rho0 = DensityMatrix::pure(zero_state);

  double dev = deviation_sup(trap, pulse, Matrix::Zero(2, 2), rho0);
  double bound = worst_case_bound(trap);
  CHECK(dev <= 10.0 * bound);
  CHECK(dev > 1e-3 * bound);  // the bound is an estimate, not wildly loose
}

TEST_CASE("harmonic deviation scales as dx^6") {
  PiPulse pulse(1.0);
  Vector zero_state(2);
  zero_state << 1, 0;
  DensityMatrix rho0 = DensityMatrix::pure(zero_state);
  Matrix h0 = Matrix::Zero(2, 2);

  double e1 = 300.0;
  TrapConfig t1 = TrapConfig::harmonic(1.0 / std::sqrt(2.0 * e1), 1.0, 1.0, 1.0);
  TrapConfig t2 = TrapConfig::harmonic(0.5 / std::sqrt(2.0 * e1), 1.0, 1.0, 1.0);
  double d1 = deviation_sup(t1, pulse, h0, rho0);
  double d2 = deviation_sup(t2, pulse, h0, rho0, 40);
  double ratio = d1 / d2;
  CHECK(ratio > 40.0);
  CHECK(ratio < 90.0);
}

TEST_CASE("worst-case bound closed forms") {
  TrapConfig h = TrapConfig::harmonic(2e-3, 5.0, 3.0, 0.7);
  double direct = 36.0 * h.mass * h.mass * std::pow(h.dx, 6) /
                  (h.hbar * h.hbar * h.v0 * h.v0 * std::pow(h.tau, 4));
  CHECK(worst_case_bound(h) == doctest::Approx(direct).epsilon(1e-12));

  // halving dx cuts the harmonic bound by exactly 64
  TrapConfig h2 = TrapConfig::harmonic(1e-3, 5.0, 3.0, 0.7);
  CHECK(worst_case_bound(h) / worst_case_bound(h2) == doctest::Approx(64.0).epsilon(1e-12));

  // box trap at equal dx sits about three orders of magnitude higher
  TrapConfig b = TrapConfig::box(2e-3 / std::sqrt((M_PI * M_PI - 6.0) / (12.0 * M_PI * M_PI)),
                                 5.0, 3.0, 0.7);
  CHECK(b.dx == doctest::Approx(h.dx).epsilon(1e-12));
  double gap = worst_case_bound(b) / worst_case_bound(h);
  CHECK(std::round(std::log10(gap)) == 3);
  // the box prefactor in dx is about 6e4
  double box_prefactor = worst_case_bound(b) * b.hbar * b.hbar * b.v0 * b.v0 *
                         std::pow(b.tau, 4) / (b.mass * b.mass * std::pow(b.dx, 6));
  CHECK(box_prefactor == doctest::Approx(6e4).epsilon(0.01));
}

TEST_CASE("magnitude table reproduces the experimental orders") {
  std::vector<MagnitudeRow> rows = magnitude_table();
  REQUIRE(rows.size() == 3);
  double stated[3] = {1e-9, 1e-15, 1e-7};
  for (int i = 0; i < 3; ++i) {
    double ratio = rows[i].reported / stated[i];
    CHECK(ratio >= 1.0 / 3.0);
    CHECK(ratio <= 3.0);
    // full-precision value lands on the same order of magnitude
    double exponent = std::floor(std::log10(rows[i].bound));
    CHECK(exponent == std::floor(std::log10(stated[i])));
  }
}

TEST_CASE("bound is invariant under a change of unit system") {
  // SI values for the surfing case
  double hbar_si = 1.054571817e-34;
  TrapConfig si = TrapConfig::harmonic(10e-9, 1e-31, 1e4, 1e-10, hbar_si);

  // natural units: lengths in nm, times in ps, hbar = 1
  double l0 = 1e-9, t0 = 1e-12;
  double e_unit = hbar_si / t0;
  double m_unit = hbar_si * t0 / (l0 * l0);
  TrapConfig nat = TrapConfig::harmonic(10e-9 / l0, 1e-31 / m_unit, 1e4 * t0 / l0,
                                        1e-10 / t0, 1.0);
  CHECK(nat.e_eg == doctest::Approx(si.e_eg / e_unit).epsilon(1e-12));
  CHECK(worst_case_bound(nat) ==
        doctest::Approx(worst_case_bound(si)).epsilon(1e-10));
}
