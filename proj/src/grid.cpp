#include "flyq/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace flyq {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

double GridState::norm() const {
  return spinor.squaredNorm() * dx;
}

double GridState::edge_probability(double margin) const {
  double p = 0.0;
  for (int i = 0; i < npoints; ++i) {
    double x = x_at(i);
    if (x < xmin + margin || x > xmin + dx * (npoints - 1) - margin) {
      p += spinor.row(i).squaredNorm() * dx;
    }
  }
  return p;
}

GridState make_gaussian_grid_state(double xmin, double dx_grid, int npoints, double x0,
                                   double packet_dx, double k0, const Vector& internal,
                                   double mass, double hbar) {
  if (!is_power_of_two(npoints)) throw GridTooSmall("grid size must be a power of two");
  if (packet_dx <= 0.0 || dx_grid <= 0.0 || mass <= 0.0) {
    throw InvalidOperator("make_gaussian_grid_state: invalid geometry");
  }
  GridState st;
  st.xmin = xmin;
  st.dx = dx_grid;
  st.npoints = npoints;
  st.nlevels = static_cast<int>(internal.size());
  st.mass = mass;
  st.hbar = hbar;
  st.packet_dx = packet_dx;
  st.spinor.resize(npoints, st.nlevels);

  Vector chi = internal.normalized();
  for (int i = 0; i < npoints; ++i) {
    double x = st.x_at(i);
    double u = (x - x0) / (2.0 * packet_dx);
    Complex amp = std::exp(Complex(-u * u, k0 * x));
    for (int l = 0; l < st.nlevels; ++l) st.spinor(i, l) = amp * chi(l);
  }
  st.spinor /= std::sqrt(st.norm());

  if (st.edge_probability(8.0 * packet_dx) > 1e-8) {
    throw GridTooSmall("initial packet too close to the grid edges");
  }
  return st;
}

double suggest_dt(const GridState& state, double k0) {
  double k_occ = std::abs(k0) + 4.0 / state.packet_dx;
  return 0.5 * (M_PI / 4.0) * 2.0 * state.mass / (state.hbar * k_occ * k_occ);
}

struct GridSolver::Impl {
  int n = 0, nlev = 0;
  double dx = 0.0, hbar = 1.0, mass = 0.0;
  Matrix h0;
  PotentialProfile pot;
  std::vector<Complex> kinetic_half;        // exp(-i hbar k^2 dt / 4m) per mode
  std::vector<Matrix> internal_step;        // per grid point
  std::vector<double> kin_energy;           // hbar^2 k^2 / 2m per mode
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<Complex> work;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

GridSolver::GridSolver(const GridState& prototype, const Matrix& h0,
                       const PotentialProfile& pot, double dt)
    : impl_(std::make_unique<Impl>()), dt_(dt) {
  require_hermitian(h0, "GridSolver.h0");
  if (h0.rows() != prototype.nlevels || pot.dim() != prototype.nlevels) {
    throw ShapeError("GridSolver: internal dimensions disagree");
  }
  if (!is_power_of_two(prototype.npoints)) {
    throw GridTooSmall("GridSolver: grid size must be a power of two");
  }
  double support_points = (pot.support_max() - pot.support_min()) / prototype.dx;
  if (support_points < 16.0) {
    throw GridTooSmall("GridSolver: potential support resolved by < 16 grid points");
  }
  if (dt <= 0.0) throw UnstableStep("GridSolver: dt must be > 0");

  auto& im = *impl_;
  im.n = prototype.npoints;
  im.nlev = prototype.nlevels;
  im.dx = prototype.dx;
  im.hbar = prototype.hbar;
  im.mass = prototype.mass;
  im.h0 = h0;
  im.pot = pot;

  im.kinetic_half.resize(im.n);
  im.kin_energy.resize(im.n);
  double dk = 2.0 * M_PI / (im.n * im.dx);
  for (int j = 0; j < im.n; ++j) {
    int jj = j < im.n / 2 ? j : j - im.n;
    double k = dk * jj;
    double ek = im.hbar * im.hbar * k * k / (2.0 * im.mass);
    im.kin_energy[j] = ek;
    im.kinetic_half[j] = std::exp(Complex(0.0, -0.5 * ek * dt / im.hbar));
  }

  // Nyquist stability guard on the *occupied* spectrum is the caller's job
  // (suggest_dt); here we only refuse steps that wrap the kinetic phase at
  // the band edge beyond one period, which would alias badly.
  im.internal_step.resize(im.n);
  Matrix free_step = matrix_exponential(h0, Complex(0.0, -dt / im.hbar));
  for (int i = 0; i < im.n; ++i) {
    double x = prototype.x_at(i);
    if (x < pot.support_min() || x > pot.support_max()) {
      im.internal_step[i] = free_step;
    } else {
      im.internal_step[i] = matrix_exponential(h0 + pot.value(x), Complex(0.0, -dt / im.hbar));
    }
  }

  im.work.resize(im.n);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto* buf = reinterpret_cast<fftw_complex*>(im.work.data());
    im.fwd = fftw_plan_dft_1d(im.n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    im.bwd = fftw_plan_dft_1d(im.n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!im.fwd || !im.bwd) throw GridTooSmall("GridSolver: FFT plan creation failed");
}

GridSolver::~GridSolver() = default;

void GridSolver::step(GridState& state, int nsteps) const {
  auto& im = *impl_;
  if (state.npoints != im.n || state.nlevels != im.nlev) {
    throw ShapeError("GridSolver::step: state does not match the solver layout");
  }
  if (nsteps <= 0) return;

  auto kinetic_half_step = [&im, &state]() {
    auto* buf = reinterpret_cast<fftw_complex*>(im.work.data());
    for (int l = 0; l < im.nlev; ++l) {
      std::memcpy(im.work.data(), state.spinor.col(l).data(), sizeof(Complex) * im.n);
      fftw_execute_dft(im.fwd, buf, buf);
      for (int j = 0; j < im.n; ++j) im.work[j] *= im.kinetic_half[j];
      fftw_execute_dft(im.bwd, buf, buf);
      double inv_n = 1.0 / im.n;
      for (int j = 0; j < im.n; ++j) state.spinor(j, l) = im.work[j] * inv_n;
    }
  };

  auto internal_full_step = [&im, &state]() {
    for (int i = 0; i < im.n; ++i) {
      state.spinor.row(i) = (im.internal_step[i] * state.spinor.row(i).transpose())
                                .transpose();
    }
  };

  kinetic_half_step();
  for (int s = 0; s < nsteps; ++s) {
    internal_full_step();
    if (s + 1 < nsteps) {
      // merge consecutive kinetic half-steps
      auto* buf = reinterpret_cast<fftw_complex*>(im.work.data());
      for (int l = 0; l < im.nlev; ++l) {
        std::memcpy(im.work.data(), state.spinor.col(l).data(), sizeof(Complex) * im.n);
        fftw_execute_dft(im.fwd, buf, buf);
        for (int j = 0; j < im.n; ++j) {
          im.work[j] *= im.kinetic_half[j] * im.kinetic_half[j];
        }
        fftw_execute_dft(im.bwd, buf, buf);
        double inv_n = 1.0 / im.n;
        for (int j = 0; j < im.n; ++j) state.spinor(j, l) = im.work[j] * inv_n;
      }
    }
  }
  kinetic_half_step();
  state.time += nsteps * dt_;

  if (state.edge_probability(8.0 * state.packet_dx) > 1e-8) {
    throw GridTooSmall("GridSolver::step: packet reached the grid edges");
  }
}

double GridSolver::energy(const GridState& state) const {
  auto& im = *impl_;
  double e_kin = 0.0;
  auto* buf = reinterpret_cast<fftw_complex*>(im.work.data());
  for (int l = 0; l < im.nlev; ++l) {
    std::memcpy(im.work.data(), state.spinor.col(l).data(), sizeof(Complex) * im.n);
    fftw_execute_dft(im.fwd, buf, buf);
    for (int j = 0; j < im.n; ++j) {
      e_kin += im.kin_energy[j] * std::norm(im.work[j]);
    }
  }
  // Parseval: |psi_hat|^2 summed over modes = N * |psi|^2 summed over grid
  e_kin *= state.dx / im.n;

  double e_int = 0.0;
  for (int i = 0; i < im.n; ++i) {
    double x = state.x_at(i);
    Matrix h = im.h0;
    if (x >= im.pot.support_min() && x <= im.pot.support_max()) h += im.pot.value(x);
    Vector row = state.spinor.row(i).transpose();
    e_int += std::real((row.adjoint() * h * row)(0, 0)) * state.dx;
  }
  return e_kin + e_int;
}

GridState propagate_full(const GridState& state, const Matrix& h0,
                         const PotentialProfile& pot, double dt, int steps) {
  GridSolver solver(state, h0, pot, dt);
  GridState out = state;
  solver.step(out, steps);
  return out;
}

DensityMatrix reduce_internal(const GridState& state) {
  Matrix rho = state.spinor.transpose() * state.spinor.conjugate() * state.dx;
  rho /= rho.trace();
  return DensityMatrix(0.5 * (rho + rho.adjoint().eval()));
}

void dump_snapshot(const GridState& state, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw Error("dump_snapshot: cannot open " + path);
  const char magic[4] = {'F', 'Q', 'G', 'S'};
  std::uint32_t version = 1;
  std::uint64_t n = state.npoints, nl = state.nlevels;
  std::fwrite(magic, 1, 4, f);
  std::fwrite(&version, sizeof(version), 1, f);
  std::fwrite(&n, sizeof(n), 1, f);
  std::fwrite(&nl, sizeof(nl), 1, f);
  double header[6] = {state.xmin, state.dx, state.mass, state.hbar, state.time,
                      state.packet_dx};
  std::fwrite(header, sizeof(double), 6, f);
  for (int i = 0; i < state.npoints; ++i) {
    for (int l = 0; l < state.nlevels; ++l) {
      float re = static_cast<float>(state.spinor(i, l).real());
      float im = static_cast<float>(state.spinor(i, l).imag());
      std::fwrite(&re, sizeof(float), 1, f);
      std::fwrite(&im, sizeof(float), 1, f);
    }
  }
  std::fclose(f);
}

GridState load_snapshot(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw Error("load_snapshot: cannot open " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t n = 0, nl = 0;
  double header[6];
  bool ok = std::fread(magic, 1, 4, f) == 4 && std::memcmp(magic, "FQGS", 4) == 0 &&
            std::fread(&version, sizeof(version), 1, f) == 1 && version == 1 &&
            std::fread(&n, sizeof(n), 1, f) == 1 &&
            std::fread(&nl, sizeof(nl), 1, f) == 1 &&
            std::fread(header, sizeof(double), 6, f) == 6;
  if (!ok) {
    std::fclose(f);
    throw Error("load_snapshot: bad header in " + path);
  }
  GridState st;
  st.npoints = static_cast<int>(n);
  st.nlevels = static_cast<int>(nl);
  st.xmin = header[0];
  st.dx = header[1];
  st.mass = header[2];
  st.hbar = header[3];
  st.time = header[4];
  st.packet_dx = header[5];
  st.spinor.resize(st.npoints, st.nlevels);
  for (int i = 0; i < st.npoints; ++i) {
    for (int l = 0; l < st.nlevels; ++l) {
      float re = 0.0f, im = 0.0f;
      if (std::fread(&re, sizeof(float), 1, f) != 1 ||
          std::fread(&im, sizeof(float), 1, f) != 1) {
        std::fclose(f);
        throw Error("load_snapshot: truncated payload in " + path);
      }
      st.spinor(i, l) = Complex(re, im);
    }
  }
  std::fclose(f);
  return st;
}

}  // namespace flyq
