#include "blochwave/nls.hpp"

#include <cmath>
#include <cstring>

#include "blochwave/kernels.hpp"
#include "blochwave/parallel.hpp"
#include "blochwave/reduce.hpp"

namespace blochwave {

FineGrid FineGrid::make(const Lattice& lattice, std::vector<int> box, int q,
                        int p_cell) {
  const int d = lattice.dim();
  if (static_cast<int>(box.size()) != d) {
    throw Error("FineGrid: box dimension mismatch");
  }
  if (q < 1 || p_cell < 2) throw Error("FineGrid: need q >= 1, p_cell >= 2");
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j && std::abs(lattice.basis()(i, j)) > 1e-14) {
        throw GridIncommensurate(
            "fine grids require an axis-aligned lattice basis");
      }
    }
  }
  FineGrid g;
  g.lattice = lattice;
  g.box = std::move(box);
  g.q = q;
  g.p_cell = p_cell;
  for (int j = 0; j < d; ++j) {
    const double zeta = lattice.basis()(j, j);
    const double cells = g.box[j] * q / zeta;
    if (std::abs(cells - std::round(cells)) > 1e-9 || cells < 1.0) {
      throw GridIncommensurate(
          "box is not an integer number of microscopic cells on axis " +
          std::to_string(j));
    }
    const long n = std::lround(cells) * static_cast<long>(p_cell);
    g.npts.push_back(static_cast<int>(n));
    g.xi.push_back(fft_wavenumbers(static_cast<int>(n),
                                   static_cast<double>(g.box[j])));
  }
  return g;
}

long FineGrid::total() const {
  long t = 1;
  for (int n : npts) t *= n;
  return t;
}

double FineGrid::point_weight() const {
  double w = 1.0;
  for (std::size_t j = 0; j < npts.size(); ++j) {
    w *= static_cast<double>(box[j]) / npts[j];
  }
  return w;
}

std::vector<double> FineGrid::axis(int j) const {
  std::vector<double> x(npts[j]);
  const double B = static_cast<double>(box[j]);
  for (int i = 0; i < npts[j]; ++i) x[i] = -0.5 * B + B * i / npts[j];
  return x;
}

std::vector<int> FineGrid::unflatten(long idx) const {
  std::vector<int> mi(dim());
  for (int j = dim() - 1; j >= 0; --j) {
    mi[j] = static_cast<int>(idx % npts[j]);
    idx /= npts[j];
  }
  return mi;
}

bool FineGrid::mode_commensurate(const Eigen::VectorXd& k_cart,
                                 double tol) const {
  for (int j = 0; j < dim(); ++j) {
    // k_j / eps = 2 pi m / B_j for integer m
    const double m = k_cart[j] * q * box[j] / (2.0 * M_PI);
    if (std::abs(m - std::round(m)) > tol) return false;
  }
  return true;
}

double hs_eps_norm(const std::vector<cdouble>& u, const FineGrid& grid,
                   double s) {
  if (s < 0.0) throw Error("hs_eps_norm: s must be >= 0");
  Fft fft(grid.npts);
  std::vector<cdouble> hat = u;
  fft.forward(hat.data());
  const long n = grid.total();
  const double eps2 = grid.eps() * grid.eps();
  std::vector<double> w(n);
  for (long idx = 0; idx < n; ++idx) {
    const auto mi = grid.unflatten(idx);
    double p2 = 0.0;
    for (int j = 0; j < grid.dim(); ++j) {
      p2 += grid.xi[j][mi[j]] * grid.xi[j][mi[j]];
    }
    w[idx] = std::pow(1.0 + eps2 * p2, s);
  }
  const double parseval = grid.point_weight() / static_cast<double>(n);
  return std::sqrt(parseval * reduce::weighted_sum_abs2(hat.data(), w.data(), n));
}

NlsSolver::NlsSolver(FineGrid grid, PotentialSpec pot, double kappa)
    : grid_(std::move(grid)), pot_(std::move(pot)), kappa_(kappa),
      fft_(grid_.npts) {
  const long n = grid_.total();
  vsamples_.resize(n);
  std::vector<std::vector<double>> axes;
  for (int j = 0; j < grid_.dim(); ++j) axes.push_back(grid_.axis(j));
  const double inv_eps = static_cast<double>(grid_.q);
  Eigen::VectorXd y(grid_.dim());
  for (long idx = 0; idx < n; ++idx) {
    const auto mi = grid_.unflatten(idx);
    for (int j = 0; j < grid_.dim(); ++j) y[j] = axes[j][mi[j]] * inv_eps;
    vsamples_[idx] = pot_.sample(y);
  }
  p2_.resize(n);
  for (long idx = 0; idx < n; ++idx) {
    const auto mi = grid_.unflatten(idx);
    double p2 = 0.0;
    for (int j = 0; j < grid_.dim(); ++j) {
      p2 += grid_.xi[j][mi[j]] * grid_.xi[j][mi[j]];
    }
    p2_[idx] = p2;
  }
}

WaveField NlsSolver::make_field(std::vector<cdouble> samples, double t) const {
  if (static_cast<long>(samples.size()) != grid_.total()) {
    throw Error("make_field: sample count does not match the grid");
  }
  WaveField f;
  f.t = t;
  f.u = std::move(samples);
  f.eps = grid_.eps();
  f.mass0 = grid_.point_weight() * reduce::sum_abs2(f.u.data(), f.u.size());
  return f;
}

const std::vector<cdouble>& NlsSolver::kinetic_table(double tau) const {
  std::uint64_t bits;
  std::memcpy(&bits, &tau, 8);
  auto it = kinetic_cache_.find(bits);
  if (it != kinetic_cache_.end()) return it->second;
  const long n = grid_.total();
  std::vector<cdouble> table(n);
  const double eps = grid_.eps();
  for (long idx = 0; idx < n; ++idx) {
    const double phase = -0.5 * eps * p2_[idx] * tau;
    table[idx] = cdouble(std::cos(phase), std::sin(phase));
  }
  return kinetic_cache_.emplace(bits, std::move(table)).first->second;
}

void NlsSolver::split_step(WaveField& field, double dt) const {
  if (!(dt > 0.0)) throw Error("split_step requires dt > 0");
  const long n = grid_.total();
  auto* u = field.u.data();
  const auto& kin = kinetic_table(0.5 * dt);

  auto kinetic_half = [&] {
    fft_.forward(u);
    parallel::for_blocks(n, [&](std::size_t, std::size_t lo, std::size_t hi) {
      kernels::cmul(u + lo, kin.data() + lo, hi - lo);
    });
    fft_.inverse(u);
  };

  kinetic_half();

  // Exact phase flow of the potential + nonlinear part: |u| is invariant
  // under pure phase multiplication, so e^{-i dt (V/eps + kappa |u|^2)}
  // solves that sub-flow exactly.
  const double inv_eps = static_cast<double>(grid_.q);
  parallel::for_blocks(n, [&](std::size_t, std::size_t lo, std::size_t hi) {
    std::vector<double> n2(hi - lo);
    kernels::abs2(n2.data(), u + lo, hi - lo);
    std::vector<cdouble> phase(hi - lo);
    for (std::size_t i = 0; i < hi - lo; ++i) {
      const double theta =
          -dt * (vsamples_[lo + i] * inv_eps + kappa_ * n2[i]);
      phase[i] = cdouble(std::cos(theta), std::sin(theta));
    }
    kernels::cmul(u + lo, phase.data(), hi - lo);
  });

  kinetic_half();
  field.t += dt;
}

std::vector<WaveField> NlsSolver::evolve(const WaveField& initial, double T,
                                         double dt,
                                         int checkpoint_stride) const {
  const double steps_real = T / dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - steps) > 1e-9 || steps < 1) {
    throw Error("evolve: T must be an integer multiple of dt");
  }
  std::vector<WaveField> traj;
  traj.push_back(initial);
  WaveField cur = initial;
  for (long s = 0; s < steps; ++s) {
    split_step(cur, dt);
    const double m = grid_.point_weight() * reduce::sum_abs2(cur.u.data(),
                                                             cur.u.size());
    if (!std::isfinite(m)) {
      throw NonFiniteField("wave field diverged at step " +
                           std::to_string(s + 1));
    }
    if (checkpoint_stride > 0 &&
        ((s + 1) % checkpoint_stride == 0 || s + 1 == steps)) {
      traj.push_back(cur);
    }
  }
  if (checkpoint_stride <= 0) traj.push_back(cur);
  return traj;
}

double NlsSolver::mass(const WaveField& field) const {
  return grid_.point_weight() * reduce::sum_abs2(field.u.data(),
                                                 field.u.size());
}

double NlsSolver::energy(const WaveField& field) const {
  const long n = grid_.total();
  const double eps = grid_.eps();

  std::vector<cdouble> hat = field.u;
  fft_.forward(hat.data());
  const double parseval = grid_.point_weight() / static_cast<double>(n);
  const double kinetic =
      0.5 * eps * eps * parseval *
      reduce::weighted_sum_abs2(hat.data(), p2_.data(), n);

  const double pot = grid_.point_weight() *
                     reduce::weighted_sum_abs2(field.u.data(),
                                               vsamples_.data(), n);

  std::vector<double> n2(n);
  kernels::abs2(n2.data(), field.u.data(), n);
  const double quart = grid_.point_weight() * 0.5 * eps * kappa_ *
                       reduce::weighted_sum_abs2(field.u.data(), n2.data(), n);
  return kinetic + pot + quart;
}

double NlsSolver::suggest_dt(double c_t) const {
  const double vsup = pot_.sup_bound();
  return c_t * grid_.eps() * std::min(1.0, vsup > 0.0 ? 1.0 / vsup : 1.0);
}

std::vector<cdouble> NlsSolver::residual(const std::vector<cdouble>& u_minus,
                                         const std::vector<cdouble>& u0,
                                         const std::vector<cdouble>& u_plus,
                                         double dt) const {
  const long n = grid_.total();
  const double eps = grid_.eps();

  // -(eps^2/2) Lap u0 via the spectral multiplier.
  std::vector<cdouble> lap = u0;
  fft_.forward(lap.data());
  for (long idx = 0; idx < n; ++idx) {
    lap[idx] *= 0.5 * eps * eps * p2_[idx];
  }
  fft_.inverse(lap.data());

  std::vector<cdouble> res(n);
  const cdouble ieps(0.0, eps);
  for (long idx = 0; idx < n; ++idx) {
    const cdouble dtu = (u_plus[idx] - u_minus[idx]) / (2.0 * dt);
    res[idx] = ieps * dtu - lap[idx] - vsamples_[idx] * u0[idx] -
               eps * kappa_ * std::norm(u0[idx]) * u0[idx];
  }
  return res;
}

}  // namespace blochwave
