#include "blochwave/amplitude.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstring>

#include "blochwave/kernels.hpp"
#include "blochwave/parallel.hpp"
#include "blochwave/reduce.hpp"

namespace blochwave {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void par_caxpy(std::vector<cdouble>& y, cdouble alpha,
               const std::vector<cdouble>& x) {
  parallel::for_blocks(y.size(), [&](std::size_t, std::size_t lo, std::size_t hi) {
    kernels::caxpy(y.data() + lo, alpha, x.data() + lo, hi - lo);
  });
}

}  // namespace

MacroGrid MacroGrid::regular(std::vector<double> length, std::vector<int> npts) {
  if (length.size() != npts.size() || length.empty()) {
    throw Error("MacroGrid: length/npts shape mismatch");
  }
  MacroGrid g;
  g.length = std::move(length);
  g.npts = std::move(npts);
  for (std::size_t j = 0; j < g.npts.size(); ++j) {
    if (!power_of_two(g.npts[j])) {
      throw Error("MacroGrid: npts must be powers of two");
    }
    if (g.length[j] <= 0.0) throw Error("MacroGrid: box length must be > 0");
    g.xi.push_back(fft_wavenumbers(g.npts[j], g.length[j]));
  }
  return g;
}

long MacroGrid::total() const {
  long t = 1;
  for (int n : npts) t *= n;
  return t;
}

double MacroGrid::point_weight() const {
  double w = 1.0;
  for (std::size_t j = 0; j < npts.size(); ++j) {
    w *= length[j] / npts[j];
  }
  return w;
}

std::vector<double> MacroGrid::axis(int j) const {
  std::vector<double> x(npts[j]);
  for (int i = 0; i < npts[j]; ++i) {
    x[i] = -0.5 * length[j] + length[j] * i / npts[j];
  }
  return x;
}

std::vector<int> MacroGrid::unflatten(long idx) const {
  std::vector<int> mi(dim());
  for (int j = dim() - 1; j >= 0; --j) {
    mi[j] = static_cast<int>(idx % npts[j]);
    idx /= npts[j];
  }
  return mi;
}

std::vector<Eigen::VectorXd> compatible_weights(
    const std::vector<std::array<int, 4>>& quadruples, int M) {
  Eigen::MatrixXd rows(static_cast<long>(quadruples.size()), M);
  rows.setZero();
  for (std::size_t i = 0; i < quadruples.size(); ++i) {
    const auto& [p, q, r, m] = quadruples[i];
    rows(static_cast<long>(i), p) += 1.0;
    rows(static_cast<long>(i), q) -= 1.0;
    rows(static_cast<long>(i), r) += 1.0;
    rows(static_cast<long>(i), m) -= 1.0;
  }
  std::vector<Eigen::VectorXd> basis;
  if (quadruples.empty()) {
    for (int j = 0; j < M; ++j) {
      basis.push_back(Eigen::VectorXd::Unit(M, j));
    }
    return basis;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-12 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  for (int j = 0; j < M; ++j) {
    const double s = j < sv.size() ? sv[j] : 0.0;
    if (s <= cut) basis.push_back(svd.matrixV().col(j));
  }
  return basis;
}

AmplitudeSystem::AmplitudeSystem(MacroGrid grid, const ModeSystem& system,
                                 const CouplingTable& table)
    : grid_(std::move(grid)), table_(table), fft_(grid_.npts) {
  const int d = grid_.dim();
  if (system.sigmas.lattice.dim() != d) {
    throw Error("AmplitudeSystem: grid dimension does not match the lattice");
  }
  for (int m = 0; m < system.size(); ++m) {
    velocities_.push_back(system.velocities[m]);
    energies_.push_back(system.pairs[m].energy);
  }
  weight_basis_ = compatible_weights(table_.quadruples, system.size());
}

AmplitudeState AmplitudeSystem::zero_state() const {
  AmplitudeState s;
  s.fields.assign(num_modes(),
                  std::vector<cdouble>(grid_.total(), cdouble(0.0, 0.0)));
  return s;
}

const std::vector<cdouble>& AmplitudeSystem::transport_table(int mode,
                                                             double dt) const {
  std::uint64_t bits;
  std::memcpy(&bits, &dt, 8);
  const auto key = std::make_pair(mode, bits);
  auto it = transport_cache_.find(key);
  if (it != transport_cache_.end()) return it->second;

  const long n = grid_.total();
  std::vector<cdouble> table(n);
  const Eigen::VectorXd& theta = velocities_[mode];
  for (long idx = 0; idx < n; ++idx) {
    const auto mi = grid_.unflatten(idx);
    double phase = 0.0;
    for (int j = 0; j < grid_.dim(); ++j) phase += grid_.xi[j][mi[j]] * theta[j];
    phase *= -dt;
    table[idx] = cdouble(std::cos(phase), std::sin(phase));
  }
  return transport_cache_.emplace(key, std::move(table)).first->second;
}

void AmplitudeSystem::transport_half_step(AmplitudeState& state,
                                          double dt) const {
  if (!(dt > 0.0)) throw Error("transport step requires dt > 0");
  for (int m = 0; m < num_modes(); ++m) {
    auto& f = state.fields[m];
    const auto& table = transport_table(m, dt);
    fft_.forward(f.data());
    parallel::for_blocks(f.size(), [&](std::size_t, std::size_t lo, std::size_t hi) {
      kernels::cmul(f.data() + lo, table.data() + lo, hi - lo);
    });
    fft_.inverse(f.data());
  }
}

void AmplitudeSystem::nonlinear_rhs(
    const std::vector<std::vector<cdouble>>& fields,
    std::vector<std::vector<cdouble>>& out) const {
  const std::size_t n = fields[0].size();
  for (auto& o : out) std::fill(o.begin(), o.end(), cdouble(0.0, 0.0));
  for (const auto& [quad, value] : table_.entries) {
    const auto& [p, q, r, m] = quad;
    const cdouble alpha = cdouble(0.0, -1.0) * value;
    parallel::for_blocks(n, [&](std::size_t, std::size_t lo, std::size_t hi) {
      kernels::triple_mul_acc(out[m].data() + lo, alpha, fields[p].data() + lo,
                              fields[q].data() + lo, fields[r].data() + lo,
                              hi - lo);
    });
  }
}

void AmplitudeSystem::nonlinear_step(AmplitudeState& state, double dt) const {
  const int M = num_modes();
  const long n = grid_.total();
  using Fields = std::vector<std::vector<cdouble>>;
  Fields k1(M, std::vector<cdouble>(n)), k2(M, std::vector<cdouble>(n));
  Fields k3(M, std::vector<cdouble>(n)), k4(M, std::vector<cdouble>(n));
  Fields tmp = state.fields;

  nonlinear_rhs(state.fields, k1);
  for (int m = 0; m < M; ++m) {
    tmp[m] = state.fields[m];
    par_caxpy(tmp[m], 0.5 * dt, k1[m]);
  }
  nonlinear_rhs(tmp, k2);
  for (int m = 0; m < M; ++m) {
    tmp[m] = state.fields[m];
    par_caxpy(tmp[m], 0.5 * dt, k2[m]);
  }
  nonlinear_rhs(tmp, k3);
  for (int m = 0; m < M; ++m) {
    tmp[m] = state.fields[m];
    par_caxpy(tmp[m], dt, k3[m]);
  }
  nonlinear_rhs(tmp, k4);
  for (int m = 0; m < M; ++m) {
    par_caxpy(state.fields[m], dt / 6.0, k1[m]);
    par_caxpy(state.fields[m], dt / 3.0, k2[m]);
    par_caxpy(state.fields[m], dt / 3.0, k3[m]);
    par_caxpy(state.fields[m], dt / 6.0, k4[m]);
  }
}

void AmplitudeSystem::strang_step(AmplitudeState& state, double dt) const {
  transport_half_step(state, 0.5 * dt);
  nonlinear_step(state, dt);
  transport_half_step(state, 0.5 * dt);
  state.t += dt;
}

std::vector<AmplitudeState> AmplitudeSystem::strang_evolve(
    const AmplitudeState& initial, double T, double dt,
    int checkpoint_stride) const {
  const double steps_real = T / dt;
  const long steps = std::lround(steps_real);
  if (std::abs(steps_real - steps) > 1e-9 || steps < 1) {
    throw Error("strang_evolve: T must be an integer multiple of dt");
  }
  std::vector<AmplitudeState> traj;
  traj.push_back(initial);
  AmplitudeState cur = initial;
  for (long s = 0; s < steps; ++s) {
    strang_step(cur, dt);
    double total = 0.0;
    for (const auto& f : cur.fields) {
      total += reduce::sum_abs2(f.data(), f.size());
    }
    if (!std::isfinite(total)) {
      throw NonFiniteField("amplitude field diverged at step " +
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

std::vector<cdouble> AmplitudeSystem::gradient_axis(
    const std::vector<cdouble>& field, int axis) const {
  std::vector<cdouble> g = field;
  fft_.forward(g.data());
  const long n = grid_.total();
  for (long idx = 0; idx < n; ++idx) {
    const auto mi = grid_.unflatten(idx);
    g[idx] *= cdouble(0.0, grid_.xi[axis][mi[axis]]);
  }
  fft_.inverse(g.data());
  return g;
}

ConservedReport AmplitudeSystem::conserved_report(
    const AmplitudeState& state) const {
  ConservedReport rep;
  const double w = grid_.point_weight();
  const int M = num_modes();
  const long n = grid_.total();

  for (int m = 0; m < M; ++m) {
    rep.mode_mass.push_back(
        w * reduce::sum_abs2(state.fields[m].data(), n));
  }
  rep.total_mass = 0.0;
  rep.energy_weighted = 0.0;
  for (int m = 0; m < M; ++m) {
    rep.total_mass += rep.mode_mass[m];
    rep.energy_weighted += energies_[m] * rep.mode_mass[m];
  }
  for (const auto& wv : weight_basis_) {
    double s = 0.0;
    for (int m = 0; m < M; ++m) s += wv[m] * rep.mode_mass[m];
    rep.weighted.push_back(s);
  }

  // Gradients per mode/axis for the transport and translation integrals.
  std::vector<std::vector<std::vector<cdouble>>> grads(M);
  for (int m = 0; m < M; ++m) {
    for (int j = 0; j < grid_.dim(); ++j) {
      grads[m].push_back(gradient_axis(state.fields[m], j));
    }
  }
  double transport = 0.0;
  for (int m = 0; m < M; ++m) {
    for (int j = 0; j < grid_.dim(); ++j) {
      transport += velocities_[m][j] *
                   reduce::sum_im_conj_dot(state.fields[m].data(),
                                           grads[m][j].data(), n);
    }
  }
  transport *= w;

  cdouble quartic(0.0, 0.0);
  for (const auto& [quad, value] : table_.entries) {
    const auto& [p, q, r, m] = quad;
    cdouble s(0.0, 0.0);
    const auto& ap = state.fields[p];
    const auto& aq = state.fields[q];
    const auto& ar = state.fields[r];
    const auto& am = state.fields[m];
    for (long i = 0; i < n; ++i) {
      s += ap[i] * std::conj(aq[i]) * ar[i] * std::conj(am[i]);
    }
    quartic += 0.5 * value * s * w;
  }
  rep.h_red = transport + quartic.real();

  for (int j = 0; j < grid_.dim(); ++j) {
    double s = 0.0;
    for (int m = 0; m < M; ++m) {
      s += reduce::sum_im_conj_dot(state.fields[m].data(), grads[m][j].data(),
                                   n);
    }
    rep.translation.push_back(w * s);
  }
  return rep;
}

std::vector<cdouble> gaussian_field(const MacroGrid& grid,
                                    const Eigen::VectorXd& center, double width,
                                    cdouble amplitude,
                                    const Eigen::VectorXd& phase_k) {
  const long n = grid.total();
  std::vector<cdouble> out(n);
  std::vector<std::vector<double>> axes;
  for (int j = 0; j < grid.dim(); ++j) axes.push_back(grid.axis(j));
  for (long idx = 0; idx < n; ++idx) {
    const auto mi = grid.unflatten(idx);
    double r2 = 0.0;
    double phase = 0.0;
    for (int j = 0; j < grid.dim(); ++j) {
      const double dx = axes[j][mi[j]] - center[j];
      r2 += dx * dx;
      phase += phase_k[j] * axes[j][mi[j]];
    }
    out[idx] = amplitude * std::exp(-r2 / (2.0 * width * width)) *
               cdouble(std::cos(phase), std::sin(phase));
  }
  return out;
}

}  // namespace blochwave
