#pragma once

#include <vector>

#include "blochwave/coupling.hpp"
#include "blochwave/fft.hpp"
#include "blochwave/modes.hpp"

namespace blochwave {

/// Periodic macroscopic box with power-of-two grids per axis.
struct MacroGrid {
  std::vector<double> length;
  std::vector<int> npts;
  std::vector<std::vector<double>> xi;  // wavenumbers per axis, FFT order

  static MacroGrid regular(std::vector<double> length, std::vector<int> npts);

  int dim() const { return static_cast<int>(length.size()); }
  long total() const;
  /// Quadrature weight per grid point, prod_j length_j / npts_j.
  double point_weight() const;
  /// Axis sample points, x = -L/2 + j L/n.
  std::vector<double> axis(int j) const;
  /// Multi-index of a flat (row-major) index.
  std::vector<int> unflatten(long idx) const;
};

struct AmplitudeState {
  double t = 0.0;
  std::vector<std::vector<cdouble>> fields;  // one array per mode
};

struct ConservedReport {
  std::vector<double> mode_mass;  // ||a_m||_{L2}^2
  double total_mass = 0.0;
  double energy_weighted = 0.0;           // I(a) = sum E_m ||a_m||^2
  std::vector<double> weighted;           // Itilde per compatible-weight vector
  double h_red = 0.0;                     // reduced Hamiltonian
  std::vector<double> translation;        // I_trans per coordinate axis
};

/// Orthonormal basis of weights w in R^M with w_p - w_q + w_r = w_m for all
/// resonant quadruples; always contains the all-ones direction in its span.
std::vector<Eigen::VectorXd> compatible_weights(
    const std::vector<std::array<int, 4>>& quadruples, int M);

/// Strang-split integrator for the four-wave amplitude system
///   i dt a_m + i theta_m . grad a_m = sum kappa_{(p,q,r,m)} a_p conj(a_q) a_r
/// on a periodic macroscopic box: exact spectral transport composed with a
/// pointwise RK4 flow of the resonant coupling.
class AmplitudeSystem {
 public:
  AmplitudeSystem(MacroGrid grid, const ModeSystem& system,
                  const CouplingTable& table);

  const MacroGrid& grid() const { return grid_; }
  int num_modes() const { return static_cast<int>(velocities_.size()); }
  const std::vector<Eigen::VectorXd>& velocities() const { return velocities_; }
  const std::vector<double>& mode_energies() const { return energies_; }
  const CouplingTable& coupling() const { return table_; }

  AmplitudeState zero_state() const;

  /// Exact transport flow for time dt (Fourier multiplier e^{-i xi.theta dt}).
  void transport_half_step(AmplitudeState& state, double dt) const;

  /// Pointwise RK4 step of the coupled cubic ODE system.
  void nonlinear_step(AmplitudeState& state, double dt) const;

  /// transport(dt/2) o nonlinear(dt) o transport(dt/2); advances state.t.
  void strang_step(AmplitudeState& state, double dt) const;

  /// Checkpointed trajectory over [t0, t0+T]; includes the initial and final
  /// states. Throws NonFiniteField (with step index) on divergence.
  std::vector<AmplitudeState> strang_evolve(const AmplitudeState& initial,
                                            double T, double dt,
                                            int checkpoint_stride = 0) const;

  ConservedReport conserved_report(const AmplitudeState& state) const;

  /// Spectral derivative along an axis.
  std::vector<cdouble> gradient_axis(const std::vector<cdouble>& field,
                                     int axis) const;

  /// Right-hand side d a/dt = -i sum kappa a_p conj(a_q) a_r (for tests and
  /// the correction assembly).
  void nonlinear_rhs(const std::vector<std::vector<cdouble>>& fields,
                     std::vector<std::vector<cdouble>>& out) const;

 private:
  const std::vector<cdouble>& transport_table(int mode, double dt) const;

  MacroGrid grid_;
  CouplingTable table_;
  std::vector<Eigen::VectorXd> velocities_;
  std::vector<double> energies_;
  std::vector<Eigen::VectorXd> weight_basis_;
  Fft fft_;
  mutable std::map<std::pair<int, std::uint64_t>, std::vector<cdouble>>
      transport_cache_;
};

/// Gaussian pulse a(x) = amplitude * exp(-|x-center|^2 / (2 width^2))
/// * e^{i phase_k . x} sampled on the grid.
std::vector<cdouble> gaussian_field(const MacroGrid& grid,
                                    const Eigen::VectorXd& center, double width,
                                    cdouble amplitude,
                                    const Eigen::VectorXd& phase_k);

}  // namespace blochwave
