#pragma once

#include <map>
#include <vector>

#include "blochwave/bloch.hpp"
#include "blochwave/fft.hpp"
#include "blochwave/lattice.hpp"

namespace blochwave {

/// Lattice-commensurate periodic box for the eps-scaled NLS: eps = 1/q, the
/// box is an integer number of macroscopic lattice cells per axis, and each
/// microscopic cell carries p_cell grid points, so V(x/eps) is exactly
/// periodic on the box. Requires an axis-aligned (diagonal) lattice basis.
struct FineGrid {
  Lattice lattice;
  std::vector<int> box;  // macroscopic box lengths (units of lattice axes)
  int q = 8;
  int p_cell = 16;
  std::vector<int> npts;
  std::vector<std::vector<double>> xi;  // wavenumbers per axis, FFT order

  static FineGrid make(const Lattice& lattice, std::vector<int> box, int q,
                       int p_cell);

  double eps() const { return 1.0 / q; }
  int dim() const { return static_cast<int>(box.size()); }
  long total() const;
  double point_weight() const;
  /// Axis points x = -B/2 + j B/n.
  std::vector<double> axis(int j) const;
  std::vector<int> unflatten(long idx) const;
  /// Whether k/eps is an exact grid wavenumber on every axis.
  bool mode_commensurate(const Eigen::VectorXd& k_cart, double tol = 1e-9) const;
};

struct WaveField {
  double t = 0.0;
  std::vector<cdouble> u;
  double eps = 0.0;
  double mass0 = 0.0;  // recorded at construction
};

/// Scaled Sobolev norm: sqrt(sum (1+|eps p|^2)^s |u_hat(p)|^2) with the
/// discrete Parseval normalization matching the L2 quadrature.
double hs_eps_norm(const std::vector<cdouble>& u, const FineGrid& grid,
                   double s);

/// Strang split-step integrator for
///   i eps dt u = -(eps^2/2) Lap u + V(x/eps) u + eps kappa |u|^2 u.
/// The potential+nonlinear substep is an exact phase flow (|u| invariant
/// under it), so all splitting error comes from non-commutation with the
/// kinetic term; dt ~ eps suffices despite the 1/eps potential factor.
class NlsSolver {
 public:
  NlsSolver(FineGrid grid, PotentialSpec pot, double kappa);

  const FineGrid& grid() const { return grid_; }
  double kappa() const { return kappa_; }
  const std::vector<double>& potential_samples() const { return vsamples_; }

  WaveField make_field(std::vector<cdouble> samples, double t = 0.0) const;

  /// kinetic(dt/2) o phase(dt) o kinetic(dt/2).
  void split_step(WaveField& field, double dt) const;

  std::vector<WaveField> evolve(const WaveField& initial, double T, double dt,
                                int checkpoint_stride = 0) const;

  double mass(const WaveField& field) const;
  double energy(const WaveField& field) const;

  /// Accuracy-motivated step bound c_t * eps * min(1, 1/||V||_inf).
  double suggest_dt(double c_t = 0.1) const;

  /// Residual of the discrete NLS operator on a time-centered triple of
  /// fields: i eps (u_plus - u_minus)/(2 dt) - H u0 - eps kappa |u0|^2 u0.
  std::vector<cdouble> residual(const std::vector<cdouble>& u_minus,
                                const std::vector<cdouble>& u0,
                                const std::vector<cdouble>& u_plus,
                                double dt) const;

 private:
  const std::vector<cdouble>& kinetic_table(double tau) const;

  FineGrid grid_;
  PotentialSpec pot_;
  double kappa_ = 0.0;
  Fft fft_;
  std::vector<double> vsamples_;       // V(x/eps) on the grid
  std::vector<double> p2_;             // |p|^2 per wavenumber bin
  mutable std::map<std::uint64_t, std::vector<cdouble>> kinetic_cache_;
};

}  // namespace blochwave
