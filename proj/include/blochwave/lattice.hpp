#pragma once

#include <Eigen/Dense>
#include <vector>

#include "blochwave/errors.hpp"

namespace blochwave {

/// Periodicity lattice Gamma with dual Gamma*, convention
/// zeta*_i . zeta_j = 2*pi*delta_ij, so e^{i g.y} with g in Gamma* is
/// exactly Gamma-periodic.
class Lattice {
 public:
  /// `basis_rows`: d x d matrix, row i = zeta_i. Throws SingularBasis if the
  /// rows are numerically dependent.
  static Lattice from_basis(const Eigen::MatrixXd& basis_rows);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::MatrixXd& dual_basis() const { return dual_; }
  double cell_volume() const { return cell_volume_; }

  /// Fractional coordinates of a dual-space vector k: k = sum_i f_i zeta*_i.
  Eigen::VectorXd dual_fractional(const Eigen::VectorXd& k) const;
  /// Dual-space vector from fractional coordinates.
  Eigen::VectorXd dual_from_fractional(const Eigen::VectorXd& f) const;
  /// Real-space point from fractional coordinates: y = sum_i f_i zeta_i.
  Eigen::VectorXd cell_from_fractional(const Eigen::VectorXd& f) const;
  /// Dual vector for an integer index tuple m: g = sum_i m_i zeta*_i.
  Eigen::VectorXd dual_vector(const std::vector<int>& index) const;

 private:
  Eigen::MatrixXd basis_;  // rows = zeta_i
  Eigen::MatrixXd dual_;   // rows = zeta*_i
  double cell_volume_ = 0.0;
};

/// Compute the dual basis alone (rows in, rows out).
Eigen::MatrixXd dual_basis(const Eigen::MatrixXd& basis_rows);

/// A point of the Brillouin zone. `frac` are fractional coordinates w.r.t.
/// the dual basis, canonical means frac in [-1/2,1/2) componentwise (the
/// tie at +1/2 is mapped to -1/2).
struct BzPoint {
  Eigen::VectorXd k;     // cartesian
  Eigen::VectorXd frac;  // fractional, canonical
};

struct WrapResult {
  BzPoint point;
  Eigen::VectorXi shift;  // k = point.k + sum_i shift_i zeta*_i
};

/// Wrap an arbitrary dual-space vector into the centered Brillouin zone.
/// Idempotent on canonical input.
WrapResult wrap_to_bz(const Eigen::VectorXd& k, const Lattice& lattice);

/// Same, starting from fractional coordinates (avoids a basis solve).
WrapResult wrap_fractional(const Eigen::VectorXd& frac, const Lattice& lattice);

/// Canonical BzPoint from fractional coordinates (must already be canonical
/// up to the wrap).
BzPoint bz_point(const Eigen::VectorXd& frac, const Lattice& lattice);

/// Uniform tensor quadrature grid on the fundamental cell Y, fractional
/// coordinates over [-1/2,1/2)^d mapped through the basis. Weight per point
/// is |Y|/n^d; integrates e^{i g.y} exactly for dual vectors with
/// fractional index below n/2.
struct CellGrid {
  Eigen::MatrixXd points;       // n^d rows, d columns (cartesian y)
  Eigen::MatrixXd frac_points;  // same rows, fractional coordinates
  double weight = 0.0;
  int n_per_dim = 0;
};

CellGrid cell_grid(const Lattice& lattice, int n_per_dim);

}  // namespace blochwave
