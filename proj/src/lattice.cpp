#include "blochwave/lattice.hpp"

#include <cmath>

namespace blochwave {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

Eigen::MatrixXd dual_basis(const Eigen::MatrixXd& basis_rows) {
  const int d = static_cast<int>(basis_rows.rows());
  if (d < 1 || basis_rows.cols() != d) {
    throw SingularBasis("basis must be a square d x d matrix of row vectors");
  }
  const double det = basis_rows.determinant();
  const double scale = basis_rows.cwiseAbs().maxCoeff();
  if (std::abs(det) <= 1e-12 * std::pow(scale, d)) {
    throw SingularBasis("lattice basis is numerically singular (|det| = " +
                        std::to_string(det) + ")");
  }
  // zeta*_i . zeta_j = 2 pi delta_ij  <=>  Dual * Basis^T = 2 pi I.
  return kTwoPi * basis_rows.transpose().inverse();
}

Lattice Lattice::from_basis(const Eigen::MatrixXd& basis_rows) {
  Lattice lat;
  lat.dual_ = blochwave::dual_basis(basis_rows);  // validates
  lat.basis_ = basis_rows;
  lat.cell_volume_ = std::abs(basis_rows.determinant());
  return lat;
}

Eigen::VectorXd Lattice::dual_fractional(const Eigen::VectorXd& k) const {
  // k = Dual^T f  and  Basis * Dual^T = 2 pi I, hence f = Basis k / (2 pi).
  return basis_ * k / kTwoPi;
}

Eigen::VectorXd Lattice::dual_from_fractional(const Eigen::VectorXd& f) const {
  return dual_.transpose() * f;
}

Eigen::VectorXd Lattice::cell_from_fractional(const Eigen::VectorXd& f) const {
  return basis_.transpose() * f;
}

Eigen::VectorXd Lattice::dual_vector(const std::vector<int>& index) const {
  Eigen::VectorXd f(dim());
  for (int i = 0; i < dim(); ++i) f[i] = static_cast<double>(index[i]);
  return dual_from_fractional(f);
}

WrapResult wrap_fractional(const Eigen::VectorXd& frac, const Lattice& lattice) {
  const int d = lattice.dim();
  WrapResult r;
  r.shift = Eigen::VectorXi(d);
  Eigen::VectorXd wrapped(d);
  for (int i = 0; i < d; ++i) {
    // Half-open centered cell: +1/2 maps to -1/2 so wrapping is a function.
    const double s = std::floor(frac[i] + 0.5);
    r.shift[i] = static_cast<int>(s);
    wrapped[i] = frac[i] - s;
  }
  r.point.frac = wrapped;
  r.point.k = lattice.dual_from_fractional(wrapped);
  return r;
}

WrapResult wrap_to_bz(const Eigen::VectorXd& k, const Lattice& lattice) {
  return wrap_fractional(lattice.dual_fractional(k), lattice);
}

BzPoint bz_point(const Eigen::VectorXd& frac, const Lattice& lattice) {
  return wrap_fractional(frac, lattice).point;
}

CellGrid cell_grid(const Lattice& lattice, int n_per_dim) {
  if (n_per_dim < 2) throw Error("cell_grid requires n_per_dim >= 2");
  const int d = lattice.dim();
  long total = 1;
  for (int i = 0; i < d; ++i) total *= n_per_dim;

  CellGrid grid;
  grid.n_per_dim = n_per_dim;
  grid.weight = lattice.cell_volume() / static_cast<double>(total);
  grid.points.resize(total, d);
  grid.frac_points.resize(total, d);

  Eigen::VectorXd f(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = d - 1; i >= 0; --i) {
      const long j = rem % n_per_dim;
      rem /= n_per_dim;
      f[i] = -0.5 + static_cast<double>(j) / n_per_dim;
    }
    grid.frac_points.row(idx) = f;
    grid.points.row(idx) = lattice.cell_from_fractional(f);
  }
  return grid;
}

}  // namespace blochwave
