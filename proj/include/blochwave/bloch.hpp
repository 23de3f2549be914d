#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "blochwave/lattice.hpp"

namespace blochwave {

using cdouble = std::complex<double>;

/// Smooth Gamma-periodic potential, stored as finitely many Fourier
/// coefficients V_g over dual-lattice vectors (integer index tuples).
/// Reality of V is enforced: V_{-g} = conj(V_g), V_0 real.
class PotentialSpec {
 public:
  PotentialSpec() = default;  // empty; assign before use
  static PotentialSpec free_potential(const Lattice& lattice);
  static PotentialSpec from_coefficients(
      const Lattice& lattice,
      const std::vector<std::pair<std::vector<int>, cdouble>>& coeffs);
  /// Shorthand: adds V_{+index} = V_{-index} = v/2, i.e. v*cos(g.y).
  PotentialSpec& add_cosine(const std::vector<int>& index, double v);

  const Lattice& lattice() const { return lattice_; }
  const std::map<std::vector<int>, cdouble>& coefficients() const {
    return coeffs_;
  }
  cdouble coefficient(const std::vector<int>& index) const;
  /// sum |V_g|, an upper bound for sup |V|.
  double sup_bound() const;
  /// Real-space sample (imaginary part vanishes by the reality constraint).
  double sample(const Eigen::VectorXd& y) const;
  /// Content hash for provenance sidecars.
  std::uint64_t hash() const;

 private:
  explicit PotentialSpec(Lattice lattice) : lattice_(std::move(lattice)) {}
  void validate() const;
  Lattice lattice_;
  std::map<std::vector<int>, cdouble> coeffs_;
};

/// Ordered plane-wave set {g : |g| <= G_max} (or an index hypercube),
/// lexicographic by integer index; contains 0 and is closed under g -> -g.
class PlaneWaveBasis {
 public:
  static PlaneWaveBasis cutoff(const Lattice& lattice, double g_max);
  static PlaneWaveBasis index_range(const Lattice& lattice, int max_index);

  int size() const { return static_cast<int>(indices_.size()); }
  const Lattice& lattice() const { return lattice_; }
  const std::vector<int>& index(int i) const { return indices_[i]; }
  Eigen::VectorXd gvec(int i) const { return gvecs_.row(i); }
  std::optional<int> find(const std::vector<int>& index) const;
  int max_abs_index() const { return max_abs_index_; }

 private:
  PlaneWaveBasis(Lattice lattice, std::vector<std::vector<int>> indices);
  Lattice lattice_;
  std::vector<std::vector<int>> indices_;
  Eigen::MatrixXd gvecs_;  // size() x d
  std::map<std::vector<int>, int> lookup_;
  int max_abs_index_ = 0;
};

/// One Bloch eigenpair. Coefficients c_g of chi(y;k) = sum_g c_g e^{i g.y}
/// normalized so <chi,chi>_{L2(Y)} = 1 (sum |c_g|^2 = 1/|Y|); gauge: the
/// largest-modulus coefficient is real and positive.
struct BlochPair {
  BzPoint k;
  int band = 0;  // 1-based
  double energy = 0.0;
  Eigen::VectorXcd coeff;
  double gap_below = 0.0;
  double gap_above = 0.0;
  std::shared_ptr<const PlaneWaveBasis> basis;
};

/// Plane-wave Galerkin discretization of the shifted Hamiltonian
/// H(k) = (1/2)(-i grad + k)^2 + V on the cell, with dense Hermitian
/// eigensolves, resolvent and deflated solves.
class BlochProblem {
 public:
  BlochProblem(PotentialSpec pot, PlaneWaveBasis basis);

  const PotentialSpec& potential() const { return pot_; }
  const PlaneWaveBasis& basis() const { return *basis_; }
  std::shared_ptr<const PlaneWaveBasis> basis_ptr() const { return basis_; }

  /// Entry (g,g') = |k+g|^2/2 delta_{gg'} + V_{g-g'}. Throws CutoffTooSmall
  /// if a potential coefficient is outside the difference set of the basis.
  Eigen::MatrixXcd hamiltonian(const BzPoint& k) const;

  /// Lowest `count` eigenvalues, ascending. No degeneracy policing.
  std::vector<double> band_energies(const BzPoint& k, int count) const;

  /// Eigenpairs for bands 1..count; throws DegenerateBand if any requested
  /// band has a neighbor gap below degeneracy_tol * max(1,|E|).
  std::vector<BlochPair> solve_bands(const BzPoint& k, int count) const;
  BlochPair solve_band(const BzPoint& k, int band) const;

  /// X with (E - H(k))X = F for sigma=(k,E) away from the spectrum.
  /// Throws NearResonance if dist(E, spec) <= resolvent_tol.
  Eigen::VectorXcd resolvent_apply(const BzPoint& k, double E,
                                   const Eigen::VectorXcd& F) const;

  /// Unique X orthogonal to pair's chi with (E - H)X = (1 - P)F.
  Eigen::VectorXcd deflated_solve(const BlochPair& pair,
                                  const Eigen::VectorXcd& F) const;

  double degeneracy_tol = 1e-8;
  double resolvent_tol = 1e-6;

 private:
  struct Decomp {
    Eigen::VectorXd evals;
    Eigen::MatrixXcd evecs;  // unit l2 columns
  };
  const Decomp& decomposition(const BzPoint& k) const;

  PotentialSpec pot_;
  std::shared_ptr<const PlaneWaveBasis> basis_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::vector<double>, std::unique_ptr<Decomp>> cache_;
};

/// Hellmann-Feynman group velocity: theta_j = |Y| sum_g (k+g)_j |c_g|^2.
/// Throws DegenerateBand if the pair's gaps are below tolerance.
Eigen::VectorXd group_velocity(const BlochPair& pair,
                               double degeneracy_tol = 1e-8);

/// Samples of chi(y;k) on a cell grid.
std::vector<cdouble> bloch_realspace(const BlochPair& pair,
                                     const CellGrid& grid);

}  // namespace blochwave
