#include "blochwave/bloch.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace blochwave {

namespace {

std::string index_to_string(const std::vector<int>& idx) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) os << ",";
    os << idx[i];
  }
  os << ")";
  return os.str();
}

std::vector<int> negated(const std::vector<int>& idx) {
  std::vector<int> n(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) n[i] = -idx[i];
  return n;
}

// Gauge: multiply by a unit phase so the largest-modulus coefficient is
// real and positive. Ties resolved by the first index in basis order.
void fix_gauge(Eigen::VectorXcd& c) {
  int best = 0;
  double best_mod = std::norm(c[0]);
  for (int i = 1; i < c.size(); ++i) {
    const double m = std::norm(c[i]);
    if (m > best_mod) {
      best_mod = m;
      best = i;
    }
  }
  const double mod = std::abs(c[best]);
  if (mod > 0.0) c *= std::conj(c[best]) / mod;
}

bool lex_less(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
    if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec PotentialSpec::free_potential(const Lattice& lattice) {
  return PotentialSpec(lattice);
}

PotentialSpec PotentialSpec::from_coefficients(
    const Lattice& lattice,
    const std::vector<std::pair<std::vector<int>, cdouble>>& coeffs) {
  PotentialSpec pot(lattice);
  for (const auto& [idx, v] : coeffs) {
    if (static_cast<int>(idx.size()) != lattice.dim()) {
      throw ConfigError("potential index dimension mismatch");
    }
    pot.coeffs_[idx] = v;
  }
  pot.validate();
  return pot;
}

PotentialSpec& PotentialSpec::add_cosine(const std::vector<int>& index,
                                         double v) {
  if (static_cast<int>(index.size()) != lattice_.dim()) {
    throw ConfigError("potential index dimension mismatch");
  }
  coeffs_[index] += 0.5 * v;
  coeffs_[negated(index)] += 0.5 * v;
  validate();
  return *this;
}

void PotentialSpec::validate() const {
  for (const auto& [idx, v] : coeffs_) {
    const bool zero = std::all_of(idx.begin(), idx.end(),
                                  [](int m) { return m == 0; });
    if (zero) {
      if (std::abs(v.imag()) > 1e-14 * (1.0 + std::abs(v.real()))) {
        throw ConfigError("V_0 must be real");
      }
      continue;
    }
    auto it = coeffs_.find(negated(idx));
    if (it == coeffs_.end() ||
        std::abs(it->second - std::conj(v)) > 1e-14 * (1.0 + std::abs(v))) {
      throw ConfigError("potential is not real: V_{-g} != conj(V_g) at g = " +
                        index_to_string(idx));
    }
  }
}

cdouble PotentialSpec::coefficient(const std::vector<int>& index) const {
  auto it = coeffs_.find(index);
  return it == coeffs_.end() ? cdouble(0.0, 0.0) : it->second;
}

double PotentialSpec::sup_bound() const {
  double s = 0.0;
  for (const auto& [idx, v] : coeffs_) s += std::abs(v);
  return s;
}

double PotentialSpec::sample(const Eigen::VectorXd& y) const {
  cdouble s(0.0, 0.0);
  for (const auto& [idx, v] : coeffs_) {
    const Eigen::VectorXd g = lattice_.dual_vector(idx);
    s += v * std::exp(cdouble(0.0, g.dot(y)));
  }
  return s.real();
}

std::uint64_t PotentialSpec::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t x) {
    for (int b = 0; b < 8; ++b) {
      h ^= (x >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [idx, v] : coeffs_) {
    for (int m : idx) mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(m)));
    std::uint64_t bits;
    double re = v.real(), im = v.imag();
    std::memcpy(&bits, &re, 8);
    mix(bits);
    std::memcpy(&bits, &im, 8);
    mix(bits);
  }
  return h;
}

// ---------------------------------------------------------------------------
// PlaneWaveBasis

PlaneWaveBasis::PlaneWaveBasis(Lattice lattice,
                               std::vector<std::vector<int>> indices)
    : lattice_(std::move(lattice)), indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  const int d = lattice_.dim();
  gvecs_.resize(static_cast<long>(indices_.size()), d);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    gvecs_.row(static_cast<long>(i)) = lattice_.dual_vector(indices_[i]);
    lookup_[indices_[i]] = static_cast<int>(i);
    for (int m : indices_[i]) max_abs_index_ = std::max(max_abs_index_, std::abs(m));
  }
}

PlaneWaveBasis PlaneWaveBasis::cutoff(const Lattice& lattice, double g_max) {
  if (g_max < 0.0) throw Error("PlaneWaveBasis: negative cutoff");
  const int d = lattice.dim();
  std::vector<int> bound(d);
  for (int i = 0; i < d; ++i) {
    // |m_i| = |g . zeta_i| / (2 pi) <= |g| |zeta_i| / (2 pi)
    bound[i] = static_cast<int>(
        std::ceil(g_max * lattice.basis().row(i).norm() / (2.0 * M_PI)));
  }
  std::vector<std::vector<int>> indices;
  std::vector<int> m(d, 0);
  const double limit2 = g_max * g_max * (1.0 + 1e-12) + 1e-12;
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      if (lattice.dual_vector(m).squaredNorm() <= limit2) indices.push_back(m);
      return;
    }
    for (int v = -bound[axis]; v <= bound[axis]; ++v) {
      m[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return PlaneWaveBasis(lattice, std::move(indices));
}

PlaneWaveBasis PlaneWaveBasis::index_range(const Lattice& lattice,
                                           int max_index) {
  if (max_index < 0) throw Error("PlaneWaveBasis: negative index range");
  const int d = lattice.dim();
  std::vector<std::vector<int>> indices;
  std::vector<int> m(d, 0);
  std::function<void(int)> rec = [&](int axis) {
    if (axis == d) {
      indices.push_back(m);
      return;
    }
    for (int v = -max_index; v <= max_index; ++v) {
      m[axis] = v;
      rec(axis + 1);
    }
  };
  rec(0);
  return PlaneWaveBasis(lattice, std::move(indices));
}

std::optional<int> PlaneWaveBasis::find(const std::vector<int>& index) const {
  auto it = lookup_.find(index);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// BlochProblem

BlochProblem::BlochProblem(PotentialSpec pot, PlaneWaveBasis basis)
    : pot_(std::move(pot)),
      basis_(std::make_shared<const PlaneWaveBasis>(std::move(basis))) {}

Eigen::MatrixXcd BlochProblem::hamiltonian(const BzPoint& k) const {
  const int D = basis_->size();
  const int d = pot_.lattice().dim();

  // Every stored potential coefficient must be reachable as a difference of
  // two basis vectors, otherwise it is silently lost.
  for (const auto& [pidx, v] : pot_.coefficients()) {
    bool reachable = false;
    for (int i = 0; i < D && !reachable; ++i) {
      std::vector<int> other(d);
      for (int a = 0; a < d; ++a) other[a] = basis_->index(i)[a] - pidx[a];
      reachable = basis_->find(other).has_value();
    }
    if (!reachable) {
      throw CutoffTooSmall("potential coefficient at g = " +
                           index_to_string(pidx) +
                           " is outside the basis difference set");
    }
  }

  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(D, D);
  for (int i = 0; i < D; ++i) {
    H(i, i) = 0.5 * (k.k + basis_->gvec(i)).squaredNorm();
  }
  std::vector<int> diff(d);
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      for (int a = 0; a < d; ++a) diff[a] = basis_->index(i)[a] - basis_->index(j)[a];
      const bool zero = std::all_of(diff.begin(), diff.end(),
                                    [](int m) { return m == 0; });
      if (!zero) {
        const cdouble v = pot_.coefficient(diff);
        if (v != cdouble(0.0, 0.0)) H(i, j) += v;
      } else {
        H(i, i) += pot_.coefficient(diff);
      }
    }
  }
  return H;
}

const BlochProblem::Decomp& BlochProblem::decomposition(const BzPoint& k) const {
  std::vector<double> key(k.frac.data(), k.frac.data() + k.frac.size());
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hamiltonian(k));
  if (es.info() != Eigen::Success) throw Error("eigensolver failed");
  auto decomp = std::make_unique<Decomp>();
  decomp->evals = es.eigenvalues();
  decomp->evecs = es.eigenvectors();

  // Deterministic ordering of exact ties: within runs of equal eigenvalues,
  // order columns lexicographically after gauge fixing.
  const int D = static_cast<int>(decomp->evals.size());
  const double scale = std::max(1.0, decomp->evals.cwiseAbs().maxCoeff());
  int i = 0;
  while (i < D) {
    int j = i + 1;
    while (j < D && decomp->evals[j] - decomp->evals[i] <= 1e-13 * scale) ++j;
    if (j - i > 1) {
      std::vector<Eigen::VectorXcd> cols;
      for (int c = i; c < j; ++c) {
        Eigen::VectorXcd v = decomp->evecs.col(c);
        fix_gauge(v);
        cols.push_back(std::move(v));
      }
      std::sort(cols.begin(), cols.end(), lex_less);
      for (int c = i; c < j; ++c) decomp->evecs.col(c) = cols[c - i];
    }
    i = j;
  }

  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(std::move(key), std::move(decomp));
  return *it->second;
}

std::vector<double> BlochProblem::band_energies(const BzPoint& k,
                                                int count) const {
  if (count < 1 || count > basis_->size()) {
    throw Error("band_energies: count out of range");
  }
  const Decomp& dec = decomposition(k);
  return std::vector<double>(dec.evals.data(), dec.evals.data() + count);
}

std::vector<BlochPair> BlochProblem::solve_bands(const BzPoint& k,
                                                 int count) const {
  if (count < 1 || count > basis_->size()) {
    throw Error("solve_bands: count out of range");
  }
  const Decomp& dec = decomposition(k);
  const int D = basis_->size();
  const double inv_sqrt_vol = 1.0 / std::sqrt(pot_.lattice().cell_volume());

  std::vector<BlochPair> out;
  out.reserve(count);
  for (int ell = 1; ell <= count; ++ell) {
    BlochPair p;
    p.k = k;
    p.band = ell;
    p.energy = dec.evals[ell - 1];
    p.gap_below = (ell == 1) ? std::numeric_limits<double>::infinity()
                             : dec.evals[ell - 1] - dec.evals[ell - 2];
    p.gap_above = (ell == D) ? std::numeric_limits<double>::infinity()
                             : dec.evals[ell] - dec.evals[ell - 1];
    const double tol = degeneracy_tol * std::max(1.0, std::abs(p.energy));
    if (p.gap_below < tol || p.gap_above < tol) {
      throw DegenerateBand("band " + std::to_string(ell) +
                           " is degenerate at this k (gap below tolerance)");
    }
    Eigen::VectorXcd c = dec.evecs.col(ell - 1);
    fix_gauge(c);
    p.coeff = c * inv_sqrt_vol;
    p.basis = basis_;
    out.push_back(std::move(p));
  }
  return out;
}

BlochPair BlochProblem::solve_band(const BzPoint& k, int band) const {
  auto pairs = solve_bands(k, band);
  return pairs.back();
}

Eigen::VectorXcd BlochProblem::resolvent_apply(const BzPoint& k, double E,
                                               const Eigen::VectorXcd& F) const {
  const Decomp& dec = decomposition(k);
  const int D = basis_->size();
  double dist = std::numeric_limits<double>::infinity();
  for (int j = 0; j < D; ++j) dist = std::min(dist, std::abs(E - dec.evals[j]));
  if (dist <= resolvent_tol) {
    throw NearResonance("sigma=(k,E) lies within " + std::to_string(dist) +
                        " of the discrete spectrum");
  }
  const Eigen::VectorXcd proj = dec.evecs.adjoint() * F;
  Eigen::VectorXcd scaled(D);
  for (int j = 0; j < D; ++j) scaled[j] = proj[j] / (E - dec.evals[j]);
  return dec.evecs * scaled;
}

Eigen::VectorXcd BlochProblem::deflated_solve(const BlochPair& pair,
                                              const Eigen::VectorXcd& F) const {
  if (!pair.basis || pair.basis->size() != basis_->size()) {
    throw Error("deflated_solve: pair basis does not match problem basis");
  }
  const Decomp& dec = decomposition(pair.k);
  const int D = basis_->size();

  // Locate the eigendirection of the pair (unit-l2 version of its chi).
  const double sqrt_vol = std::sqrt(pot_.lattice().cell_volume());
  const Eigen::VectorXcd unit = pair.coeff * sqrt_vol;
  const Eigen::VectorXcd overlap = dec.evecs.adjoint() * unit;
  int jstar = 0;
  double best = 0.0;
  for (int j = 0; j < D; ++j) {
    const double m = std::norm(overlap[j]);
    if (m > best) {
      best = m;
      jstar = j;
    }
  }
  const double tol = degeneracy_tol * std::max(1.0, std::abs(pair.energy));
  for (int j = 0; j < D; ++j) {
    if (j != jstar && std::abs(pair.energy - dec.evals[j]) < tol) {
      throw DegenerateBand("deflated_solve: another eigenvalue within "
                           "degeneracy tolerance of E");
    }
  }

  const Eigen::VectorXcd proj = dec.evecs.adjoint() * F;
  Eigen::VectorXcd scaled = Eigen::VectorXcd::Zero(D);
  for (int j = 0; j < D; ++j) {
    if (j == jstar) continue;
    scaled[j] = proj[j] / (pair.energy - dec.evals[j]);
  }
  return dec.evecs * scaled;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd group_velocity(const BlochPair& pair, double degeneracy_tol) {
  const double tol = degeneracy_tol * std::max(1.0, std::abs(pair.energy));
  if (pair.gap_below < tol || pair.gap_above < tol) {
    throw DegenerateBand("group velocity does not exist at a band crossing");
  }
  const Lattice& lat = pair.basis->lattice();
  const int d = lat.dim();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < pair.coeff.size(); ++i) {
    const Eigen::VectorXd kg = pair.k.k + pair.basis->gvec(i);
    theta += kg * std::norm(pair.coeff[i]);
  }
  return theta * lat.cell_volume();
}

std::vector<cdouble> bloch_realspace(const BlochPair& pair,
                                     const CellGrid& grid) {
  const long n = grid.points.rows();
  std::vector<cdouble> out(n, cdouble(0.0, 0.0));
  for (int i = 0; i < pair.coeff.size(); ++i) {
    const Eigen::VectorXd g = pair.basis->gvec(i);
    const cdouble c = pair.coeff[i];
    for (long p = 0; p < n; ++p) {
      const double phase = g.dot(grid.points.row(p));
      out[p] += c * cdouble(std::cos(phase), std::sin(phase));
    }
  }
  return out;
}

}  // namespace blochwave
