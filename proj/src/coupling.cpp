#include "blochwave/coupling.hpp"

#include <cmath>

namespace blochwave {

int exact_coupling_resolution(const BlochPair& p, const BlochPair& q,
                              const BlochPair& r, const BlochPair& m) {
  const int imax = std::max(
      std::max(p.basis->max_abs_index(), q.basis->max_abs_index()),
      std::max(r.basis->max_abs_index(), m.basis->max_abs_index()));
  return 4 * imax + 2;
}

cdouble coupling_constant(const BlochPair& p, const BlochPair& q,
                          const BlochPair& r, const BlochPair& m, double kappa,
                          int n_per_dim) {
  const int needed = exact_coupling_resolution(p, q, r, m);
  if (n_per_dim < needed) {
    throw ResolutionTooLow("coupling quadrature needs n >= " +
                           std::to_string(needed) + " per axis, got " +
                           std::to_string(n_per_dim));
  }
  const Lattice& lat = p.basis->lattice();
  const CellGrid grid = cell_grid(lat, n_per_dim);
  const auto cp = bloch_realspace(p, grid);
  const auto cq = bloch_realspace(q, grid);
  const auto cr = bloch_realspace(r, grid);
  const auto cm = bloch_realspace(m, grid);
  cdouble sum(0.0, 0.0);
  for (std::size_t i = 0; i < cp.size(); ++i) {
    sum += cp[i] * std::conj(cq[i]) * cr[i] * std::conj(cm[i]);
  }
  return kappa * grid.weight * sum;
}

CouplingTable coupling_table(const ModeSystem& system, double kappa,
                             int n_per_dim) {
  CouplingTable table;
  table.kappa = kappa;
  table.quadruples = resonant_quadruples(system.sigmas);

  if (n_per_dim == 0 && !system.pairs.empty()) {
    const auto& a = system.pairs.front();
    n_per_dim = exact_coupling_resolution(a, a, a, a);
  }
  table.n_per_dim = n_per_dim;

  for (const auto& quad : table.quadruples) {
    const auto& [p, q, r, m] = quad;
    table.entries[quad] =
        coupling_constant(system.pairs[p], system.pairs[q], system.pairs[r],
                          system.pairs[m], kappa, n_per_dim);
  }

  // Symmetry assertions (gauge-dependent values, structure-independent laws).
  const double scale = std::max(1.0, std::abs(kappa));
  for (const auto& [quad, value] : table.entries) {
    const auto& [p, q, r, m] = quad;
    const auto conj_partner = table.entries.find({q, p, m, r});
    if (conj_partner != table.entries.end() &&
        std::abs(std::conj(value) - conj_partner->second) > 1e-10 * scale) {
      throw Error("coupling table breaks conjugation symmetry");
    }
    const auto exch_partner = table.entries.find({r, q, p, m});
    if (exch_partner != table.entries.end() &&
        std::abs(value - exch_partner->second) > 1e-12 * scale) {
      throw Error("coupling table breaks exchange symmetry");
    }
    if (p == m && q == r && std::abs(value.imag()) > 1e-10 * scale) {
      throw Error("diagonal coupling entry is not real");
    }
  }
  return table;
}

}  // namespace blochwave
