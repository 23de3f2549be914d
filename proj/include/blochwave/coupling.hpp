#pragma once

#include <array>
#include <map>

#include "blochwave/modes.hpp"

namespace blochwave {

/// Effective coupling constants kappa_{(p,q,r,m)} = kappa * integral over
/// the cell of chi_p conj(chi_q) chi_r conj(chi_m), keyed by the resonant
/// quadruples of a mode system (0-based indices).
struct CouplingTable {
  double kappa = 0.0;
  int n_per_dim = 0;
  std::vector<std::array<int, 4>> quadruples;
  std::map<std::array<int, 4>, cdouble> entries;

  cdouble at(int p, int q, int r, int m) const {
    auto it = entries.find({p, q, r, m});
    return it == entries.end() ? cdouble(0.0, 0.0) : it->second;
  }
};

/// Quadrature resolution that integrates the fourfold plane-wave products
/// exactly (no aliasing): 4 * max index + 2 points per axis.
int exact_coupling_resolution(const BlochPair& p, const BlochPair& q,
                              const BlochPair& r, const BlochPair& m);

/// Single coupling constant by real-space quadrature on cell_grid(n_per_dim).
/// Throws ResolutionTooLow below the aliasing bound.
cdouble coupling_constant(const BlochPair& p, const BlochPair& q,
                          const BlochPair& r, const BlochPair& m, double kappa,
                          int n_per_dim);

/// Full table over resonant_quadruples(system). n_per_dim = 0 selects the
/// exact resolution automatically. The conjugation/exchange/diagonal-reality
/// symmetries are checked post-hoc and violations throw (assert, not repair).
CouplingTable coupling_table(const ModeSystem& system, double kappa,
                             int n_per_dim = 0);

}  // namespace blochwave
