#pragma once

#include <array>

#include "blochwave/amplitude.hpp"
#include "blochwave/coupling.hpp"
#include "blochwave/modes.hpp"
#include "blochwave/nls.hpp"

namespace blochwave {

/// Plane-wave coefficients of chi_p conj(chi_q) chi_r on a target basis
/// (triple convolution of the pairs' coefficient sets).
Eigen::VectorXcd triple_product_coeffs(const BlochPair& p, const BlochPair& q,
                                       const BlochPair& r,
                                       const PlaneWaveBasis& target);

/// One separable term of the first-order correction: a macroscopic factor
/// (a gradient of one amplitude, or a cubic product of amplitudes) times a
/// fixed microscopic profile, carried by the phase of sigma.
struct CorrectionTerm {
  enum class Factor { Gradient, Triple };
  Factor kind = Factor::Gradient;
  int mode = -1;                      // Gradient: d_axis a_mode
  int axis = -1;
  std::array<int, 3> triple{-1, -1, -1};  // Triple: a_p conj(a_q) a_r
  SigmaPoint sigma;
  Eigen::VectorXcd profile;  // coefficients on the extended basis
};

/// Two-scale approximate solution
///   u_N(t,x) = sum_m a_m(t,x) chi_m(x/eps) E_m(t/eps,x/eps)
///            + eps [ sum_m A_perp_m E_m + sum_sigma A_sigma E_sigma ]  (N=1)
/// with the resonant corrections A_perp from the deflated solve of
/// F_1 = L_1 A_0 - kappa (cubic terms) (time derivatives of the amplitudes
/// eliminated through the amplitude equations), and the non-resonant
/// corrections from the resolvent of L_0 at sigma in G^(3) \ G^(1). The
/// first-order resonant coefficients a_{1,m} are frozen at zero.
class TwoScaleAnsatz {
 public:
  /// order 0 builds no corrections; order 1 builds them eagerly.
  TwoScaleAnsatz(const ModeSystem& system, const CouplingTable& table,
                 int order);

  int order() const { return order_; }
  const std::vector<CorrectionTerm>& resonant_terms() const { return perp_; }
  const std::vector<CorrectionTerm>& nonresonant_terms() const {
    return nonres_;
  }

  /// u_0^eps on the fine grid at the state's time.
  std::vector<cdouble> leading_order(const AmplitudeState& state,
                                     const MacroGrid& macro,
                                     const FineGrid& fine) const;

  /// u_N^eps on the fine grid (identical to leading_order for order 0).
  std::vector<cdouble> assemble(const AmplitudeState& state,
                                const MacroGrid& macro,
                                const FineGrid& fine) const;

  /// sup over modes of || P_m F_{1,m}(t) ||_{L2(macro box)}: the solvability
  /// defect of the amplitude trajectory (vanishes when the amplitudes solve
  /// the transport equations and both coupling routes agree).
  double solvability_residual(const AmplitudeState& state,
                              const AmplitudeSystem& asys) const;

 private:
  void build_corrections();
  std::vector<cdouble> macro_factor(const CorrectionTerm& term,
                                    const AmplitudeState& state,
                                    const MacroGrid& macro,
                                    const FineGrid& fine) const;

  const ModeSystem* system_;
  CouplingTable table_;
  int order_ = 0;
  std::shared_ptr<BlochProblem> ext_problem_;
  std::vector<BlochPair> ext_pairs_;
  std::vector<Eigen::VectorXd> ext_velocities_;
  std::vector<CorrectionTerm> perp_;
  std::vector<CorrectionTerm> nonres_;
  // Solvability scalars: <chi_m, w_{m,j}> and kappa_table - kappa_convolution
  // per resonant quadruple.
  std::vector<std::vector<cdouble>> grad_defect_;            // [m][axis]
  std::vector<std::pair<std::array<int, 4>, cdouble>> cubic_defect_;
};

/// Spectral (zero-padding) interpolation from the macro grid to the fine
/// grid; boxes must coincide. Exact for band-limited fields.
std::vector<cdouble> interpolate_to_fine(const std::vector<cdouble>& coarse,
                                         const MacroGrid& macro,
                                         const FineGrid& fine);

}  // namespace blochwave
