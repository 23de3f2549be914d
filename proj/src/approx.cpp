#include "blochwave/approx.hpp"

#include <cmath>

namespace blochwave {

namespace {

// Microscopic profiles repeat over one lattice cell: the fine grid places
// p_cell points per cell exactly, so a profile needs evaluating only on the
// p_cell^d cell positions starting from x0/eps.
std::vector<cdouble> cell_table(const Eigen::VectorXcd& coeff,
                                const PlaneWaveBasis& basis,
                                const FineGrid& fine) {
  const int d = fine.dim();
  const int pc = fine.p_cell;
  long total = 1;
  for (int j = 0; j < d; ++j) total *= pc;

  const double prune =
      1e-16 * (coeff.size() ? coeff.cwiseAbs().maxCoeff() : 0.0);

  std::vector<cdouble> table(total, cdouble(0.0, 0.0));
  Eigen::VectorXd y(d);
  for (long c = 0; c < total; ++c) {
    long rem = c;
    for (int j = d - 1; j >= 0; --j) {
      const int cj = static_cast<int>(rem % pc);
      rem /= pc;
      const double zeta = fine.lattice.basis()(j, j);
      const double x0 = -0.5 * fine.box[j];
      y[j] = x0 * fine.q + cj * zeta / pc;
    }
    cdouble s(0.0, 0.0);
    for (int i = 0; i < coeff.size(); ++i) {
      if (std::abs(coeff[i]) <= prune) continue;
      const double phase = basis.gvec(i).dot(y);
      s += coeff[i] * cdouble(std::cos(phase), std::sin(phase));
    }
    table[c] = s;
  }
  return table;
}

long cell_index(const std::vector<int>& mi, int p_cell, int d) {
  long c = 0;
  for (int j = 0; j < d; ++j) c = c * p_cell + (mi[j] % p_cell);
  return c;
}

void check_grids(const ModeSystem& system, const MacroGrid& macro,
                 const FineGrid& fine) {
  if (macro.dim() != fine.dim()) {
    throw GridIncommensurate("macro/fine dimension mismatch");
  }
  for (int j = 0; j < fine.dim(); ++j) {
    if (std::abs(macro.length[j] - fine.box[j]) > 1e-12) {
      throw GridIncommensurate("macro and fine boxes differ on axis " +
                               std::to_string(j));
    }
    if (fine.npts[j] < macro.npts[j]) {
      throw GridIncommensurate("fine grid coarser than macro grid");
    }
  }
  if (fine.p_cell < 16) {
    throw GridIncommensurate("fine grid must resolve eps-cells with >= 16 "
                             "points per cell");
  }
  for (const auto& pair : system.pairs) {
    if (!fine.mode_commensurate(pair.k.k)) {
      throw GridIncommensurate("mode wavenumber k/eps is not a grid "
                               "wavenumber");
    }
  }
}

}  // namespace

Eigen::VectorXcd triple_product_coeffs(const BlochPair& p, const BlochPair& q,
                                       const BlochPair& r,
                                       const PlaneWaveBasis& target) {
  const int d = target.lattice().dim();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(target.size());
  const double pp = 1e-16 * p.coeff.cwiseAbs().maxCoeff();
  const double pq = 1e-16 * q.coeff.cwiseAbs().maxCoeff();
  const double pr = 1e-16 * r.coeff.cwiseAbs().maxCoeff();
  std::vector<int> idx(d);
  for (int i = 0; i < p.coeff.size(); ++i) {
    if (std::abs(p.coeff[i]) <= pp) continue;
    for (int j = 0; j < q.coeff.size(); ++j) {
      if (std::abs(q.coeff[j]) <= pq) continue;
      const cdouble cij = p.coeff[i] * std::conj(q.coeff[j]);
      for (int l = 0; l < r.coeff.size(); ++l) {
        if (std::abs(r.coeff[l]) <= pr) continue;
        for (int a = 0; a < d; ++a) {
          idx[a] = p.basis->index(i)[a] - q.basis->index(j)[a] +
                   r.basis->index(l)[a];
        }
        const auto pos = target.find(idx);
        if (!pos) {
          throw ResolutionTooLow(
              "triple product leaves the target plane-wave basis");
        }
        out[*pos] += cij * r.coeff[l];
      }
    }
  }
  return out;
}

TwoScaleAnsatz::TwoScaleAnsatz(const ModeSystem& system,
                               const CouplingTable& table, int order)
    : system_(&system), table_(table), order_(order) {
  if (order < 0 || order > 1) {
    throw Error("TwoScaleAnsatz: order must be 0 or 1");
  }
  if (order_ == 1) build_corrections();
}

void TwoScaleAnsatz::build_corrections() {
  const ModeSystem& sys = *system_;
  const Lattice& lat = sys.sigmas.lattice;
  const int M = sys.size();
  const int d = lat.dim();
  const double vol = lat.cell_volume();

  const int ext_index = 3 * sys.problem->basis().max_abs_index();
  ext_problem_ = std::make_shared<BlochProblem>(
      sys.problem->potential(), PlaneWaveBasis::index_range(lat, ext_index));

  for (int m = 0; m < M; ++m) {
    ext_pairs_.push_back(
        ext_problem_->solve_band(sys.pairs[m].k, sys.modes[m].band));
    ext_velocities_.push_back(group_velocity(ext_pairs_[m]));
  }
  const PlaneWaveBasis& ext = ext_problem_->basis();

  // Resonant corrections: A_perp_m = (E_m - H)^{-1} (1-P) F_{1,m} with
  //   F_{1,m} = - sum_j d_j a_m  [ i((k+g)_j - theta_j) chi ]_g
  //           + kappa sum_{(p,q,r)->m} a_p conj(a_q) a_r  chi_p conj(chi_q) chi_r
  // after eliminating dt a_m through the amplitude equation (the eliminated
  // part is parallel to chi and drops under 1-P). The sign is fixed by the
  // first-order cancellation L_0 A_1 = -(L_1 A_0 - kappa (cubic)); it is the
  // F of the general recursion, opposite to the first-order display.
  grad_defect_.assign(M, std::vector<cdouble>(d, cdouble(0.0, 0.0)));
  for (int m = 0; m < M; ++m) {
    const BlochPair& pair = ext_pairs_[m];
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXcd w(ext.size());
      for (int i = 0; i < ext.size(); ++i) {
        const double kg = pair.k.k[j] + ext.gvec(i)[j];
        w[i] = cdouble(0.0, kg - ext_velocities_[m][j]) * pair.coeff[i];
      }
      CorrectionTerm term;
      term.kind = CorrectionTerm::Factor::Gradient;
      term.mode = m;
      term.axis = j;
      term.sigma = sys.sigmas.points[m];
      term.profile = ext_problem_->deflated_solve(pair, Eigen::VectorXcd(-w));
      perp_.push_back(std::move(term));

      cdouble ip(0.0, 0.0);
      for (int i = 0; i < ext.size(); ++i) {
        ip += std::conj(pair.coeff[i]) * w[i];
      }
      grad_defect_[m][j] = vol * ip;
    }
  }
  for (const auto& quad : table_.quadruples) {
    const auto& [p, q, r, m] = quad;
    const Eigen::VectorXcd conv =
        triple_product_coeffs(ext_pairs_[p], ext_pairs_[q], ext_pairs_[r], ext);
    CorrectionTerm term;
    term.kind = CorrectionTerm::Factor::Triple;
    term.triple = {p, q, r};
    term.sigma = sys.sigmas.points[m];
    term.profile =
        ext_problem_->deflated_solve(ext_pairs_[m], table_.kappa * conv);
    perp_.push_back(std::move(term));

    cdouble ip(0.0, 0.0);
    for (int i = 0; i < ext.size(); ++i) {
      ip += std::conj(ext_pairs_[m].coeff[i]) * conv[i];
    }
    cubic_defect_.push_back({quad, table_.at(p, q, r, m) - table_.kappa * vol * ip});
  }

  // Non-resonant corrections: A_sigma = kappa (E - H(k))^{-1}
  // (chi_p conj(chi_q) chi_r) per ordered triple with sigma off G^(1).
  for (int p = 0; p < M; ++p) {
    for (int q = 0; q < M; ++q) {
      for (int r = 0; r < M; ++r) {
        const SigmaPoint sigma = sigma_of_tuple(sys.sigmas, {p, q, r});
        bool resonant = false;
        for (const auto& s : sys.sigmas.points) {
          if (same_sigma(sigma, s, sys.sigmas.tol)) {
            resonant = true;
            break;
          }
        }
        if (resonant) continue;
        const Eigen::VectorXcd conv = triple_product_coeffs(
            ext_pairs_[p], ext_pairs_[q], ext_pairs_[r], ext);
        CorrectionTerm term;
        term.kind = CorrectionTerm::Factor::Triple;
        term.triple = {p, q, r};
        term.sigma = sigma;
        term.profile = table_.kappa *
                       ext_problem_->resolvent_apply(sigma.k, sigma.energy, conv);
        nonres_.push_back(std::move(term));
      }
    }
  }
}

std::vector<cdouble> interpolate_to_fine(const std::vector<cdouble>& coarse,
                                         const MacroGrid& macro,
                                         const FineGrid& fine) {
  const int d = macro.dim();
  Fft fft_macro(macro.npts);
  Fft fft_fine(fine.npts);

  std::vector<cdouble> hat = coarse;
  fft_macro.forward(hat.data());

  std::vector<cdouble> out(fine.total(), cdouble(0.0, 0.0));
  const double scale = static_cast<double>(fine.total()) /
                       static_cast<double>(macro.total());
  const long nm = macro.total();
  for (long idx = 0; idx < nm; ++idx) {
    const auto mi = macro.unflatten(idx);
    long fidx = 0;
    for (int j = 0; j < d; ++j) {
      const int n = macro.npts[j];
      const int s = (mi[j] < (n + 1) / 2) ? mi[j] : mi[j] - n;  // signed bin
      const int f = (s >= 0) ? s : s + fine.npts[j];
      fidx = fidx * fine.npts[j] + f;
    }
    out[fidx] = hat[idx] * scale;
  }
  fft_fine.inverse(out.data());
  return out;
}

std::vector<cdouble> TwoScaleAnsatz::leading_order(const AmplitudeState& state,
                                                   const MacroGrid& macro,
                                                   const FineGrid& fine) const {
  const ModeSystem& sys = *system_;
  check_grids(sys, macro, fine);
  const int d = fine.dim();
  const long n = fine.total();
  const double inv_eps = static_cast<double>(fine.q);

  std::vector<std::vector<double>> axes;
  for (int j = 0; j < d; ++j) axes.push_back(fine.axis(j));

  std::vector<cdouble> u(n, cdouble(0.0, 0.0));
  for (int m = 0; m < sys.size(); ++m) {
    const auto amp = interpolate_to_fine(state.fields[m], macro, fine);
    const auto chi = cell_table(sys.pairs[m].coeff, *sys.pairs[m].basis, fine);
    const Eigen::VectorXd& k = sys.pairs[m].k.k;
    const double Et = sys.pairs[m].energy * state.t;
    for (long i = 0; i < n; ++i) {
      const auto mi = fine.unflatten(i);
      double kx = 0.0;
      for (int j = 0; j < d; ++j) kx += k[j] * axes[j][mi[j]];
      const double phase = (kx - Et) * inv_eps;
      u[i] += amp[i] * chi[cell_index(mi, fine.p_cell, d)] *
              cdouble(std::cos(phase), std::sin(phase));
    }
  }
  return u;
}

std::vector<cdouble> TwoScaleAnsatz::macro_factor(const CorrectionTerm& term,
                                                  const AmplitudeState& state,
                                                  const MacroGrid& macro,
                                                  const FineGrid& fine) const {
  if (term.kind == CorrectionTerm::Factor::Gradient) {
    // Spectral gradient on the macro grid, then spectral interpolation.
    Fft fft(macro.npts);
    std::vector<cdouble> g = state.fields[term.mode];
    fft.forward(g.data());
    const long nm = macro.total();
    for (long idx = 0; idx < nm; ++idx) {
      const auto mi = macro.unflatten(idx);
      g[idx] *= cdouble(0.0, macro.xi[term.axis][mi[term.axis]]);
    }
    fft.inverse(g.data());
    return interpolate_to_fine(g, macro, fine);
  }
  const auto ap = interpolate_to_fine(state.fields[term.triple[0]], macro, fine);
  const auto aq = interpolate_to_fine(state.fields[term.triple[1]], macro, fine);
  const auto ar = interpolate_to_fine(state.fields[term.triple[2]], macro, fine);
  std::vector<cdouble> out(ap.size());
  for (std::size_t i = 0; i < ap.size(); ++i) {
    out[i] = ap[i] * std::conj(aq[i]) * ar[i];
  }
  return out;
}

std::vector<cdouble> TwoScaleAnsatz::assemble(const AmplitudeState& state,
                                              const MacroGrid& macro,
                                              const FineGrid& fine) const {
  std::vector<cdouble> u = leading_order(state, macro, fine);
  if (order_ == 0) return u;

  const int d = fine.dim();
  const long n = fine.total();
  const double eps = fine.eps();
  const double inv_eps = static_cast<double>(fine.q);
  std::vector<std::vector<double>> axes;
  for (int j = 0; j < d; ++j) axes.push_back(fine.axis(j));

  auto add_terms = [&](const std::vector<CorrectionTerm>& terms) {
    for (const auto& term : terms) {
      const auto factor = macro_factor(term, state, macro, fine);
      const auto prof = cell_table(term.profile, ext_problem_->basis(), fine);
      const Eigen::VectorXd& k = term.sigma.k.k;
      const double Et = term.sigma.energy * state.t;
      for (long i = 0; i < n; ++i) {
        const auto mi = fine.unflatten(i);
        double kx = 0.0;
        for (int j = 0; j < d; ++j) kx += k[j] * axes[j][mi[j]];
        const double phase = (kx - Et) * inv_eps;
        u[i] += eps * factor[i] * prof[cell_index(mi, fine.p_cell, d)] *
                cdouble(std::cos(phase), std::sin(phase));
      }
    }
  };
  add_terms(perp_);
  add_terms(nonres_);
  return u;
}

double TwoScaleAnsatz::solvability_residual(const AmplitudeState& state,
                                            const AmplitudeSystem& asys) const {
  if (order_ != 1) throw Error("solvability check requires order 1");
  const ModeSystem& sys = *system_;
  const int M = sys.size();
  const int d = asys.grid().dim();
  const long n = asys.grid().total();
  const double w = asys.grid().point_weight();

  double worst = 0.0;
  for (int m = 0; m < M; ++m) {
    std::vector<cdouble> s(n, cdouble(0.0, 0.0));
    for (int j = 0; j < d; ++j) {
      const auto g = asys.gradient_axis(state.fields[m], j);
      const cdouble c = grad_defect_[m][j];
      for (long i = 0; i < n; ++i) s[i] += c * g[i];
    }
    for (const auto& [quad, defect] : cubic_defect_) {
      if (quad[3] != m) continue;
      const auto& ap = state.fields[quad[0]];
      const auto& aq = state.fields[quad[1]];
      const auto& ar = state.fields[quad[2]];
      for (long i = 0; i < n; ++i) {
        s[i] += defect * ap[i] * std::conj(aq[i]) * ar[i];
      }
    }
    double norm2 = 0.0;
    for (long i = 0; i < n; ++i) norm2 += std::norm(s[i]);
    worst = std::max(worst, std::sqrt(w * norm2));
  }
  return worst;
}

}  // namespace blochwave
