#include "blochwave/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blochwave {

namespace {

double wrapped_frac_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double dist = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    dist = std::max(dist, std::abs(d - std::round(d)));
  }
  return dist;
}

// sigma arithmetic in (frac, E) coordinates
struct RawSigma {
  Eigen::VectorXd frac;
  double energy;
};

SigmaPoint finalize(const RawSigma& raw, const Lattice& lattice) {
  SigmaPoint s;
  s.k = wrap_fractional(raw.frac, lattice).point;
  s.energy = raw.energy;
  return s;
}

}  // namespace

bool same_sigma(const SigmaPoint& a, const SigmaPoint& b,
                const Tolerances& tol) {
  if (std::abs(a.energy - b.energy) > tol.tol_E) return false;
  return wrapped_frac_dist(a.k.frac, b.k.frac) <= tol.tol_k;
}

std::optional<int> BlochBandGraph::match(const SigmaPoint& sigma,
                                         const Tolerances& tol) const {
  const auto energies = problem_->band_energies(sigma.k, L_max_);
  for (int ell = 1; ell <= L_max_; ++ell) {
    if (std::abs(sigma.energy - energies[ell - 1]) <= tol.tol_E) return ell;
  }
  return std::nullopt;
}

bool BlochBandGraph::velocity_exists(const SigmaPoint& sigma, int band) const {
  try {
    (void)problem_->solve_band(sigma.k, band);
    return true;
  } catch (const DegenerateBand&) {
    return false;
  }
}

std::optional<int> TableBandGraph::match(const SigmaPoint& sigma,
                                         const Tolerances& tol) const {
  std::optional<int> best;
  for (const auto& e : entries_) {
    if (same_sigma(sigma, e.point, tol)) {
      if (!best || e.band < *best) best = e.band;
    }
  }
  return best;
}

bool TableBandGraph::velocity_exists(const SigmaPoint& sigma, int band) const {
  for (const auto& e : entries_) {
    if (e.band == band &&
        same_sigma(sigma, e.point, Tolerances{1e-9, 1e-9 * (1 + std::abs(sigma.energy))})) {
      return e.velocity_ok;
    }
  }
  return true;
}

SigmaPoint sigma_of_tuple(const SigmaSystem& system,
                          const std::vector<int>& tuple) {
  if (tuple.size() % 2 == 0 || tuple.empty()) {
    throw Error("sigma_of_tuple: tuple length must be odd");
  }
  RawSigma raw{Eigen::VectorXd::Zero(system.lattice.dim()), 0.0};
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    const SigmaPoint& s = system.points.at(tuple[i]);
    raw.frac += sign * s.k.frac;
    raw.energy += sign * s.energy;
  }
  return finalize(raw, system.lattice);
}

std::vector<GraphPoint> graph(const SigmaSystem& system, int lambda,
                              long budget) {
  if (lambda % 2 == 0 || lambda < 1) {
    throw Error("graph: Lambda must be odd and positive");
  }
  const int M = system.size();
  double count = 1.0;
  for (int i = 0; i < lambda; ++i) count *= M;
  if (count > static_cast<double>(budget)) {
    throw BudgetExceeded("graph enumeration needs " + std::to_string(count) +
                         " tuples, budget is " + std::to_string(budget));
  }

  std::vector<GraphPoint> out;
  std::vector<int> tuple(lambda, 0);
  const long total = static_cast<long>(count);
  for (long it = 0; it < total; ++it) {
    SigmaPoint s = sigma_of_tuple(system, tuple);
    bool found = false;
    for (auto& gp : out) {
      if (same_sigma(gp.sigma, s, system.tol)) {
        ++gp.multiplicity;
        found = true;
        break;
      }
    }
    if (!found) out.push_back(GraphPoint{s, 1, tuple});

    for (int pos = lambda - 1; pos >= 0; --pos) {
      if (++tuple[pos] < M) break;
      tuple[pos] = 0;
    }
  }
  return out;
}

ClosureCertificate closure_check(const SigmaSystem& system, int lambda,
                                 const BandGraph& model, long budget) {
  ClosureCertificate cert;
  cert.order = lambda;
  cert.tol = system.tol;

  const auto points = graph(system, lambda, budget);
  double count = 1.0;
  for (int i = 0; i < lambda; ++i) count *= system.size();
  cert.tuples_checked = static_cast<long>(count);

  for (const auto& gp : points) {
    const auto band = model.match(gp.sigma, system.tol);
    if (!band) continue;
    bool in_g1 = false;
    for (const auto& s : system.points) {
      if (same_sigma(gp.sigma, s, system.tol)) {
        in_g1 = true;
        break;
      }
    }
    if (!in_g1) {
      cert.violations.push_back(ClosureViolation{gp.witness, gp.sigma, *band});
    }
  }
  cert.closed = cert.violations.empty();
  return cert;
}

std::vector<std::array<int, 4>> resonant_quadruples(const SigmaSystem& system) {
  const int M = system.size();
  std::vector<std::array<int, 4>> out;
  for (int p = 0; p < M; ++p) {
    for (int q = 0; q < M; ++q) {
      for (int r = 0; r < M; ++r) {
        const SigmaPoint lhs = sigma_of_tuple(system, {p, q, r});
        for (int m = 0; m < M; ++m) {
          if (same_sigma(lhs, system.points[m], system.tol)) {
            out.push_back({p, q, r, m});
          }
        }
      }
    }
  }
  return out;
}

namespace {

using BandFn = std::function<double(const Eigen::VectorXd&)>;

// Golden-section refinement of an extremum of the band along one axis (d=1).
double refine_extremum_1d(const BandFn& energy, double flo, double fhi,
                          bool maximize) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto value = [&](double f) {
    Eigen::VectorXd v(1);
    v[0] = f;
    const double e = energy(v);
    return maximize ? e : -e;
  };
  double a = flo, b = fhi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = value(c), fd = value(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = value(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

ResonanceTriple single_band_resonance_search(const BandFn& band_energy,
                                             const Lattice& lat,
                                             int scan_points) {
  const int d = lat.dim();

  // Locate argmin/argmax of the band on a fractional grid.
  long total = 1;
  for (int i = 0; i < d; ++i) total *= scan_points;
  Eigen::VectorXd fmin(d), fmax(d);
  double emin = std::numeric_limits<double>::infinity();
  double emax = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd f(d);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (int i = d - 1; i >= 0; --i) {
      f[i] = -0.5 + static_cast<double>(rem % scan_points) / scan_points;
      rem /= scan_points;
    }
    const double e = band_energy(f);
    if (e < emin) {
      emin = e;
      fmin = f;
    }
    if (e > emax) {
      emax = e;
      fmax = f;
    }
  }

  ResonanceTriple out;
  if (emax - emin < 1e-12) {
    // Flat band: e(k1,k2) = 0 identically; return a canonical triple.
    out.flat_band = true;
    out.k1_frac = Eigen::VectorXd::Constant(d, 0.125);
    out.k2_frac = Eigen::VectorXd::Constant(d, -0.125);
    Eigen::VectorXd f3 = 2.0 * out.k1_frac - out.k2_frac;
    out.k3_frac = wrap_fractional(f3, lat).point.frac;
    out.e_value = 0.0;
    return out;
  }

  if (d == 1) {
    const double h = 1.0 / scan_points;
    fmin[0] = refine_extremum_1d(band_energy, fmin[0] - h, fmin[0] + h, false);
    fmax[0] = refine_extremum_1d(band_energy, fmax[0] - h, fmax[0] + h, true);
  }

  auto e_of = [&](const Eigen::VectorXd& f1, const Eigen::VectorXd& f2) {
    const Eigen::VectorXd f3 = 2.0 * f1 - f2;
    return 2.0 * band_energy(f1) - band_energy(f2) - band_energy(f3);
  };
  auto phi = [&](double s) {
    const Eigen::VectorXd f1 = (1.0 - s) * fmax + s * fmin;
    const Eigen::VectorXd f2 = (1.0 - s) * fmin + s * fmax;
    return e_of(f1, f2);
  };

  const double e0 = phi(0.0);
  const double e1 = phi(1.0);
  if (!(e0 > 0.0) || !(e1 < 0.0)) {
    throw SignSearchFailed("endpoint signs violate e(kmax,kmin) > 0 > "
                           "e(kmin,kmax): e0 = " + std::to_string(e0) +
                           ", e1 = " + std::to_string(e1));
  }

  // First strict sign change along the segment; the midpoint s = 1/2 is the
  // trivial root k1 = k2 and must be avoided.
  const int ns = 512;
  double lo = -1.0, hi = -1.0;
  double prev = e0;
  for (int j = 1; j <= ns; ++j) {
    const double s = static_cast<double>(j) / ns;
    const double val = phi(s);
    if (prev > 0.0 && val < 0.0) {
      lo = static_cast<double>(j - 1) / ns;
      hi = s;
      break;
    }
    prev = val;
  }
  if (lo < 0.0) {
    throw SignSearchFailed("no strict sign change of e along the segment");
  }

  double slo = lo, shi = hi;
  double s = 0.5 * (slo + shi), val = phi(s);
  for (int it = 0; it < 200 && std::abs(val) > 1e-10; ++it) {
    if (val > 0.0) {
      slo = s;
    } else {
      shi = s;
    }
    s = 0.5 * (slo + shi);
    val = phi(s);
  }
  if (std::abs(val) > 1e-10) {
    throw SignSearchFailed("bisection did not reach |e| <= 1e-10");
  }

  Eigen::VectorXd f1 = (1.0 - s) * fmax + s * fmin;
  Eigen::VectorXd f2 = (1.0 - s) * fmin + s * fmax;
  out.k1_frac = wrap_fractional(f1, lat).point.frac;
  out.k2_frac = wrap_fractional(f2, lat).point.frac;
  out.k3_frac = wrap_fractional(2.0 * f1 - f2, lat).point.frac;
  out.e_value = val;
  if (wrapped_frac_dist(out.k1_frac, out.k2_frac) < 1e-8) {
    throw SignSearchFailed("search converged to the trivial root k1 = k2");
  }
  return out;
}

ResonanceTriple single_band_resonance_search(int band,
                                             const BlochProblem& problem,
                                             int scan_points) {
  const Lattice& lat = problem.potential().lattice();
  auto energy = [&problem, band, &lat](const Eigen::VectorXd& frac) {
    return problem.band_energies(bz_point(frac, lat), band).back();
  };
  return single_band_resonance_search(energy, lat, scan_points);
}

namespace {

bool contains_sigma(const std::vector<SigmaPoint>& set, const SigmaPoint& s,
                    const Tolerances& tol) {
  for (const auto& p : set) {
    if (same_sigma(p, s, tol)) return true;
  }
  return false;
}

// Associated set of Eq-style combinations G_{2n1+1} - G_{2n2+1} + G_{2n3+1}
// over n1+n2+n3 = n-1, deduplicated.
std::vector<SigmaPoint> associated_set(
    const std::vector<std::vector<SigmaPoint>>& stages, int n,
    const Lattice& lattice, const Tolerances& tol, long budget) {
  std::vector<SigmaPoint> out;
  long work = 0;
  for (int n1 = 0; n1 <= n - 1; ++n1) {
    for (int n2 = 0; n2 + n1 <= n - 1; ++n2) {
      const int n3 = n - 1 - n1 - n2;
      const auto& A = stages[n1];
      const auto& B = stages[n2];
      const auto& C = stages[n3];
      work += static_cast<long>(A.size()) * B.size() * C.size();
      if (work > budget) {
        throw BudgetExceeded("weak-closure associated-set enumeration "
                             "exceeded budget");
      }
      for (const auto& a : A) {
        for (const auto& b : B) {
          for (const auto& c : C) {
            RawSigma raw{a.k.frac - b.k.frac + c.k.frac,
                         a.energy - b.energy + c.energy};
            SigmaPoint s = finalize(raw, lattice);
            if (!contains_sigma(out, s, tol)) out.push_back(s);
          }
        }
      }
    }
  }
  return out;
}

}  // namespace

WeakClosureResult weak_closure_check(const SigmaSystem& system, int N,
                                     const BandGraph& model, long budget) {
  WeakClosureResult res;
  if (N < 1) throw Error("weak_closure_check: N must be >= 1");

  const auto cert3 = closure_check(system, 3, model, budget);
  if (!cert3.closed) {
    res.verdict = WeakClosureVerdict::NotClosedOrder3;
    res.witness = cert3.violations.front().sigma;
    res.witness_stage = 1;
    return res;
  }

  auto& stages = res.stages;
  stages.push_back(system.points);  // G_1

  constexpr std::size_t kSizeBudget = 20000;
  constexpr int kPromoteIters = 64;

  for (int n = 1; n <= N; ++n) {
    auto gen = associated_set(stages, n, system.lattice, system.tol, budget);

    // Condition (iv): a graph point generated at this stage must already be
    // an ansatz mode of the previous stage.
    for (const auto& s : gen) {
      if (model.match(s, system.tol) &&
          !contains_sigma(stages[n - 1], s, system.tol)) {
        res.verdict = WeakClosureVerdict::ViolatedIV;
        res.witness = s;
        res.witness_stage = n;
        return res;
      }
    }

    std::vector<SigmaPoint> stage = stages[n - 1];
    for (const auto& s : gen) {
      if (!contains_sigma(stage, s, system.tol)) stage.push_back(s);
    }
    stages.push_back(std::move(stage));

    if (n == N) break;

    // One-stage lookahead: promote graph points that the nonlinearity will
    // generate at stage n+1, so they enter with a free coefficient first.
    // A diverging promotion cascade means no finite greedy sequence exists.
    bool stable = false;
    for (int it = 0; it < kPromoteIters; ++it) {
      auto next = associated_set(stages, n + 1, system.lattice, system.tol,
                                 budget);
      std::vector<SigmaPoint> promo;
      for (const auto& s : next) {
        if (model.match(s, system.tol) &&
            !contains_sigma(stages[n], s, system.tol)) {
          promo.push_back(s);
        }
      }
      if (promo.empty()) {
        stable = true;
        break;
      }
      for (auto& s : promo) stages[n].push_back(s);
      if (stages[n].size() > kSizeBudget) break;
    }
    if (!stable) {
      res.verdict = WeakClosureVerdict::ViolatedIV;
      res.witness = stages[n].back();
      res.witness_stage = n + 1;
      return res;
    }
  }

  // Condition (v): group velocities exist at all graph points of the final
  // stage.
  for (const auto& s : stages.back()) {
    const auto band = model.match(s, system.tol);
    if (band && !model.velocity_exists(s, *band)) {
      res.verdict = WeakClosureVerdict::ViolatedV;
      res.witness = s;
      res.witness_stage = N;
      return res;
    }
  }
  res.verdict = WeakClosureVerdict::Ok;
  return res;
}

ModeSystem make_mode_system(std::shared_ptr<const BlochProblem> problem,
                            const std::vector<Mode>& modes, Tolerances tol) {
  ModeSystem sys;
  sys.problem = problem;
  sys.modes = modes;
  sys.sigmas.lattice = problem->potential().lattice();
  sys.sigmas.tol = tol;
  for (const auto& m : modes) {
    const BzPoint k = bz_point(m.k_frac, sys.sigmas.lattice);
    BlochPair pair = problem->solve_band(k, m.band);
    sys.velocities.push_back(group_velocity(pair, problem->degeneracy_tol));
    sys.sigmas.points.push_back(SigmaPoint{pair.k, pair.energy});
    sys.pairs.push_back(std::move(pair));
  }
  for (std::size_t i = 0; i < sys.sigmas.points.size(); ++i) {
    for (std::size_t j = i + 1; j < sys.sigmas.points.size(); ++j) {
      if (same_sigma(sys.sigmas.points[i], sys.sigmas.points[j], tol)) {
        throw Error("mode system: Sigma points of modes " + std::to_string(i) +
                    " and " + std::to_string(j) +
                    " coincide under the tolerance");
      }
    }
  }
  return sys;
}

int default_graph_horizon(const std::vector<Mode>& modes) {
  int max_band = 1;
  for (const auto& m : modes) max_band = std::max(max_band, m.band);
  return 2 * max_band + 4;
}

}  // namespace blochwave
