#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "blochwave/bloch.hpp"
#include "blochwave/lattice.hpp"

namespace blochwave {

/// A mode mu = (k, ell): wave vector (fractional coordinates) + band index.
struct Mode {
  Eigen::VectorXd k_frac;
  int band = 1;
};

/// Point of B x R produced by the Sigma map.
struct SigmaPoint {
  BzPoint k;
  double energy = 0.0;
};

struct Tolerances {
  double tol_k = 1e-9;  // fractional coordinates
  double tol_E = 1e-8;
};

/// Wrapped comparison of Sigma points under the given tolerances.
bool same_sigma(const SigmaPoint& a, const SigmaPoint& b, const Tolerances& tol);

/// The combinatorial view of a mode system: its Sigma points over a lattice.
/// Band-structure access is abstracted behind BandGraph so synthetic band
/// tables can drive the same machinery as the eigensolver.
struct SigmaSystem {
  Lattice lattice;
  std::vector<SigmaPoint> points;  // sigma_m = Sigma(mu_m), distinct
  Tolerances tol;
  int size() const { return static_cast<int>(points.size()); }
};

/// "Is (k,E) on the graph of all modes?" with a numerical band horizon.
class BandGraph {
 public:
  virtual ~BandGraph() = default;
  /// Smallest band index ell with |E - E_ell(k)| <= tol_E, or nullopt.
  virtual std::optional<int> match(const SigmaPoint& sigma,
                                   const Tolerances& tol) const = 0;
  /// Whether the group velocity exists at a matched graph point.
  virtual bool velocity_exists(const SigmaPoint& sigma, int band) const = 0;
};

/// Graph backed by the plane-wave eigensolver, truncated at L_max bands.
class BlochBandGraph : public BandGraph {
 public:
  BlochBandGraph(std::shared_ptr<const BlochProblem> problem, int L_max)
      : problem_(std::move(problem)), L_max_(L_max) {}
  std::optional<int> match(const SigmaPoint& sigma,
                           const Tolerances& tol) const override;
  bool velocity_exists(const SigmaPoint& sigma, int band) const override;
  int L_max() const { return L_max_; }

 private:
  std::shared_ptr<const BlochProblem> problem_;
  int L_max_;
};

/// Synthetic band table: an explicit finite (k,E) graph for testing the
/// combinatorics independently of the eigensolver.
class TableBandGraph : public BandGraph {
 public:
  struct Entry {
    SigmaPoint point;
    int band = 1;
    bool velocity_ok = true;
  };
  explicit TableBandGraph(std::vector<Entry> entries)
      : entries_(std::move(entries)) {}
  std::optional<int> match(const SigmaPoint& sigma,
                           const Tolerances& tol) const override;
  bool velocity_exists(const SigmaPoint& sigma, int band) const override;

 private:
  std::vector<Entry> entries_;
};

/// Alternating Sigma sum of an odd-length tuple of system indices
/// (0-based): k-part wrapped modulo Gamma*, E-part exact.
SigmaPoint sigma_of_tuple(const SigmaSystem& system,
                          const std::vector<int>& tuple);

struct GraphPoint {
  SigmaPoint sigma;
  long multiplicity = 0;
  std::vector<int> witness;  // one generating tuple
};

/// G_S^(Lambda) = Sigma(S^Lambda), deduplicated under the tolerances.
std::vector<GraphPoint> graph(const SigmaSystem& system, int lambda,
                              long budget = 10'000'000);

struct ClosureViolation {
  std::vector<int> tuple;
  SigmaPoint sigma;
  int matched_band = 0;
};

struct ClosureCertificate {
  int order = 0;
  bool closed = false;
  std::vector<ClosureViolation> violations;
  Tolerances tol;
  long tuples_checked = 0;
};

/// Closure of order Lambda: no point of G_S^(Lambda) lies on the band graph
/// outside G_S^(1).
ClosureCertificate closure_check(const SigmaSystem& system, int lambda,
                                 const BandGraph& model,
                                 long budget = 10'000'000);

/// All (p,q,r,m) in {0..M-1}^4 with k_p-k_q+k_r = k_m mod Gamma* and
/// E_p-E_q+E_r = E_m within the tolerances.
std::vector<std::array<int, 4>> resonant_quadruples(const SigmaSystem& system);

struct ResonanceTriple {
  Eigen::VectorXd k1_frac, k2_frac, k3_frac;
  double e_value = 0.0;   // 2 E(k1) - E(k2) - E(k3)
  bool flat_band = false; // band variation below 1e-12: any pair resonates
};

/// Search for a same-band four-wave triple via the sign change of
/// e(k1,k2) = 2 E(k1) - E(k2) - E(2 k1 - k2) along the segment from
/// (k_max,k_min) to (k_min,k_max). The band is given as a function of the
/// fractional wave vector (periodic); the BlochProblem overload wires in
/// the eigensolver.
ResonanceTriple single_band_resonance_search(
    const std::function<double(const Eigen::VectorXd&)>& band_energy,
    const Lattice& lattice, int scan_points = 257);
ResonanceTriple single_band_resonance_search(int band,
                                             const BlochProblem& problem,
                                             int scan_points = 257);

enum class WeakClosureVerdict {
  Ok,
  NotClosedOrder3,   // precondition
  ViolatedIV,        // a graph point was generated before being promoted
  ViolatedV,         // group velocity missing at a promoted graph point
  Budget,
};

struct WeakClosureResult {
  WeakClosureVerdict verdict = WeakClosureVerdict::Ok;
  /// G_1, G_3, ..., G_{2N+1} as constructed (greedy-minimal with one-stage
  /// lookahead promotion of graph points).
  std::vector<std::vector<SigmaPoint>> stages;
  std::optional<SigmaPoint> witness;
  int witness_stage = -1;
  bool ok() const { return verdict == WeakClosureVerdict::Ok; }
};

WeakClosureResult weak_closure_check(const SigmaSystem& system, int N,
                                     const BandGraph& model,
                                     long budget = 10'000'000);

/// Eigensolver-backed mode system: modes + solved Bloch pairs + velocities.
struct ModeSystem {
  std::shared_ptr<const BlochProblem> problem;
  std::vector<Mode> modes;
  std::vector<BlochPair> pairs;
  std::vector<Eigen::VectorXd> velocities;
  SigmaSystem sigmas;
  int size() const { return static_cast<int>(modes.size()); }
};

/// Solves all modes, computes group velocities, forms Sigma points.
/// Throws DegenerateBand for modes at band crossings and Error when two
/// Sigma points coincide under the tolerance.
ModeSystem make_mode_system(std::shared_ptr<const BlochProblem> problem,
                            const std::vector<Mode>& modes, Tolerances tol);

/// Default L_max rule: twice the largest band index in the system plus 4.
int default_graph_horizon(const std::vector<Mode>& modes);

}  // namespace blochwave
