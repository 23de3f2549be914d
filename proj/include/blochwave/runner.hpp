#pragma once

#include <iosfwd>
#include <memory>

#include "blochwave/approx.hpp"
#include "blochwave/config.hpp"

namespace blochwave::runner {

/// The experiment objects shared by the subcommands: spectral problem, mode
/// system with closure certificate, coupling table, and (for the dynamic
/// stages) the macroscopic integrator and initial state.
struct Pipeline {
  Lattice lattice;
  PotentialSpec pot;
  std::shared_ptr<BlochProblem> problem;
  ModeSystem system;
  int graph_horizon = 0;
  ClosureCertificate certificate;
  std::string certificate_hash;
  CouplingTable table;
  // dynamics (present when the config carries a macro grid)
  std::unique_ptr<MacroGrid> macro;
  std::unique_ptr<AmplitudeSystem> amplitude;
  std::unique_ptr<AmplitudeState> initial;
};

Pipeline build_pipeline(const ExperimentConfig& config, bool need_dynamics);

struct ConvergenceReport {
  std::vector<double> eps;
  std::vector<double> errors;  // ||u_eps(t*) - u_{N-1}(t*)||_{H^s_eps}
  double slope = 0.0;
  double fit_residual = 0.0;
  bool pass = false;
  std::string certificate_hash;
  nlohmann::json json;  // full report as written to disk
};

int run_bands(const ExperimentConfig& config, std::ostream& log);
int run_resonances(const ExperimentConfig& config, std::ostream& log);
int run_couplings(const ExperimentConfig& config, std::ostream& log);
int run_amplitudes(const ExperimentConfig& config, std::ostream& log);
int run_nls(const ExperimentConfig& config, std::ostream& log);
ConvergenceReport run_convergence(const ExperimentConfig& config,
                                  std::ostream& log);
int run_scenario(const ExperimentConfig& config, const std::string& name,
                 std::ostream& log);

/// Least-squares slope of log(err) against log(eps); residual is the RMS
/// misfit in log space.
void fit_loglog(const std::vector<double>& eps,
                const std::vector<double>& errors, double* slope,
                double* residual);

}  // namespace blochwave::runner
