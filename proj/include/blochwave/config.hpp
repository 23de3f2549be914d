#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "blochwave/modes.hpp"

namespace blochwave {

/// One initial pulse: gaussian(center, width, amplitude, phase_k) or raw
/// samples from a binary file.
struct PulseSpec {
  enum class Kind { Gaussian, File, Zero } kind = Kind::Zero;
  Eigen::VectorXd center;
  double width = 1.0;
  double amplitude = 1.0;
  double phase = 0.0;  // constant phase angle of the amplitude
  Eigen::VectorXd phase_k;
  std::string file;
};

/// Structured experiment configuration (JSON with explicit keys; no
/// positional arguments beyond the subcommand).
struct ExperimentConfig {
  Eigen::MatrixXd lattice_basis;  // d x d, row-major in the file

  std::vector<std::pair<std::vector<int>, cdouble>> potential_coeffs;
  std::vector<std::pair<std::vector<int>, double>> potential_cos;

  int cutoff_index = 8;   // plane-wave basis: index hypercube [-c,c]^d
  int band_count = 4;     // bands subcommand
  int kpath_points = 129;

  std::vector<Mode> modes;
  bool search = false;  // single-band resonance search builds the modes
  int search_band = 1;

  double kappa = 1.0;
  Tolerances tol;           // tol_E interpreted as 1e-8-style absolute value
  int graph_horizon = 0;    // L_max; 0 = 2*max band + 4
  int closure_order = 3;
  int weak_closure_N = 0;   // 0 = skip weak-closure check

  std::vector<double> macro_length;
  std::vector<int> macro_npts;
  std::vector<int> fine_box;
  int p_cell = 16;
  std::vector<int> eps_q;  // eps = 1/q, strictly increasing q

  double t_star = 0.5;
  double t_final = 1.0;       // amplitudes subcommand horizon
  double dt_amplitude = 1e-3;
  double ct_nls = 0.05;       // dt = ct * eps * min(1, 1/||V||)
  double dt_nls = 0.0;        // explicit step override (0 = use the ct rule)
  double norm_s = 1.0;
  int ansatz_order = 1;
  int checkpoint_stride = 0;

  std::vector<PulseSpec> initial;

  std::string output_dir = "out";
  int threads = 1;
  double slope_window_lo = 0.75;
  double slope_window_hi = 1.25;

  Lattice lattice() const;
  PotentialSpec potential() const;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

}  // namespace blochwave
