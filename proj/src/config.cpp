#include "blochwave/config.hpp"

#include <fstream>

namespace blochwave {

namespace {

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

std::vector<double> vec_to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

Lattice ExperimentConfig::lattice() const {
  return Lattice::from_basis(lattice_basis);
}

PotentialSpec ExperimentConfig::potential() const {
  PotentialSpec pot = PotentialSpec::from_coefficients(lattice(), potential_coeffs);
  for (const auto& [idx, v] : potential_cos) pot.add_cosine(idx, v);
  return pot;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.contains("lattice") || !j["lattice"].contains("basis")) {
    throw ConfigError("config requires lattice.basis");
  }
  const auto& rows = j["lattice"]["basis"];
  const int d = static_cast<int>(rows.size());
  c.lattice_basis.resize(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(rows[i].size()) != d) {
      throw ConfigError("lattice.basis must be a d x d row-major array");
    }
    for (int k = 0; k < d; ++k) c.lattice_basis(i, k) = rows[i][k].get<double>();
  }

  if (j.contains("potential")) {
    const auto& p = j["potential"];
    for (const auto& e : p.value("coefficients", nlohmann::json::array())) {
      std::vector<int> idx = e.at("index").get<std::vector<int>>();
      c.potential_coeffs.emplace_back(
          idx, cdouble(e.value("re", 0.0), e.value("im", 0.0)));
    }
    for (const auto& e : p.value("cos", nlohmann::json::array())) {
      c.potential_cos.emplace_back(e.at("index").get<std::vector<int>>(),
                                   e.at("v").get<double>());
    }
  }

  c.cutoff_index = j.value("cutoff_index", c.cutoff_index);
  c.band_count = j.value("band_count", c.band_count);
  c.kpath_points = j.value("kpath_points", c.kpath_points);

  for (const auto& e : j.value("modes", nlohmann::json::array())) {
    Mode m;
    m.k_frac = vec_from_json(e.at("k_frac"));
    m.band = e.at("band").get<int>();
    c.modes.push_back(std::move(m));
  }
  if (j.contains("search")) {
    c.search = true;
    c.search_band = j["search"].value("band", 1);
  }

  c.kappa = j.value("kappa", c.kappa);
  if (j.contains("tolerances")) {
    c.tol.tol_k = j["tolerances"].value("tol_k", c.tol.tol_k);
    c.tol.tol_E = j["tolerances"].value("tol_E", c.tol.tol_E);
  }
  c.graph_horizon = j.value("graph_horizon", c.graph_horizon);
  c.closure_order = j.value("closure_order", c.closure_order);
  c.weak_closure_N = j.value("weak_closure_N", c.weak_closure_N);

  if (j.contains("macro")) {
    c.macro_length = j["macro"].at("length").get<std::vector<double>>();
    c.macro_npts = j["macro"].at("npts").get<std::vector<int>>();
  }
  if (j.contains("fine")) {
    c.fine_box = j["fine"].at("box").get<std::vector<int>>();
    c.p_cell = j["fine"].value("p_cell", c.p_cell);
  }
  c.eps_q = j.value("eps_q", c.eps_q);
  for (std::size_t i = 1; i < c.eps_q.size(); ++i) {
    if (c.eps_q[i] <= c.eps_q[i - 1]) {
      throw ConfigError("eps_q must be strictly increasing (eps decreasing)");
    }
  }

  if (j.contains("time")) {
    const auto& t = j["time"];
    c.t_star = t.value("t_star", c.t_star);
    c.t_final = t.value("t_final", c.t_final);
    c.dt_amplitude = t.value("dt_amplitude", c.dt_amplitude);
    c.ct_nls = t.value("ct_nls", c.ct_nls);
    c.dt_nls = t.value("dt_nls", c.dt_nls);
  }
  c.norm_s = j.value("norm_s", c.norm_s);
  c.ansatz_order = j.value("ansatz_order", c.ansatz_order);
  c.checkpoint_stride = j.value("checkpoint_stride", c.checkpoint_stride);

  for (const auto& e : j.value("initial", nlohmann::json::array())) {
    PulseSpec p;
    const std::string kind = e.value("type", "zero");
    if (kind == "gaussian") {
      p.kind = PulseSpec::Kind::Gaussian;
      p.center = vec_from_json(e.at("center"));
      p.width = e.at("width").get<double>();
      p.amplitude = e.value("amplitude", 1.0);
      p.phase = e.value("phase", 0.0);
      p.phase_k = e.contains("phase_k") ? vec_from_json(e["phase_k"])
                                        : Eigen::VectorXd::Zero(p.center.size());
    } else if (kind == "file") {
      p.kind = PulseSpec::Kind::File;
      p.file = e.at("path").get<std::string>();
    } else if (kind == "zero") {
      p.kind = PulseSpec::Kind::Zero;
    } else {
      throw ConfigError("unknown initial pulse type: " + kind);
    }
    c.initial.push_back(std::move(p));
  }

  c.output_dir = j.value("output", c.output_dir);
  c.threads = j.value("threads", c.threads);
  if (j.contains("slope_window")) {
    c.slope_window_lo = j["slope_window"][0].get<double>();
    c.slope_window_hi = j["slope_window"][1].get<double>();
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  nlohmann::json basis = nlohmann::json::array();
  for (int i = 0; i < lattice_basis.rows(); ++i) {
    basis.push_back(vec_to_std(lattice_basis.row(i)));
  }
  j["lattice"]["basis"] = basis;
  for (const auto& [idx, v] : potential_coeffs) {
    j["potential"]["coefficients"].push_back(
        {{"index", idx}, {"re", v.real()}, {"im", v.imag()}});
  }
  for (const auto& [idx, v] : potential_cos) {
    j["potential"]["cos"].push_back({{"index", idx}, {"v", v}});
  }
  j["cutoff_index"] = cutoff_index;
  j["kappa"] = kappa;
  j["tolerances"] = {{"tol_k", tol.tol_k}, {"tol_E", tol.tol_E}};
  for (const auto& m : modes) {
    j["modes"].push_back({{"k_frac", vec_to_std(m.k_frac)}, {"band", m.band}});
  }
  j["eps_q"] = eps_q;
  j["time"] = {{"t_star", t_star},
               {"t_final", t_final},
               {"dt_amplitude", dt_amplitude},
               {"ct_nls", ct_nls}};
  j["norm_s"] = norm_s;
  j["ansatz_order"] = ansatz_order;
  j["threads"] = threads;
  return j;
}

}  // namespace blochwave
