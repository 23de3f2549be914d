// blochwave: Bloch bands, mode-system resonance certificates, four-wave
// amplitude dynamics, and the eps-scaled NLS convergence harness.

#include <CLI11.hpp>

#include <iostream>

#include "blochwave/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bloch-band four-wave mixing toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  int threads = 0;
  app.add_option("-c,--config", config_path, "experiment config (JSON)")
      ->required();
  app.add_option("-o,--output", output_dir, "output directory override");
  app.add_option("-t,--threads", threads, "worker threads override");

  auto* bands = app.add_subcommand("bands", "band structure along a k-path");
  auto* resonances =
      app.add_subcommand("resonances", "closure certificate and quadruples");
  auto* couplings = app.add_subcommand("couplings", "coupling constant table");
  auto* amplitudes =
      app.add_subcommand("amplitudes", "four-wave amplitude trajectory");
  auto* nls = app.add_subcommand("nls", "direct split-step NLS run");
  auto* convergence =
      app.add_subcommand("convergence", "eps-sweep error slope study");
  auto* scenario = app.add_subcommand("scenario", "preset pipelines");
  std::string scenario_name;
  scenario->add_option("name", scenario_name, "three_pulse | single_band | "
                                              "multi_band_single_k")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = blochwave::ExperimentConfig::from_file(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (threads > 0) config.threads = threads;

    if (bands->parsed()) return blochwave::runner::run_bands(config, std::cout);
    if (resonances->parsed()) {
      return blochwave::runner::run_resonances(config, std::cout);
    }
    if (couplings->parsed()) {
      return blochwave::runner::run_couplings(config, std::cout);
    }
    if (amplitudes->parsed()) {
      return blochwave::runner::run_amplitudes(config, std::cout);
    }
    if (nls->parsed()) return blochwave::runner::run_nls(config, std::cout);
    if (convergence->parsed()) {
      const auto rep = blochwave::runner::run_convergence(config, std::cout);
      return rep.pass ? 0 : 1;
    }
    if (scenario->parsed()) {
      return blochwave::runner::run_scenario(config, scenario_name, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
