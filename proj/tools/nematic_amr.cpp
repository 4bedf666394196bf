#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "nematic/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-element solver for electrically coupled liquid crystals "
               "with estimator-driven adaptive mesh refinement"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  std::string config_path;
  std::string mode, out_dir;
  int levels = -1;
  double nu = -1.0, zeta = -1.0;
  run->add_option("--config", config_path, "config file (flat key = value format)")
      ->required();
  run->add_option("--mode", mode, "refinement mode: uniform | amr");
  run->add_option("--levels", levels, "number of mesh levels (root counts as one)");
  run->add_option("--nu", nu, "Dorfler marking fraction in (0, 1]");
  run->add_option("--zeta", zeta, "unit-length penalty weight");
  run->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    nematic::ExperimentConfig cfg = nematic::load_config(config_path);
    if (!mode.empty()) nematic::apply_config_entry(cfg, "mode", mode);
    if (levels > 0) nematic::apply_config_entry(cfg, "levels", std::to_string(levels));
    if (nu > 0.0) nematic::apply_config_entry(cfg, "nu", nematic::format_double(nu));
    if (zeta > 0.0) nematic::apply_config_entry(cfg, "zeta", nematic::format_double(zeta));
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.solver.validate();
    cfg.params.validate();
    return nematic::run_experiment(cfg);
  } catch (const nematic::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
