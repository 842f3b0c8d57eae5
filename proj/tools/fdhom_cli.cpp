#include "fdhom/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Free-discontinuity homogenisation experiments"};
  app.set_version_flag("--version", fdhom::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed_override = 0;

  const char* names[] = {"check", "cell-solve", "homogenize", "stochastic", "gamma"};
  const char* about[] = {"admissibility checks of the configured integrands", "one cell problem",
                         "cell-formula sweeps with extrapolation", "ergodic Monte-Carlo study",
                         "minima convergence along epsilon"};
  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> seed_options;
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], about[i]);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: $FDHOM_OUT_DIR or .)");
    sub->add_option("--workers", workers, "worker threads (0: machine parallelism)")->check(CLI::NonNegativeNumber);
    seed_options.push_back(sub->add_option("--seed-override", seed_override, "replace the config seed"));
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  std::string command;
  bool seed_given = false;
  for (int i = 0; i < 5; ++i) {
    if (subs[i]->parsed()) {
      command = names[i];
      seed_given = seed_options[i]->count() > 0;
    }
  }

  try {
    const fdhom::ExperimentConfig config = fdhom::load_config(config_path);
    if (config.experiment != command)
      throw fdhom::ConfigError("$.experiment: config is for '" + config.experiment + "', not '" + command + "'");
    fdhom::RunOptions options;
    if (!out_dir.empty())
      options.out_dir = out_dir;
    else if (const char* env = std::getenv("FDHOM_OUT_DIR"))
      options.out_dir = env;
    options.workers = workers;
    if (seed_given) options.seed_override = seed_override;
    const fdhom::RunResult result = fdhom::run(config, options, std::cout);
    for (const auto& path : result.artifacts) std::cout << "wrote " << path << "\n";
    return result.status;
  } catch (const fdhom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
