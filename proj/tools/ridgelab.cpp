// Command-line front end: ridgelab <kind> --config <path> [options]

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "ridgelab/experiments.hpp"
#include "ridgelab/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Expected-risk experiments for ridge regression"};
  std::string kind, config_path, out_dir, data_dir;
  std::uint64_t seed = 0;
  int trials = 0;
  std::size_t threads = 0;
  bool synthetic = false, as_json = false;

  std::string kinds;
  for (const auto& k : ridgelab::experiment_kinds()) kinds += (kinds.empty() ? "" : ", ") + k;
  app.add_option("kind", kind, "Experiment kind: " + kinds)->required();
  app.add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  auto* trials_opt = app.add_option("--trials", trials, "Override the config trial count")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--data", data_dir, "MNIST-family IDX directory for the relu kinds");
  app.add_flag("--synthetic", synthetic, "Use the built-in Gaussian-mixture dataset for the relu kinds");
  app.add_flag("--json", as_json, "Print the summary as JSON");
  app.add_option("--threads", threads, "Worker threads (default: hardware concurrency)");
  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) ridgelab::set_worker_count(threads);
    ridgelab::ExperimentConfig config = ridgelab::load_config(config_path, kind);
    if (*seed_opt) config.seed = seed;
    if (*trials_opt) config.trials = trials;
    if (!out_dir.empty()) config.output = out_dir;
    if (!data_dir.empty()) config.dataset_dir = data_dir;
    if (synthetic) config.synthetic = true;
    const ridgelab::RunResult result = ridgelab::run_experiment(config);
    if (as_json) {
      std::cout << result.summary.dump(2) << '\n';
    } else {
      std::cout << result.text;
      for (const auto& f : result.csv_files) std::cout << "wrote " << f.string() << '\n';
      for (const auto& f : result.svg_files) std::cout << "wrote " << f.string() << '\n';
    }
  } catch (const ridgelab::ConfigError& e) {
    std::cerr << "ridgelab: invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ridgelab: " << e.what() << '\n';
    return 1;
  }
  return EXIT_SUCCESS;
}
