#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace ridgelab {

/// Invalid configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::invalid_argument("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

const std::vector<std::string>& experiment_kinds();

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 1;
  int trials = 1000;
  std::vector<double> lambda_grid;
  std::vector<int> n_grid;
  std::vector<int> d_grid;
  /// Kind-specific parameters, kept as parsed JSON.
  nlohmann::json problem = nlohmann::json::object();
  std::filesystem::path output = "out";
  bool synthetic = false;
  std::filesystem::path dataset_dir;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

/// Validates and fills defaults. `kind` overrides (and must agree with) the
/// config's own "kind" entry when both are present.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& kind = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& kind = {});

struct RunResult {
  std::vector<std::filesystem::path> csv_files;
  std::vector<std::filesystem::path> svg_files;
  nlohmann::json summary;
  std::string text;  // human-readable summary
};

RunResult run_experiment(const ExperimentConfig& config);

}  // namespace ridgelab
