#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flockcert/kernel.hpp"
#include "flockcert/model.hpp"
#include "flockcert/scenarios.hpp"

namespace flockcert {

/// Invalid or unreadable run configuration. The message names the offending
/// field (as a JSON pointer) or the line of a syntax error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  /// Emit every `stride`-th integration step.
  int stride = 1;
  /// Append x_<agent>_<k> and v_<agent>_<k> columns.
  bool per_agent = false;

  bool operator==(const OutputOptions&) const = default;
};

/// Scenario-specific parameters. Which fields may be present depends on the scenario name:
///   example1: epsilon
///   example2: none
///   noflock:  beta
///   random:   agents, dim, position_spread, velocity_spread
///   inline:   positions, velocities (per agent, per sample, per component)
struct ScenarioParameters {
  std::optional<double> epsilon;
  std::optional<double> beta;
  std::optional<int> agents;
  std::optional<int> dim;
  std::optional<double> position_spread;
  std::optional<double> velocity_spread;
  std::optional<std::vector<std::vector<std::vector<double>>>> positions;
  std::optional<std::vector<std::vector<std::vector<double>>>> velocities;

  bool operator==(const ScenarioParameters&) const = default;
};

/// In-memory form of a config file. Optional fields keep their absence so that
/// loading, serializing and reloading gives back the same value.
struct RunConfig {
  std::string scenario;
  ScenarioParameters parameters;
  std::optional<double> tau;
  std::optional<KernelSpec> kernel;
  int h_divisor = 64;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rng;
  OutputOptions output;
  std::optional<std::vector<double>> betas;

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json kernel_to_json(const KernelSpec& kernel);
KernelSpec kernel_from_json(const nlohmann::json& j, const std::string& where = "/kernel");

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Builds the scenario, with the kernel exponent replaced by `beta` when given.
/// Every failure surfaces as ConfigError.
Scenario build_scenario(const RunConfig& config, std::optional<double> beta = std::nullopt);

}  // namespace flockcert
