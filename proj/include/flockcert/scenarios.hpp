#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "flockcert/kernel.hpp"
#include "flockcert/model.hpp"

namespace flockcert {

/// Name of the generator behind `scenario_random`, recorded in serialized configs.
inline constexpr const char* kRandomGenerator = "mt19937_64";

/// Integration grid shared by the scenario builders.
struct GridSpec {
  int steps_per_delay = 64;
  /// Horizon in units of tau.
  double horizon_delays = 30.0;
};

struct Scenario {
  SystemConfig config;
  HistorySet history;
};

/// Two agents in 1-D whose velocity histories swap through a ramp of width epsilon.
/// Positions are anchored at x_a(-tau) = 0, x_b(-tau) = 10 and integrate the velocities.
Scenario scenario_example1(double tau, double epsilon, const GridSpec& grid = {64, 5.0},
                           std::optional<KernelSpec> kernel = std::nullopt);

/// Two agents in 1-D with equal velocity histories 2(1 + s), tau = 1, psi = 1 / sqrt(1 + r^2).
Scenario scenario_example2(const GridSpec& grid = {64, 20.0});

/// Two agents moving apart with unit speed under psi = (1 + r^2)^(-beta), beta > 1/2.
Scenario scenario_noflock(double tau, double beta, const GridSpec& grid = {64, 50.0});

struct RandomScenarioSpec {
  std::uint64_t seed = 42;
  int agents = 5;
  int dim = 2;
  double tau = 1.0;
  KernelSpec kernel = KernelSpec::power_law(1.0, 1.0, 0.4);
  double position_spread = 10.0;
  double velocity_spread = 2.0;
};

/// Constant histories drawn uniformly from centered cubes with the given side lengths.
Scenario scenario_random(const RandomScenarioSpec& spec, const GridSpec& grid = {64, 30.0});

}  // namespace flockcert
