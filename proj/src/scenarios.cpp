#include "flockcert/scenarios.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace flockcert {

namespace {

VectorXd scalar(double x) { return VectorXd::Constant(1, x); }

SystemConfig make_config(int agents, int dim, double tau, const KernelSpec& kernel,
                         const GridSpec& grid) {
  SystemConfig cfg;
  cfg.agents = agents;
  cfg.dim = dim;
  cfg.tau = tau;
  cfg.steps_per_delay = grid.steps_per_delay;
  cfg.horizon = grid.horizon_delays * tau;
  cfg.kernel = kernel;
  cfg.validate();
  return cfg;
}

}  // namespace

Scenario scenario_example1(double tau, double epsilon, const GridSpec& grid,
                           std::optional<KernelSpec> kernel) {
  if (!(tau > 0.0)) throw std::invalid_argument("example1: tau must be positive");
  if (!(epsilon > 0.0 && epsilon < tau))
    throw std::invalid_argument("example1: epsilon must lie in (0, tau)");

  AgentHistory a{
      [=](double s) {
        if (s <= -epsilon) return scalar(s + tau);
        return scalar(tau - epsilon + (epsilon * epsilon - s * s) / (2.0 * epsilon));
      },
      [=](double s) { return scalar(s <= -epsilon ? 1.0 : -s / epsilon); }};
  AgentHistory b{
      [=](double s) {
        if (s <= -epsilon) return scalar(10.0);
        return scalar(10.0 + (s + epsilon) + (s * s - epsilon * epsilon) / (2.0 * epsilon));
      },
      [=](double s) { return scalar(s <= -epsilon ? 0.0 : 1.0 + s / epsilon); }};

  const KernelSpec k = kernel.value_or(KernelSpec::power_law(1.0, 1.0, 0.5));
  return {make_config(2, 1, tau, k, grid), HistorySet::from_functions(tau, 1, {a, b})};
}

Scenario scenario_example2(const GridSpec& grid) {
  AgentHistory a{[](double s) { return scalar(1.0 + (1.0 + s) * (1.0 + s)); },
                 [](double s) { return scalar(2.0 * (1.0 + s)); }};
  AgentHistory b{[](double s) { return scalar((1.0 + s) * (1.0 + s)); },
                 [](double s) { return scalar(2.0 * (1.0 + s)); }};
  return {make_config(2, 1, 1.0, KernelSpec::power_law(1.0, 1.0, 0.5), grid),
          HistorySet::from_functions(1.0, 1, {a, b})};
}

Scenario scenario_noflock(double tau, double beta, const GridSpec& grid) {
  if (!(tau > 0.0)) throw std::invalid_argument("noflock: tau must be positive");
  if (!(beta > 0.5)) throw std::invalid_argument("noflock: beta must exceed 1/2");
  const double offset = std::pow(tau, 1.0 / (2.0 * beta)) + 2.0 * tau +
                        std::pow(3.0 * std::pow(2.0, beta) / (2.0 * beta - 1.0),
                                 1.0 / (2.0 * beta - 1.0));
  AgentHistory a{[=](double s) { return scalar(s + offset); }, [](double) { return scalar(1.0); }};
  AgentHistory b{[](double s) { return scalar(-s); }, [](double) { return scalar(-1.0); }};
  return {make_config(2, 1, tau, KernelSpec::power_law(1.0, 1.0, beta), grid),
          HistorySet::from_functions(tau, 1, {a, b})};
}

Scenario scenario_random(const RandomScenarioSpec& spec, const GridSpec& grid) {
  if (spec.agents < 2 || spec.dim < 1) throw std::invalid_argument("random: need agents >= 2, dim >= 1");
  if (!(spec.position_spread >= 0.0) || !(spec.velocity_spread >= 0.0))
    throw std::invalid_argument("random: spreads must be non-negative");

  std::mt19937_64 rng(spec.seed);
  // Top 53 bits give a uniform double in [0, 1) on every platform.
  auto centered = [&rng](double side) {
    return (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * side;
  };
  std::vector<AgentHistory> agents;
  for (int a = 0; a < spec.agents; ++a) {
    VectorXd x(spec.dim);
    VectorXd v(spec.dim);
    for (int k = 0; k < spec.dim; ++k) x[k] = centered(spec.position_spread);
    for (int k = 0; k < spec.dim; ++k) v[k] = centered(spec.velocity_spread);
    agents.push_back({[x](double) { return x; }, [v](double) { return v; }});
  }
  return {make_config(spec.agents, spec.dim, spec.tau, spec.kernel, grid),
          HistorySet::from_functions(spec.tau, spec.dim, std::move(agents))};
}

}  // namespace flockcert
