#include "flockcert/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace flockcert {

using nlohmann::json;

namespace {

const std::set<std::string> kScenarios = {"example1", "example2", "noflock", "random", "inline"};

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError(where + "/" + item.key() + ": unknown key");
  }
}

double read_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
  return x;
}

int read_int(const json& j, const std::string& where) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (x == std::floor(x) && std::abs(x) < 1e9) return static_cast<int>(x);
    throw ConfigError(where + ": expected an integer, got " + j.dump());
  }
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  const auto x = j.get<std::int64_t>();
  if (x < -1000000000 || x > 1000000000) throw ConfigError(where + ": integer out of range");
  return static_cast<int>(x);
}

std::vector<double> read_numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(read_number(j[i], where + "/" + std::to_string(i)));
  return out;
}

std::vector<std::vector<std::vector<double>>> read_samples(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array per agent");
  std::vector<std::vector<std::vector<double>>> out;
  for (std::size_t a = 0; a < j.size(); ++a) {
    const std::string agent = where + "/" + std::to_string(a);
    if (!j[a].is_array()) throw ConfigError(agent + ": expected an array of samples");
    std::vector<std::vector<double>> rows;
    for (std::size_t s = 0; s < j[a].size(); ++s) {
      rows.push_back(read_numbers(j[a][s], agent + "/" + std::to_string(s)));
    }
    out.push_back(std::move(rows));
  }
  return out;
}

HistorySamples to_history_samples(const std::vector<std::vector<std::vector<double>>>& xs,
                                  const std::vector<std::vector<std::vector<double>>>& vs) {
  if (xs.size() != vs.size())
    throw ConfigError("/parameters/velocities: must list as many agents as positions");
  const std::size_t count = xs.front().size();
  if (count < 2) throw ConfigError("/parameters/positions/0: need at least 2 samples on [-tau, 0]");
  const std::size_t dim = xs.front().front().size();
  if (dim < 1) throw ConfigError("/parameters/positions/0/0: need at least one component");

  HistorySamples out;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    for (const auto* channel : {&xs, &vs}) {
      const std::string name = channel == &xs ? "positions" : "velocities";
      const auto& rows = (*channel)[a];
      if (rows.size() != count)
        throw ConfigError("/parameters/" + name + "/" + std::to_string(a) + ": expected " +
                          std::to_string(count) + " samples");
      AgentMatrix m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
      for (std::size_t s = 0; s < count; ++s) {
        if (rows[s].size() != dim)
          throw ConfigError("/parameters/" + name + "/" + std::to_string(a) + "/" + std::to_string(s) +
                            ": expected " + std::to_string(dim) + " components");
        for (std::size_t k = 0; k < dim; ++k) m(s, k) = rows[s][k];
      }
      (channel == &xs ? out.positions : out.velocities).push_back(std::move(m));
    }
  }
  return out;
}

double default_horizon_delays(const std::string& scenario) {
  if (scenario == "example1") return 5.0;
  if (scenario == "example2") return 20.0;
  if (scenario == "noflock") return 50.0;
  return 30.0;
}

const std::set<std::string>& allowed_parameters(const std::string& scenario) {
  static const std::map<std::string, std::set<std::string>> table = {
      {"example1", {"epsilon"}},
      {"example2", {}},
      {"noflock", {"beta"}},
      {"random", {"agents", "dim", "position_spread", "velocity_spread"}},
      {"inline", {"positions", "velocities"}},
  };
  return table.at(scenario);
}

}  // namespace

json kernel_to_json(const KernelSpec& kernel) {
  if (kernel.is_power_law()) {
    const auto& p = kernel.as_power_law();
    return {{"type", "power_law"}, {"amplitude", p.amplitude}, {"sigma", p.sigma}, {"beta", p.beta}};
  }
  const auto& t = kernel.as_tabulated();
  return {{"type", "tabulated"}, {"radii", t.radii}, {"values", t.values}, {"lipschitz", t.lipschitz}};
}

KernelSpec kernel_from_json(const json& j, const std::string& where) {
  require_object(j, where);
  if (!j.contains("type") || !j["type"].is_string())
    throw ConfigError(where + "/type: expected \"power_law\" or \"tabulated\"");
  const std::string type = j["type"].get<std::string>();
  try {
    if (type == "power_law") {
      reject_unknown(j, where, {"type", "amplitude", "sigma", "beta"});
      const double amplitude = j.contains("amplitude") ? read_number(j["amplitude"], where + "/amplitude") : 1.0;
      const double sigma = j.contains("sigma") ? read_number(j["sigma"], where + "/sigma") : 1.0;
      if (!j.contains("beta")) throw ConfigError(where + "/beta: required");
      return KernelSpec::power_law(amplitude, sigma, read_number(j["beta"], where + "/beta"));
    }
    if (type == "tabulated") {
      reject_unknown(j, where, {"type", "radii", "values", "lipschitz"});
      for (const char* key : {"radii", "values", "lipschitz"}) {
        if (!j.contains(key)) throw ConfigError(where + "/" + key + ": required");
      }
      return KernelSpec::tabulated(read_numbers(j["radii"], where + "/radii"),
                                   read_numbers(j["values"], where + "/values"),
                                   read_number(j["lipschitz"], where + "/lipschitz"));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + "/type: unknown kernel type \"" + type + "\"");
}

json to_json(const RunConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  json p = json::object();
  const auto& q = c.parameters;
  if (q.epsilon) p["epsilon"] = *q.epsilon;
  if (q.beta) p["beta"] = *q.beta;
  if (q.agents) p["agents"] = *q.agents;
  if (q.dim) p["dim"] = *q.dim;
  if (q.position_spread) p["position_spread"] = *q.position_spread;
  if (q.velocity_spread) p["velocity_spread"] = *q.velocity_spread;
  if (q.positions) p["positions"] = *q.positions;
  if (q.velocities) p["velocities"] = *q.velocities;
  j["parameters"] = std::move(p);
  if (c.tau) j["tau"] = *c.tau;
  if (c.kernel) j["kernel"] = kernel_to_json(*c.kernel);
  j["h_divisor"] = c.h_divisor;
  if (c.horizon) j["horizon"] = *c.horizon;
  if (c.seed) j["seed"] = *c.seed;
  if (c.rng) j["rng"] = *c.rng;
  j["output"] = {{"stride", c.output.stride}, {"per_agent", c.output.per_agent}};
  if (c.betas) j["betas"] = *c.betas;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  require_object(j, "");
  reject_unknown(j, "", {"scenario", "parameters", "tau", "kernel", "h_divisor", "horizon", "seed",
                         "rng", "output", "betas"});
  RunConfig c;
  if (!j.contains("scenario") || !j["scenario"].is_string())
    throw ConfigError("/scenario: required, one of example1, example2, noflock, random, inline");
  c.scenario = j["scenario"].get<std::string>();
  if (!kScenarios.count(c.scenario)) throw ConfigError("/scenario: unknown scenario \"" + c.scenario + "\"");

  if (j.contains("parameters")) {
    const json& p = j["parameters"];
    require_object(p, "/parameters");
    reject_unknown(p, "/parameters", allowed_parameters(c.scenario));
    auto& q = c.parameters;
    if (p.contains("epsilon")) q.epsilon = read_number(p["epsilon"], "/parameters/epsilon");
    if (p.contains("beta")) q.beta = read_number(p["beta"], "/parameters/beta");
    if (p.contains("agents")) q.agents = read_int(p["agents"], "/parameters/agents");
    if (p.contains("dim")) q.dim = read_int(p["dim"], "/parameters/dim");
    if (p.contains("position_spread"))
      q.position_spread = read_number(p["position_spread"], "/parameters/position_spread");
    if (p.contains("velocity_spread"))
      q.velocity_spread = read_number(p["velocity_spread"], "/parameters/velocity_spread");
    if (p.contains("positions")) q.positions = read_samples(p["positions"], "/parameters/positions");
    if (p.contains("velocities")) q.velocities = read_samples(p["velocities"], "/parameters/velocities");
  }

  if (j.contains("tau")) c.tau = read_number(j["tau"], "/tau");
  if (j.contains("kernel")) c.kernel = kernel_from_json(j["kernel"]);
  if (j.contains("h_divisor")) c.h_divisor = read_int(j["h_divisor"], "/h_divisor");
  if (j.contains("horizon")) c.horizon = read_number(j["horizon"], "/horizon");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("/seed: expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("rng")) {
    if (!j["rng"].is_string()) throw ConfigError("/rng: expected a string");
    c.rng = j["rng"].get<std::string>();
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    require_object(o, "/output");
    reject_unknown(o, "/output", {"stride", "per_agent"});
    if (o.contains("stride")) c.output.stride = read_int(o["stride"], "/output/stride");
    if (o.contains("per_agent")) {
      if (!o["per_agent"].is_boolean()) throw ConfigError("/output/per_agent: expected true or false");
      c.output.per_agent = o["per_agent"].get<bool>();
    }
  }
  if (j.contains("betas")) c.betas = read_numbers(j["betas"], "/betas");

  if (c.h_divisor < 1) throw ConfigError("/h_divisor: tau / h must be a positive integer");
  if (c.output.stride < 1) throw ConfigError("/output/stride: must be a positive integer");
  if (c.betas && c.betas->empty()) throw ConfigError("/betas: must list at least one exponent");
  if (c.scenario == "example2" && c.tau && *c.tau != 1.0)
    throw ConfigError("/tau: example2 fixes tau = 1");
  if ((c.scenario == "example2" || c.scenario == "noflock") && c.kernel)
    throw ConfigError("/kernel: " + c.scenario + " fixes its kernel");
  if (c.scenario == "inline" && (!c.tau || !c.kernel || !c.parameters.positions || !c.parameters.velocities))
    throw ConfigError("/parameters: inline needs tau, kernel, positions and velocities");
  if (c.scenario != "random" && (c.seed || c.rng))
    throw ConfigError(std::string(c.seed ? "/seed" : "/rng") + ": only the random scenario is seeded");
  if (c.rng && *c.rng != kRandomGenerator)
    throw ConfigError("/rng: only \"" + std::string(kRandomGenerator) + "\" is available");
  return c;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  return run_config_from_json(j);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

Scenario build_scenario(const RunConfig& c, std::optional<double> beta) {
  const double tau = c.tau.value_or(1.0);
  const double horizon = c.horizon.value_or(default_horizon_delays(c.scenario) * tau);
  const GridSpec grid{c.h_divisor, horizon / tau};
  const auto& q = c.parameters;

  auto with_beta = [&](const KernelSpec& k) {
    if (!beta) return k;
    if (!k.is_power_law()) throw ConfigError("/betas: sweeping needs a power_law kernel");
    const auto& p = k.as_power_law();
    return KernelSpec::power_law(p.amplitude, p.sigma, *beta);
  };

  try {
    Scenario s;
    if (c.scenario == "example1") {
      s = scenario_example1(tau, q.epsilon.value_or(0.2), grid,
                            with_beta(c.kernel.value_or(KernelSpec::power_law(1.0, 1.0, 0.5))));
    } else if (c.scenario == "example2") {
      s = scenario_example2(grid);
      s.config.kernel = with_beta(s.config.kernel);
    } else if (c.scenario == "noflock") {
      s = scenario_noflock(tau, beta.value_or(q.beta.value_or(0.75)), grid);
    } else if (c.scenario == "random") {
      RandomScenarioSpec spec;
      spec.seed = c.seed.value_or(spec.seed);
      spec.agents = q.agents.value_or(spec.agents);
      spec.dim = q.dim.value_or(spec.dim);
      spec.tau = tau;
      spec.kernel = with_beta(c.kernel.value_or(spec.kernel));
      spec.position_spread = q.position_spread.value_or(spec.position_spread);
      spec.velocity_spread = q.velocity_spread.value_or(spec.velocity_spread);
      s = scenario_random(spec, grid);
    } else {
      HistorySet history = HistorySet::from_samples(tau, to_history_samples(*q.positions, *q.velocities));
      SystemConfig cfg;
      cfg.agents = history.agents();
      cfg.dim = history.dim();
      cfg.tau = tau;
      cfg.steps_per_delay = c.h_divisor;
      cfg.horizon = horizon;
      cfg.kernel = with_beta(*c.kernel);
      s = {cfg, std::move(history)};
    }
    s.config.validate();
    return s;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace flockcert
