#include "flockcert/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>
#include <vector>

namespace flockcert {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw ConfigError(path.string() + ": write failed");
}

std::filesystem::path meta_path(const std::filesystem::path& out) {
  return std::filesystem::path(out.string() + ".meta.json");
}

RunConfig load_with_overrides(const std::filesystem::path& path, const CommandOverrides& overrides) {
  RunConfig cfg = load_run_config(path);
  if (overrides.h_divisor) {
    if (*overrides.h_divisor < 1) throw ConfigError("--h-divisor: must be a positive integer");
    cfg.h_divisor = *overrides.h_divisor;
  }
  if (overrides.stride) {
    if (*overrides.stride < 1) throw ConfigError("--stride: must be a positive integer");
    cfg.output.stride = *overrides.stride;
  }
  return cfg;
}

json scenario_notes(const RunConfig& cfg) {
  json notes = json::array();
  if (cfg.scenario == "example1") {
    notes.push_back("positions anchored at x_a(-tau) = 0 and x_b(-tau) = 10; the plateau does not depend on them");
  }
  if (cfg.scenario == "random") notes.push_back(std::string("generator ") + kRandomGenerator);
  return notes;
}

template <typename Body>
int guarded(const char* command, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << command << ": config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const IntegrationFault& e) {
    std::cerr << command << ": integration fault: " << e.what() << '\n';
    return kExitIntegrationFault;
  } catch (const std::invalid_argument& e) {
    std::cerr << command << ": config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string run_csv(const Trajectory& traj, const FlockingCertificate& cert,
                    const OutputOptions& output) {
  const auto& cfg = traj.config();
  const SampledTrajectory samples(traj, kDefaultRefine);
  const DiagnosticsSeries series = diagnostics_series(samples);

  std::string csv = "t,d_X,d_V,envelope,phi";
  if (output.per_agent) {
    for (const char* channel : {"x", "v"}) {
      for (int a = 0; a < cfg.agents; ++a) {
        for (int k = 0; k < cfg.dim; ++k) {
          csv += ',';
          csv += channel;
          csv += '_' + std::to_string(a) + '_' + std::to_string(k);
        }
      }
    }
  }
  csv += '\n';

  for (int i = 0; i < traj.node_count(); i += output.stride) {
    const int f = i * kDefaultRefine;
    const double t = traj.node_time(i);
    csv += format_number(t);
    csv += ',' + format_number(series.position_diameter[f]);
    csv += ',' + format_number(series.velocity_diameter[f]);
    csv += ',';
    if (cert.certified()) csv += format_number(cert.envelope(t));
    csv += ',' + format_number(series.phi[f]);
    if (output.per_agent) {
      for (const AgentMatrix* m : {&traj.positions(i), &traj.velocities(i)}) {
        for (Eigen::Index a = 0; a < m->rows(); ++a) {
          for (Eigen::Index k = 0; k < m->cols(); ++k) csv += ',' + format_number((*m)(a, k));
        }
      }
    }
    csv += '\n';
  }
  return csv;
}

json certificate_json(const FlockingCertificate& cert) {
  return {{"sup_influence", cert.sup_influence},
          {"initial_speed", cert.initial_speed},
          {"initial_diameter", cert.initial_diameter},
          {"initial_spread", cert.initial_spread},
          {"tau", cert.tau},
          {"integral_diverges", cert.integral_diverges},
          {"certified", cert.certified()},
          {"dstar", optional_number(cert.dstar)},
          {"dstar_unanchored", optional_number(cert.dstar_unanchored)},
          {"phi_floor", optional_number(cert.phi_floor)},
          {"decay_rate", optional_number(cert.decay_rate)}};
}

json report_json(const InequalityReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"inequality", c.name},
                      {"worst_margin", c.worst_margin},
                      {"worst_location", c.worst_location},
                      {"location_kind", c.location_kind},
                      {"evaluated", c.evaluated},
                      {"in_verdict", c.in_verdict},
                      {"pass", c.pass}});
  }
  return {{"tolerance", report.tolerance}, {"pass", report.pass}, {"checks", std::move(checks)}};
}

unsigned sweep_threads() {
  const unsigned machine = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("FLOCK_THREADS");
  if (!env || !*env) return machine;
  unsigned cap = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto res = std::from_chars(env, end, cap);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError(std::string("FLOCK_THREADS: expected a non-negative integer, got \"") + env + "\"");
  return cap == 0 ? machine : cap;
}

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out,
            const CommandOverrides& overrides) {
  return guarded("run", [&] {
    const RunConfig cfg = load_with_overrides(config, overrides);
    const Scenario sc = build_scenario(cfg);
    const Trajectory traj = integrate(sc.config, sc.history);
    const FlockingCertificate cert = certify(sc.config, sc.history);
    write_file(out, run_csv(traj, cert, cfg.output));

    json meta = {{"command", "run"},
                 {"config", to_json(cfg)},
                 {"agents", sc.config.agents},
                 {"dim", sc.config.dim},
                 {"tau", sc.config.tau},
                 {"step", sc.config.step()},
                 {"horizon", sc.config.horizon},
                 {"rows", (traj.node_count() + cfg.output.stride - 1) / cfg.output.stride},
                 {"certificate", certificate_json(cert)},
                 {"notes", scenario_notes(cfg)}};
    write_file(meta_path(out), meta.dump(2) + '\n');
    return static_cast<int>(kExitOk);
  });
}

int cmd_certify(const std::filesystem::path& config, const std::filesystem::path& out,
                const CommandOverrides& overrides) {
  return guarded("certify", [&] {
    const RunConfig cfg = load_with_overrides(config, overrides);
    const Scenario sc = build_scenario(cfg);
    if (sc.config.horizon < 3.0 * sc.config.tau - 1e-12 * sc.config.tau)
      throw ConfigError("horizon: certify needs at least 3 tau");
    const FlockingCertificate cert = certify(sc.config, sc.history);
    const Trajectory traj = integrate(sc.config, sc.history);
    const SampledTrajectory samples(traj, kDefaultRefine);
    const DiagnosticsSeries series = lyapunov_series(samples);
    const InequalityReport report = check_paper_inequalities(samples, series, cert);

    const int first_end = 2 * samples.samples_per_delay();
    const auto& dv = series.velocity_diameter;
    const double first_delay_peak =
        *std::max_element(dv.begin() + samples.origin(), dv.begin() + first_end + 1);

    int code = kExitOk;
    if (!report.pass) {
      code = kExitInequalityFailed;
    } else if (!cert.certified()) {
      code = kExitNoCertificate;
    }
    json doc = report_json(report);
    doc["certificate"] = certificate_json(cert);
    doc["simulation"] = {
        {"max_velocity_diameter_first_delay", first_delay_peak},
        {"final_velocity_diameter", dv.back()},
        {"max_position_diameter",
         *std::max_element(series.position_diameter.begin(), series.position_diameter.end())}};
    doc["config"] = to_json(cfg);
    doc["exit_code"] = code;
    write_file(out, doc.dump(2) + '\n');
    return code;
  });
}

int cmd_sweep(const std::filesystem::path& config, const std::filesystem::path& out,
              const CommandOverrides& overrides) {
  return guarded("sweep", [&] {
    const RunConfig cfg = load_with_overrides(config, overrides);
    if (!cfg.betas || cfg.betas->empty()) throw ConfigError("/betas: sweep needs a non-empty list");
    std::vector<double> betas = *cfg.betas;
    std::stable_sort(betas.begin(), betas.end());
    std::vector<Scenario> scenarios;
    for (double beta : betas) scenarios.push_back(build_scenario(cfg, beta));

    struct Row {
      double final_dv = 0.0;
      std::optional<double> rate;
    };
    std::vector<Row> rows(betas.size());
    std::vector<std::exception_ptr> errors(betas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < betas.size(); i = next++) {
        try {
          const Trajectory traj = integrate(scenarios[i].config, scenarios[i].history);
          rows[i].final_dv = diameter_velocities(traj, traj.end_time());
          rows[i].rate = certify(scenarios[i].config, scenarios[i].history).decay_rate;
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const unsigned threads = std::min<std::size_t>(sweep_threads(), betas.size());
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::string csv = "beta,final_dV,certified,C_or_empty\n";
    for (std::size_t i = 0; i < betas.size(); ++i) {
      csv += format_number(betas[i]) + ',' + format_number(rows[i].final_dv) + ',' +
             (rows[i].rate ? "true," + format_number(*rows[i].rate) : std::string("false,")) + '\n';
    }
    write_file(out, csv);
    json meta = {{"command", "sweep"},
                 {"config", to_json(cfg)},
                 {"rows", betas.size()},
                 {"notes", scenario_notes(cfg)}};
    write_file(meta_path(out), meta.dump(2) + '\n');
    return static_cast<int>(kExitOk);
  });
}

}  // namespace flockcert
