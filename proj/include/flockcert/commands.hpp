#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "flockcert/config.hpp"
#include "flockcert/diagnostics.hpp"
#include "flockcert/integrator.hpp"

namespace flockcert {

enum ExitCode : int {
  kExitOk = 0,
  kExitInequalityFailed = 1,
  kExitConfigError = 2,
  kExitIntegrationFault = 3,
  kExitNoCertificate = 4,
};

/// Command-line overrides applied on top of the loaded config.
struct CommandOverrides {
  std::optional<int> stride;
  std::optional<int> h_divisor;
};

/// Shortest decimal string that reads back to the same double.
std::string format_number(double x);

/// The run CSV: header t,d_X,d_V,envelope,phi (plus per-agent columns) and one row
/// per `stride` integration steps from -tau to T.
std::string run_csv(const Trajectory& traj, const FlockingCertificate& cert,
                    const OutputOptions& output);

nlohmann::json certificate_json(const FlockingCertificate& cert);
nlohmann::json report_json(const InequalityReport& report);

/// Concurrency cap from FLOCK_THREADS; 0 or unset means the hardware default.
unsigned sweep_threads();

/// Integrates the configured scenario and writes the CSV to `out` and metadata to `out`.meta.json.
int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out,
            const CommandOverrides& overrides = {});

/// Certificate plus inequality verdicts as a JSON report.
/// Exit 0 when every verdict check passes, 1 when one fails, 4 when no certificate exists.
int cmd_certify(const std::filesystem::path& config, const std::filesystem::path& out,
                const CommandOverrides& overrides = {});

/// One simulation per beta in the config, rows beta,final_dV,certified,C_or_empty sorted by beta.
int cmd_sweep(const std::filesystem::path& config, const std::filesystem::path& out,
              const CommandOverrides& overrides = {});

}  // namespace flockcert
