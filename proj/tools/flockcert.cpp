#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flockcert/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Delayed Cucker-Smale simulator and flocking certificate checker"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::optional<int> stride;
  std::optional<int> h_divisor;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "run configuration (JSON)")->required();
    sub->add_option("--out", out, "output path")->required();
    sub->add_option("--stride", stride, "emit every k-th integration step");
    sub->add_option("--h-divisor", h_divisor, "steps per delay, h = tau / m");
    return sub;
  };
  CLI::App* run = add("run", "integrate and write t,d_X,d_V,envelope,phi as CSV");
  CLI::App* cert = add("certify", "a-priori certificate plus inequality verdicts as JSON");
  CLI::App* sweep = add("sweep", "final d_V and certificate for each beta in the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : flockcert::kExitConfigError;
  }

  const flockcert::CommandOverrides overrides{stride, h_divisor};
  if (*run) return flockcert::cmd_run(config, out, overrides);
  if (*cert) return flockcert::cmd_certify(config, out, overrides);
  if (*sweep) return flockcert::cmd_sweep(config, out, overrides);
  return flockcert::kExitConfigError;
}
