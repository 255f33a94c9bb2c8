#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flockcert/integrator.hpp"
#include "flockcert/kernel.hpp"
#include "flockcert/model.hpp"

namespace flockcert {

/// Default number of dense samples per integration step for interval maxima.
inline constexpr int kDefaultRefine = 8;

/// A trajectory resampled at `refine` points per step over [-tau, T].
///
/// Sample f sits at t_f = (f - P) * h / refine with P = samples_per_delay(),
/// so the interval [n tau - tau, n tau] is exactly samples [n P, (n + 1) P].
class SampledTrajectory {
 public:
  SampledTrajectory(const Trajectory& traj, int refine = kDefaultRefine);

  int size() const { return static_cast<int>(positions_.size()); }
  int samples_per_delay() const { return per_delay_; }
  int origin() const { return per_delay_; }
  double spacing() const { return spacing_; }
  double time(int f) const { return static_cast<double>(f - per_delay_) * spacing_; }
  /// Number of complete intervals [n tau - tau, n tau] inside [-tau, T], minus one.
  int last_interval() const { return (size() - 1) / per_delay_ - 1; }

  const AgentMatrix& positions(int f) const { return positions_[f]; }
  const AgentMatrix& velocities(int f) const { return velocities_[f]; }
  const SystemConfig& config() const { return config_; }

 private:
  SystemConfig config_;
  int per_delay_;
  double spacing_;
  std::vector<AgentMatrix> positions_;
  std::vector<AgentMatrix> velocities_;
};

/// Sampled quantities along a trajectory. Entries before t = 0 hold the
/// t = 0 value for the running maximum, phi and L, which are defined for t >= 0.
struct DiagnosticsSeries {
  double tau = 0.0;
  int samples_per_delay = 0;
  std::vector<double> times;
  std::vector<double> position_diameter;
  std::vector<double> velocity_diameter;
  std::vector<double> running_max_position_diameter;
  std::vector<double> phi;
  /// Integral of phi from 0 to t (zero for t <= 0).
  std::vector<double> phi_integral;
  /// I_n for n = 0 .. floor(T / tau).
  std::vector<double> interval_diameters;
  std::vector<double> lyapunov_d;
  std::vector<double> lyapunov_l;
};

/// A-priori flocking certificate computed from the history alone.
struct FlockingCertificate {
  double sup_influence = 0.0;     ///< K = psi(0)
  double initial_speed = 0.0;     ///< R_V0
  double initial_diameter = 0.0;  ///< I_0
  double initial_spread = 0.0;    ///< d_X(0)
  double tau = 0.0;
  bool integral_diverges = false;
  std::optional<double> dstar;
  /// Root of the bound without the history anchor; reported for comparison only.
  std::optional<double> dstar_unanchored;
  std::optional<double> phi_floor;
  std::optional<double> decay_rate;

  bool certified() const { return decay_rate.has_value(); }
  /// I_0 exp(-C (t - 2 tau)); requires a certificate.
  double envelope(double t) const;
};

struct InequalityCheck {
  std::string name;
  double worst_margin = 0.0;
  double worst_location = 0.0;
  /// "t" for a time, "n" for an interval index.
  std::string location_kind = "t";
  std::size_t evaluated = 0;
  bool pass = true;
  /// False for the Lyapunov diagnostics, which are reported but do not decide the verdict.
  bool in_verdict = true;
};

struct InequalityReport {
  double tolerance = 0.0;
  std::vector<InequalityCheck> checks;
  bool pass = true;

  const InequalityCheck* find(const std::string& name) const;
};

double diameter_positions(const Trajectory& traj, double t);
double diameter_velocities(const Trajectory& traj, double t);

/// I_n: largest |v_c(s) - v_d(t)| over agents and sampled s, t in [n tau - tau, n tau].
/// Sampling makes this a lower bound of the continuous maximum.
double interval_diameter(const Trajectory& traj, int n, int refine = kDefaultRefine);

/// R_V0 sampled at `refine` points per integration step of the history.
double initial_speed_bound(const HistorySet& history, int steps_per_delay = 64,
                           int refine = kDefaultRefine);

/// I_0 from the history alone, same sampling as `initial_speed_bound`.
double history_interval_diameter(const HistorySet& history, int steps_per_delay = 64,
                                 int refine = kDefaultRefine);

/// <v_a(t) - v_b(t), u> for a unit vector u.
double directional_velocity_gap(const Trajectory& traj, int a, int b, const VectorXd& u, double t);

/// phi = min{ e^{-K tau} psi(tau R_V0 + max d_X), e^{-2 K tau} / tau }.
double phi_eval(const KernelSpec& kernel, double tau, double initial_speed,
                double running_max_position_diameter);

/// Smallest D >= anchor with (e^{-K tau} / 3) * integral_{anchor}^{D} f = I_0, where f is
/// the capped influence. Empty when the integral of f stays below the target.
std::optional<double> dstar_bound(const KernelSpec& kernel, double tau, double initial_diameter,
                                  double anchor = 0.0);

/// C = ln(1 / (1 - e^{-K tau} tau phi_floor)) / (3 tau).
double decay_rate(double sup_influence, double tau, double phi_floor);

FlockingCertificate certify(const SystemConfig& config, const HistorySet& history,
                            int refine = kDefaultRefine);

/// d_X, d_V, running max, I_n and phi on the sampled grid; D and L are left empty.
DiagnosticsSeries diagnostics_series(const SampledTrajectory& samples);

/// Full series including D(t) and L(t); the horizon must reach 2 tau.
DiagnosticsSeries lyapunov_series(const Trajectory& traj, int refine = kDefaultRefine);
DiagnosticsSeries lyapunov_series(const SampledTrajectory& samples);

/// Margins (right side minus left side) of every proven inequality.
/// The horizon must reach 3 tau. Passing means every verdict margin >= -tolerance with
/// tolerance = 1e-4 * max(I_0, 1). The D and L checks are included for inspection only.
InequalityReport check_paper_inequalities(const Trajectory& traj, const FlockingCertificate& cert,
                                          int refine = kDefaultRefine);
InequalityReport check_paper_inequalities(const SampledTrajectory& samples,
                                          const DiagnosticsSeries& series,
                                          const FlockingCertificate& cert);

}  // namespace flockcert
