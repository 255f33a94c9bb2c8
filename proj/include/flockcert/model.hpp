#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "flockcert/kernel.hpp"
#include "flockcert/types.hpp"

namespace flockcert {

/// Shape of a delayed flocking system and its integration grid.
///
/// The step is tau / steps_per_delay, so delayed arguments t - tau always land
/// on a grid point of already-integrated time.
struct SystemConfig {
  int agents = 2;
  int dim = 1;
  double tau = 1.0;
  int steps_per_delay = 64;
  double horizon = 1.0;
  KernelSpec kernel = KernelSpec::power_law(1.0, 1.0, 0.5);

  double step() const { return tau / steps_per_delay; }
  /// Number of steps covering [0, horizon].
  int total_steps() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

/// Per-agent initial data on [-tau, 0]; position and velocity need not be consistent.
struct AgentHistory {
  std::function<VectorXd(double)> position;
  std::function<VectorXd(double)> velocity;
};

/// Uniformly sampled history: per agent a (samples x dim) matrix on {-tau, ..., 0}.
struct HistorySamples {
  std::vector<AgentMatrix> positions;
  std::vector<AgentMatrix> velocities;

  bool operator==(const HistorySamples& other) const;
};

class HistorySet {
 public:
  HistorySet() = default;

  /// Closed-form histories, evaluated exactly on demand.
  static HistorySet from_functions(double tau, int dim, std::vector<AgentHistory> agents);

  /// Sampled histories. Positions use cubic Hermite interpolation with the
  /// velocity samples as slopes; velocities are interpolated linearly.
  static HistorySet from_samples(double tau, HistorySamples samples);

  int agents() const { return static_cast<int>(agents_.size()); }
  int dim() const { return dim_; }
  double tau() const { return tau_; }
  const std::optional<HistorySamples>& samples() const { return samples_; }

  /// State of one agent at t in [-tau, 0]; throws std::out_of_range otherwise.
  AgentState eval(int agent, double t) const;
  void eval_all(double t, AgentMatrix& positions, AgentMatrix& velocities) const;

 private:
  double clamp_time(double t) const;

  double tau_ = 0.0;
  int dim_ = 0;
  std::vector<AgentHistory> agents_;
  std::optional<HistorySamples> samples_;
};

/// Largest speed over `samples_per_delay + 1` uniform samples of the history.
double max_history_speed(const HistorySet& history, int samples_per_delay);

/// Normalized weight psi(|x_a(t) - x_b(t - tau)|) / (N - 1).
template <typename DerivedA, typename DerivedB>
double influence(const KernelSpec& kernel, int agents, const Eigen::MatrixBase<DerivedA>& x_now,
                 const Eigen::MatrixBase<DerivedB>& x_delayed) {
  if (x_now.size() != x_delayed.size()) throw std::invalid_argument("influence: dimension mismatch");
  if (agents < 2) throw std::invalid_argument("influence: need at least two agents");
  return kernel((x_now - x_delayed).norm()) / static_cast<double>(agents - 1);
}

/// Velocity derivative of every agent:
///   sum_{b != a} H_ab(t) (v_b(t - tau) - v_a(t)).
/// The position derivative is the current velocity.
AgentMatrix rhs_velocity(const KernelSpec& kernel, const AgentMatrix& positions,
                         const AgentMatrix& velocities, const AgentMatrix& delayed_positions,
                         const AgentMatrix& delayed_velocities);

}  // namespace flockcert
