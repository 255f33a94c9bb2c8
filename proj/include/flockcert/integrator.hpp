#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "flockcert/model.hpp"

namespace flockcert {

/// Raised when the integration produces a non-finite or runaway state.
class IntegrationFault : public std::runtime_error {
 public:
  IntegrationFault(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Piecewise-cubic solution on [-tau, T].
///
/// Grid node i sits at t_i = (i - m) h with m = steps_per_delay, so node 0 is
/// -tau, node m is 0 and the last node is T. Nodes in the history segment hold
/// history values; on [-tau, 0] dense evaluation defers to the history itself.
class Trajectory {
 public:
  Trajectory(SystemConfig config, HistorySet history);

  const SystemConfig& config() const { return config_; }
  const HistorySet& history() const { return history_; }

  int node_count() const { return static_cast<int>(positions_.size()); }
  /// Index of the node at t = 0.
  int origin() const { return config_.steps_per_delay; }
  double node_time(int i) const { return static_cast<double>(i - origin()) * config_.step(); }
  double start_time() const { return -config_.tau; }
  double end_time() const { return node_time(node_count() - 1); }

  const AgentMatrix& positions(int i) const { return positions_.at(i); }
  const AgentMatrix& velocities(int i) const { return velocities_.at(i); }
  /// Right-hand-side acceleration at node i (only meaningful for i >= origin()).
  const AgentMatrix& accelerations(int i) const { return accelerations_.at(i); }

  /// Dense state of every agent inside the step starting at node i, theta in [0, 1].
  void interpolate(int i, double theta, AgentMatrix& positions, AgentMatrix& velocities) const;

  /// Dense state of every agent at t in [-tau, T]; throws std::out_of_range otherwise.
  void eval_all(double t, AgentMatrix& positions, AgentMatrix& velocities) const;

  /// Builder interface used by `integrate`.
  void push_node(AgentMatrix x, AgentMatrix v, AgentMatrix a);
  void set_acceleration(int i, AgentMatrix a) { accelerations_.at(i) = std::move(a); }

 private:
  SystemConfig config_;
  HistorySet history_;
  std::vector<AgentMatrix> positions_;
  std::vector<AgentMatrix> velocities_;
  std::vector<AgentMatrix> accelerations_;
};

/// Dense (x, v) of one agent at time t.
AgentState dense_eval(const Trajectory& traj, int agent, double t);

struct IntegrateOptions {
  /// Abort if a speed exceeds guard_factor * R_V0 + 1. Theory forbids it.
  double guard_factor = 10.0;
  /// Samples per step used to measure R_V0 on the history.
  int history_refine = 8;
};

/// Method-of-steps RK4 solve of the delayed system on [0, T].
Trajectory integrate(const SystemConfig& config, const HistorySet& history,
                     const IntegrateOptions& options = {});

/// Empirical convergence order from runs at h, h/2, h/4 against an h/8 reference.
/// Errors are max-abs differences divided by 1 + max|state|, per channel, and the
/// larger channel counts. Degenerate means the coarsest error is within eps times the
/// reference step count, or some error is within 2 eps.
struct OrderEstimate {
  double order = 0.0;  ///< mean of the two log2 error ratios, NaN when degenerate
  std::array<double, 2> log_ratios{};
  std::array<double, 3> errors{};
  bool degenerate = false;
};

OrderEstimate estimate_order(const SystemConfig& config, const HistorySet& history,
                             double probe_time);

}  // namespace flockcert
