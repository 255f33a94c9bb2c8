#include "flockcert/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flockcert {

namespace {

struct HermiteWeights {
  double h00, h10, h01, h11;
};

HermiteWeights hermite(double theta) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  return {2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + theta, -2.0 * t3 + 3.0 * t2, t3 - t2};
}

constexpr double kSnap = 1e-12;

}  // namespace

Trajectory::Trajectory(SystemConfig config, HistorySet history)
    : config_(std::move(config)), history_(std::move(history)) {}

void Trajectory::push_node(AgentMatrix x, AgentMatrix v, AgentMatrix a) {
  positions_.push_back(std::move(x));
  velocities_.push_back(std::move(v));
  accelerations_.push_back(std::move(a));
}

void Trajectory::interpolate(int i, double theta, AgentMatrix& x, AgentMatrix& v) const {
  if (i < origin()) {
    history_.eval_all(std::min(node_time(i) + theta * config_.step(), 0.0), x, v);
    return;
  }
  if (theta <= 0.0) {
    x = positions_[i];
    v = velocities_[i];
    return;
  }
  if (theta >= 1.0) {
    x = positions_.at(i + 1);
    v = velocities_.at(i + 1);
    return;
  }
  const double h = config_.step();
  const auto w = hermite(theta);
  x = w.h00 * positions_[i] + (w.h10 * h) * velocities_[i] + w.h01 * positions_[i + 1] +
      (w.h11 * h) * velocities_[i + 1];
  v = w.h00 * velocities_[i] + (w.h10 * h) * accelerations_[i] + w.h01 * velocities_[i + 1] +
      (w.h11 * h) * accelerations_[i + 1];
}

void Trajectory::eval_all(double t, AgentMatrix& x, AgentMatrix& v) const {
  const double h = config_.step();
  const double slack = kSnap * config_.tau;
  if (!(t >= start_time() - slack && t <= end_time() + slack))
    throw std::out_of_range("trajectory: time " + std::to_string(t) + " outside [-tau, T]");
  if (t <= 0.0) {
    history_.eval_all(std::max(t, start_time()), x, v);
    return;
  }
  const double s = t / h;
  int i = static_cast<int>(std::floor(s));
  double theta = s - i;
  const int last_step = node_count() - 1 - origin();
  if (i >= last_step) {
    i = last_step - 1;
    theta = 1.0;
  }
  if (theta < kSnap) theta = 0.0;
  if (theta > 1.0 - kSnap) theta = 1.0;
  interpolate(origin() + i, theta, x, v);
}

AgentState dense_eval(const Trajectory& traj, int agent, double t) {
  if (agent < 0 || agent >= traj.config().agents)
    throw std::out_of_range("dense_eval: agent index out of range");
  AgentMatrix x;
  AgentMatrix v;
  traj.eval_all(t, x, v);
  return {x.row(agent).transpose(), v.row(agent).transpose()};
}

Trajectory integrate(const SystemConfig& config, const HistorySet& history,
                     const IntegrateOptions& options) {
  config.validate();
  if (history.agents() != config.agents || history.dim() != config.dim)
    throw std::invalid_argument("integrate: history shape does not match config (agents, dim)");
  if (std::abs(history.tau() - config.tau) > 1e-12 * config.tau)
    throw std::invalid_argument("integrate: history delay does not match config tau");

  const int m = config.steps_per_delay;
  const int n = config.total_steps();
  const double h = config.step();
  const double speed_limit =
      options.guard_factor * max_history_speed(history, m * options.history_refine) + 1.0;

  Trajectory traj(config, history);
  const AgentMatrix zero = AgentMatrix::Zero(config.agents, config.dim);
  for (int i = 0; i <= m; ++i) {
    AgentMatrix x;
    AgentMatrix v;
    history.eval_all(traj.node_time(i), x, v);
    traj.push_node(std::move(x), std::move(v), zero);
  }

  AgentMatrix dx;
  AgentMatrix dv;
  // Delayed state at t_i - tau + theta h, always inside completed territory.
  auto delayed = [&](int i, double theta) {
    traj.interpolate(i - m, theta, dx, dv);
  };
  auto accel = [&](const AgentMatrix& x, const AgentMatrix& v) {
    return rhs_velocity(config.kernel, x, v, dx, dv);
  };

  delayed(m, 0.0);
  traj.set_acceleration(m, accel(traj.positions(m), traj.velocities(m)));

  for (int i = m; i < m + n; ++i) {
    const AgentMatrix& x0 = traj.positions(i);
    const AgentMatrix& v0 = traj.velocities(i);
    const AgentMatrix& a1 = traj.accelerations(i);

    delayed(i, 0.5);
    const AgentMatrix x2 = x0 + (0.5 * h) * v0;
    const AgentMatrix v2 = v0 + (0.5 * h) * a1;
    const AgentMatrix a2 = accel(x2, v2);
    const AgentMatrix x3 = x0 + (0.5 * h) * v2;
    const AgentMatrix v3 = v0 + (0.5 * h) * a2;
    const AgentMatrix a3 = accel(x3, v3);
    delayed(i, 1.0);
    const AgentMatrix x4 = x0 + h * v3;
    const AgentMatrix v4 = v0 + h * a3;
    const AgentMatrix a4 = accel(x4, v4);

    AgentMatrix x1 = x0 + (h / 6.0) * (v0 + 2.0 * v2 + 2.0 * v3 + v4);
    AgentMatrix v1 = v0 + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);

    const double t1 = traj.node_time(i + 1);
    if (!x1.allFinite() || !v1.allFinite()) throw IntegrationFault("non-finite state", t1);
    if (v1.rowwise().norm().maxCoeff() > speed_limit)
      throw IntegrationFault("speed exceeded divergence guard", t1);

    delayed(i + 1, 0.0);
    AgentMatrix acc = accel(x1, v1);
    traj.push_node(std::move(x1), std::move(v1), std::move(acc));
  }
  return traj;
}

OrderEstimate estimate_order(const SystemConfig& config, const HistorySet& history,
                             double probe_time) {
  if (!(probe_time > 0.0 && probe_time <= config.horizon + 1e-12 * config.horizon))
    throw std::invalid_argument("estimate_order: probe time must lie in (0, T]");

  const double coarse_h = config.step();
  const double horizon = std::max(config.tau, std::ceil(probe_time / coarse_h - 1e-9) * coarse_h);

  std::array<AgentMatrix, 4> xs;
  std::array<AgentMatrix, 4> vs;
  for (int level = 0; level < 4; ++level) {
    SystemConfig refined = config;
    refined.steps_per_delay = config.steps_per_delay << level;
    refined.horizon = horizon;
    integrate(refined, history).eval_all(probe_time, xs[level], vs[level]);
  }

  // Each channel is measured relative to its own magnitude so that large
  // positions do not bury the velocity error under round-off.
  OrderEstimate est;
  const double x_scale = 1.0 + xs[3].cwiseAbs().maxCoeff();
  const double v_scale = 1.0 + vs[3].cwiseAbs().maxCoeff();
  for (int level = 0; level < 3; ++level) {
    est.errors[level] = std::max((xs[level] - xs[3]).cwiseAbs().maxCoeff() / x_scale,
                                 (vs[level] - vs[3]).cwiseAbs().maxCoeff() / v_scale);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double reference_steps = std::ceil(horizon / (coarse_h / 8.0) - 1e-9);
  const double noise = eps * reference_steps;
  if (std::max({est.errors[0], est.errors[1], est.errors[2]}) <= noise ||
      std::min({est.errors[0], est.errors[1], est.errors[2]}) <= 2.0 * eps) {
    est.degenerate = true;
    est.order = std::numeric_limits<double>::quiet_NaN();
    est.log_ratios = {est.order, est.order};
    return est;
  }
  est.log_ratios[0] = std::log2(est.errors[0] / est.errors[1]);
  est.log_ratios[1] = std::log2(est.errors[1] / est.errors[2]);
  est.order = 0.5 * (est.log_ratios[0] + est.log_ratios[1]);
  return est;
}

}  // namespace flockcert
