#include "flockcert/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace flockcert {

int SystemConfig::total_steps() const {
  return static_cast<int>(std::llround(horizon / step()));
}

void SystemConfig::validate() const {
  if (agents < 2) throw std::invalid_argument("agents: need at least 2, got " + std::to_string(agents));
  if (dim < 1) throw std::invalid_argument("dim: need at least 1, got " + std::to_string(dim));
  if (!(std::isfinite(tau) && tau > 0.0)) throw std::invalid_argument("tau: must be positive");
  if (steps_per_delay < 1)
    throw std::invalid_argument("h_divisor: tau / h must be a positive integer");
  if (!(std::isfinite(horizon) && horizon >= tau))
    throw std::invalid_argument("horizon: must be finite and at least tau");
  const double steps = horizon / step();
  if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
    throw std::invalid_argument("horizon: must be an integer multiple of the step tau / h_divisor");
}

bool HistorySamples::operator==(const HistorySamples& other) const {
  auto same = [](const std::vector<AgentMatrix>& a, const std::vector<AgentMatrix>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i] != b[i]) return false;
    }
    return true;
  };
  return same(positions, other.positions) && same(velocities, other.velocities);
}

HistorySet HistorySet::from_functions(double tau, int dim, std::vector<AgentHistory> agents) {
  if (!(tau > 0.0)) throw std::invalid_argument("history: tau must be positive");
  if (dim < 1) throw std::invalid_argument("history: dim must be positive");
  for (const auto& a : agents) {
    if (!a.position || !a.velocity) throw std::invalid_argument("history: missing function");
  }
  HistorySet h;
  h.tau_ = tau;
  h.dim_ = dim;
  h.agents_ = std::move(agents);
  return h;
}

namespace {

// Row i of `m` holds the sample at time -tau + i * spacing.
struct SampledChannel {
  std::shared_ptr<const HistorySamples> data;
  int agent;
  double tau;

  std::pair<Eigen::Index, double> locate(double t, Eigen::Index rows) const {
    const double spacing = tau / static_cast<double>(rows - 1);
    double s = (t + tau) / spacing;
    auto i = static_cast<Eigen::Index>(std::floor(s));
    if (i >= rows - 1) i = rows - 2;
    if (i < 0) i = 0;
    return {i, s - static_cast<double>(i)};
  }

  VectorXd velocity(double t) const {
    const auto& v = data->velocities[agent];
    if (v.rows() == 1) return v.row(0).transpose();
    const auto [i, w] = locate(t, v.rows());
    return ((1.0 - w) * v.row(i) + w * v.row(i + 1)).transpose();
  }

  VectorXd position(double t) const {
    const auto& x = data->positions[agent];
    const auto& v = data->velocities[agent];
    if (x.rows() == 1) return x.row(0).transpose();
    const auto [i, w] = locate(t, x.rows());
    const double spacing = tau / static_cast<double>(x.rows() - 1);
    const double w2 = w * w;
    const double w3 = w2 * w;
    const double h00 = 2.0 * w3 - 3.0 * w2 + 1.0;
    const double h10 = w3 - 2.0 * w2 + w;
    const double h01 = -2.0 * w3 + 3.0 * w2;
    const double h11 = w3 - w2;
    return (h00 * x.row(i) + h10 * spacing * v.row(i) + h01 * x.row(i + 1) +
            h11 * spacing * v.row(i + 1))
        .transpose();
  }
};

}  // namespace

HistorySet HistorySet::from_samples(double tau, HistorySamples samples) {
  if (!(tau > 0.0)) throw std::invalid_argument("history: tau must be positive");
  if (samples.positions.size() != samples.velocities.size() || samples.positions.empty())
    throw std::invalid_argument("history: positions and velocities must list the same agents");
  const auto rows = samples.positions.front().rows();
  const auto cols = samples.positions.front().cols();
  if (rows < 1 || cols < 1) throw std::invalid_argument("history: empty samples");
  for (std::size_t a = 0; a < samples.positions.size(); ++a) {
    for (const auto* m : {&samples.positions[a], &samples.velocities[a]}) {
      if (m->rows() != rows || m->cols() != cols)
        throw std::invalid_argument("history: agent " + std::to_string(a) + " has a ragged sample array");
      if (!m->allFinite())
        throw std::invalid_argument("history: agent " + std::to_string(a) + " has non-finite samples");
    }
  }
  auto shared = std::make_shared<const HistorySamples>(samples);
  std::vector<AgentHistory> agents;
  for (int a = 0; a < static_cast<int>(samples.positions.size()); ++a) {
    SampledChannel ch{shared, a, tau};
    agents.push_back({[ch](double t) { return ch.position(t); },
                      [ch](double t) { return ch.velocity(t); }});
  }
  HistorySet h = from_functions(tau, static_cast<int>(cols), std::move(agents));
  h.samples_ = std::move(samples);
  return h;
}

double HistorySet::clamp_time(double t) const {
  const double slack = 1e-12 * tau_;
  if (t < -tau_ - slack || t > slack)
    throw std::out_of_range("history: time " + std::to_string(t) + " outside [-tau, 0]");
  return std::clamp(t, -tau_, 0.0);
}

AgentState HistorySet::eval(int agent, double t) const {
  if (agent < 0 || agent >= agents()) throw std::out_of_range("history: agent index");
  const double s = clamp_time(t);
  return {agents_[agent].position(s), agents_[agent].velocity(s)};
}

void HistorySet::eval_all(double t, AgentMatrix& positions, AgentMatrix& velocities) const {
  const double s = clamp_time(t);
  positions.resize(agents(), dim_);
  velocities.resize(agents(), dim_);
  for (int a = 0; a < agents(); ++a) {
    positions.row(a) = agents_[a].position(s).transpose();
    velocities.row(a) = agents_[a].velocity(s).transpose();
  }
}

double max_history_speed(const HistorySet& history, int samples_per_delay) {
  double best = 0.0;
  AgentMatrix x;
  AgentMatrix v;
  for (int k = 0; k <= samples_per_delay; ++k) {
    const double t = -history.tau() + history.tau() * k / samples_per_delay;
    history.eval_all(t, x, v);
    best = std::max(best, v.rowwise().norm().maxCoeff());
  }
  return best;
}

AgentMatrix rhs_velocity(const KernelSpec& kernel, const AgentMatrix& positions,
                         const AgentMatrix& velocities, const AgentMatrix& delayed_positions,
                         const AgentMatrix& delayed_velocities) {
  const auto n = positions.rows();
  if (velocities.rows() != n || delayed_positions.rows() != n || delayed_velocities.rows() != n ||
      velocities.cols() != positions.cols() || delayed_positions.cols() != positions.cols() ||
      delayed_velocities.cols() != positions.cols())
    throw std::invalid_argument("rhs_velocity: state shapes disagree");
  const int agents = static_cast<int>(n);
  AgentMatrix out = AgentMatrix::Zero(n, positions.cols());
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      const double w = influence(kernel, agents, positions.row(a), delayed_positions.row(b));
      out.row(a) += w * (delayed_velocities.row(b) - velocities.row(a));
    }
  }
  return out;
}

}  // namespace flockcert
