#include "flockcert/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "flockcert/quadrature.hpp"

namespace flockcert {

namespace {

double stacked_diameter(const std::vector<const AgentMatrix*>& blocks) {
  if (blocks.empty()) return 0.0;
  const auto rows_per = blocks.front()->rows();
  AgentMatrix all(rows_per * static_cast<Eigen::Index>(blocks.size()), blocks.front()->cols());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    all.middleRows(static_cast<Eigen::Index>(k) * rows_per, rows_per) = *blocks[k];
  }
  return row_diameter(all);
}

// Unit directions for the velocity hull check: +-e for d = 1, otherwise
// `count` seeded directions and their negatives.
std::vector<VectorXd> probe_directions(int dim, int count) {
  std::vector<VectorXd> dirs;
  if (dim == 1) {
    dirs.push_back(VectorXd::Constant(1, 1.0));
    dirs.push_back(VectorXd::Constant(1, -1.0));
    return dirs;
  }
  std::mt19937_64 rng(0x5eed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  while (static_cast<int>(dirs.size()) < 2 * count) {
    VectorXd u(dim);
    for (int k = 0; k < dim; ++k) u[k] = uniform();
    const double norm = u.norm();
    if (norm < 0.1 || norm > 1.0) continue;
    u /= norm;
    dirs.push_back(u);
    dirs.push_back(-u);
  }
  return dirs;
}

class MarginTracker {
 public:
  MarginTracker(std::string name, std::string kind) {
    check_.name = std::move(name);
    check_.location_kind = std::move(kind);
    check_.worst_margin = std::numeric_limits<double>::infinity();
  }
  void add(double margin, double location) {
    ++check_.evaluated;
    if (margin < check_.worst_margin) {
      check_.worst_margin = margin;
      check_.worst_location = location;
    }
  }
  InequalityCheck finish(double tol, bool in_verdict = true) {
    if (check_.evaluated == 0) check_.worst_margin = 0.0;
    check_.pass = check_.worst_margin >= -tol;
    check_.in_verdict = in_verdict;
    return check_;
  }

 private:
  InequalityCheck check_;
};

}  // namespace

SampledTrajectory::SampledTrajectory(const Trajectory& traj, int refine)
    : config_(traj.config()),
      per_delay_(traj.config().steps_per_delay * refine),
      spacing_(traj.config().step() / refine) {
  if (refine < 1) throw std::invalid_argument("refine must be positive");
  const int count = (traj.node_count() - 1) * refine + 1;
  positions_.resize(count);
  velocities_.resize(count);
  for (int f = 0; f < count; ++f) {
    traj.interpolate(f / refine, static_cast<double>(f % refine) / refine, positions_[f],
                     velocities_[f]);
  }
}

double FlockingCertificate::envelope(double t) const {
  if (!decay_rate) throw std::logic_error("envelope: no certificate");
  return initial_diameter * std::exp(-*decay_rate * (t - 2.0 * tau));
}

const InequalityCheck* InequalityReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

double diameter_positions(const Trajectory& traj, double t) {
  AgentMatrix x;
  AgentMatrix v;
  traj.eval_all(t, x, v);
  return row_diameter(x);
}

double diameter_velocities(const Trajectory& traj, double t) {
  AgentMatrix x;
  AgentMatrix v;
  traj.eval_all(t, x, v);
  return row_diameter(v);
}

double interval_diameter(const Trajectory& traj, int n, int refine) {
  const auto& cfg = traj.config();
  if (n < 0 || (n + 1) * cfg.steps_per_delay > traj.node_count() - 1)
    throw std::out_of_range("interval_diameter: interval outside the trajectory");
  const int per = cfg.steps_per_delay * refine;
  std::vector<AgentMatrix> vs(per + 1);
  std::vector<const AgentMatrix*> blocks;
  AgentMatrix x;
  for (int k = 0; k <= per; ++k) {
    const int f = n * per + k;
    traj.interpolate(f / refine, static_cast<double>(f % refine) / refine, x, vs[k]);
    blocks.push_back(&vs[k]);
  }
  return stacked_diameter(blocks);
}

double initial_speed_bound(const HistorySet& history, int steps_per_delay, int refine) {
  return max_history_speed(history, steps_per_delay * refine);
}

double history_interval_diameter(const HistorySet& history, int steps_per_delay, int refine) {
  const int samples = steps_per_delay * refine;
  std::vector<AgentMatrix> vs(samples + 1);
  std::vector<const AgentMatrix*> blocks;
  AgentMatrix x;
  for (int k = 0; k <= samples; ++k) {
    history.eval_all(-history.tau() + history.tau() * k / samples, x, vs[k]);
    blocks.push_back(&vs[k]);
  }
  return stacked_diameter(blocks);
}

double directional_velocity_gap(const Trajectory& traj, int a, int b, const VectorXd& u, double t) {
  if (std::abs(u.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("directional_velocity_gap: direction must be a unit vector");
  const auto sa = dense_eval(traj, a, t);
  const auto sb = dense_eval(traj, b, t);
  if (u.size() != sa.velocity.size())
    throw std::invalid_argument("directional_velocity_gap: dimension mismatch");
  return (sa.velocity - sb.velocity).dot(u);
}

double phi_eval(const KernelSpec& kernel, double tau, double initial_speed,
                double running_max_position_diameter) {
  if (!(tau > 0.0) || initial_speed < 0.0 || running_max_position_diameter < 0.0)
    throw std::invalid_argument("phi_eval: tau must be positive and distances non-negative");
  const double k = psi_sup(kernel);
  return std::min(std::exp(-k * tau) * kernel(tau * initial_speed + running_max_position_diameter),
                  std::exp(-2.0 * k * tau) / tau);
}

namespace {

std::optional<double> dstar_root(const CappedInfluence& f, double target, double anchor,
                                 int panels) {
  double lo = anchor;
  double hi = anchor + std::max(anchor, 1.0);
  double acc = 0.0;
  double seg = f.integral(lo, hi, panels);
  for (int guard = 0; acc + seg < target; ++guard) {
    if (guard > 4000 || !std::isfinite(hi)) return std::nullopt;
    acc += seg;
    lo = hi;
    hi = 2.0 * lo;
    seg = f.integral(lo, hi, panels);
  }
  const double base = lo;
  for (int it = 0; it < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (acc + f.integral(base, mid, panels) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

std::optional<double> dstar_bound(const KernelSpec& kernel, double tau, double initial_diameter,
                                  double anchor) {
  if (!(tau > 0.0) || initial_diameter < 0.0 || anchor < 0.0)
    throw std::invalid_argument("dstar_bound: tau must be positive and I_0, anchor non-negative");
  if (initial_diameter == 0.0) return anchor;
  const CappedInfluence f(kernel, tau);
  const double target = 3.0 * initial_diameter / f.scale();
  const double total = f.total();
  if (std::isfinite(total) && total - f.integral(0.0, anchor, 64) <= target) return std::nullopt;

  std::optional<double> prev = dstar_root(f, target, anchor, 16);
  for (int panels = 32; panels <= 4096 && prev; panels *= 2) {
    const auto cur = dstar_root(f, target, anchor, panels);
    if (!cur) return std::nullopt;
    if (std::abs(*cur - *prev) <= 1e-6 * std::abs(*cur)) return cur;
    prev = cur;
  }
  return prev;
}

double decay_rate(double sup_influence, double tau, double phi_floor) {
  if (!(sup_influence > 0.0) || !(tau > 0.0))
    throw std::domain_error("decay_rate: K and tau must be positive");
  const double cap = std::exp(-2.0 * sup_influence * tau) / tau;
  if (!(phi_floor > 0.0) || phi_floor > cap * (1.0 + 1e-12))
    throw std::domain_error("decay_rate: phi floor must lie in (0, e^{-2 K tau} / tau]");
  const double x = std::exp(-sup_influence * tau) * tau * phi_floor;
  return -std::log1p(-x) / (3.0 * tau);
}

FlockingCertificate certify(const SystemConfig& config, const HistorySet& history, int refine) {
  FlockingCertificate cert;
  cert.tau = config.tau;
  cert.sup_influence = psi_sup(config.kernel);
  cert.initial_speed = initial_speed_bound(history, config.steps_per_delay, refine);
  cert.initial_diameter = history_interval_diameter(history, config.steps_per_delay, refine);
  AgentMatrix x;
  AgentMatrix v;
  history.eval_all(0.0, x, v);
  cert.initial_spread = row_diameter(x);
  cert.integral_diverges = psi_integral_diverges(config.kernel);
  if (!cert.integral_diverges) return cert;

  // d_X grows at most at rate I_0 on [0, 2 tau], where the bound D(t) is still flat.
  const double anchor = config.tau * cert.initial_speed + cert.initial_spread +
                        2.0 * config.tau * cert.initial_diameter;
  cert.dstar = dstar_bound(config.kernel, config.tau, cert.initial_diameter, anchor);
  cert.dstar_unanchored = dstar_bound(config.kernel, config.tau, cert.initial_diameter);
  if (!cert.dstar) return cert;
  const double k = cert.sup_influence;
  const double floor = std::min(std::exp(-k * config.tau) * config.kernel(*cert.dstar),
                                std::exp(-2.0 * k * config.tau) / config.tau);
  cert.phi_floor = floor;
  if (floor > 0.0 && k > 0.0) cert.decay_rate = decay_rate(k, config.tau, floor);
  return cert;
}

DiagnosticsSeries diagnostics_series(const SampledTrajectory& samples) {
  const auto& cfg = samples.config();
  const int count = samples.size();
  const int origin = samples.origin();
  const int per = samples.samples_per_delay();

  DiagnosticsSeries s;
  s.tau = cfg.tau;
  s.samples_per_delay = per;
  s.times.resize(count);
  s.position_diameter.resize(count);
  s.velocity_diameter.resize(count);
  double speed = 0.0;
  for (int f = 0; f < count; ++f) {
    s.times[f] = samples.time(f);
    s.position_diameter[f] = row_diameter(samples.positions(f));
    s.velocity_diameter[f] = row_diameter(samples.velocities(f));
    if (f <= origin) speed = std::max(speed, samples.velocities(f).rowwise().norm().maxCoeff());
  }

  s.running_max_position_diameter.assign(count, s.position_diameter[origin]);
  for (int f = origin + 1; f < count; ++f) {
    s.running_max_position_diameter[f] =
        std::max(s.running_max_position_diameter[f - 1], s.position_diameter[f]);
  }

  s.phi.resize(count);
  for (int f = 0; f < count; ++f) {
    s.phi[f] = phi_eval(cfg.kernel, cfg.tau, speed, s.running_max_position_diameter[f]);
  }
  const std::vector<double> forward(s.phi.begin() + origin, s.phi.end());
  const auto cumulative = cumulative_simpson(forward, samples.spacing());
  s.phi_integral.assign(count, 0.0);
  std::copy(cumulative.begin(), cumulative.end(), s.phi_integral.begin() + origin);

  for (int n = 0; n <= samples.last_interval(); ++n) {
    std::vector<const AgentMatrix*> blocks;
    for (int f = n * per; f <= (n + 1) * per; ++f) blocks.push_back(&samples.velocities(f));
    s.interval_diameters.push_back(stacked_diameter(blocks));
  }
  return s;
}

DiagnosticsSeries lyapunov_series(const SampledTrajectory& samples) {
  if (samples.last_interval() < 2)
    throw std::invalid_argument("lyapunov_series: horizon must reach 2 tau");
  DiagnosticsSeries s = diagnostics_series(samples);
  const auto& cfg = samples.config();
  const int count = samples.size();
  const int origin = samples.origin();
  const int per = samples.samples_per_delay();
  const double k = psi_sup(cfg.kernel);
  const double scale = std::exp(-k * cfg.tau);
  const double i0 = s.interval_diameters.front();

  s.lyapunov_d.assign(count, i0);
  for (int f = 3 * per + 1; f < count; ++f) {
    const int n = (f - origin - 1) / per;  // t in (n tau, n tau + tau]
    const int base = (n + 1) * per;
    const double factor = 1.0 - scale * (s.phi_integral[f] - s.phi_integral[base]);
    s.lyapunov_d[f] = s.lyapunov_d[base] * std::cbrt(factor);
  }

  double speed = 0.0;
  for (int f = 0; f <= origin; ++f) {
    speed = std::max(speed, samples.velocities(f).rowwise().norm().maxCoeff());
  }
  const CappedInfluence capped(cfg.kernel, cfg.tau);
  double reach = cfg.tau * speed + s.running_max_position_diameter[origin];
  double area = capped.integral(0.0, reach, 64);
  s.lyapunov_l.resize(count);
  for (int f = 0; f < count; ++f) {
    if (f > origin) {
      const double next = cfg.tau * speed + s.running_max_position_diameter[f];
      if (next > reach) {
        area += capped.integral(reach, next, 4);
        reach = next;
      }
    }
    s.lyapunov_l[f] = s.lyapunov_d[f] + scale / 3.0 * area;
  }
  return s;
}

DiagnosticsSeries lyapunov_series(const Trajectory& traj, int refine) {
  return lyapunov_series(SampledTrajectory(traj, refine));
}

InequalityReport check_paper_inequalities(const SampledTrajectory& samples,
                                          const DiagnosticsSeries& series,
                                          const FlockingCertificate& cert) {
  const auto& cfg = samples.config();
  if (samples.last_interval() < 3)
    throw std::invalid_argument("check_paper_inequalities: horizon must reach 3 tau");
  const int count = samples.size();
  const int origin = samples.origin();
  const int per = samples.samples_per_delay();
  const int last = samples.last_interval();
  const auto& in = series.interval_diameters;
  const double k = psi_sup(cfg.kernel);
  const double decay = std::exp(-k * cfg.tau);
  const double speed = cert.initial_speed;

  InequalityReport report;
  report.tolerance = 1e-4 * std::max(in.front(), 1.0);
  const double tol = report.tolerance;

  {
    MarginTracker hull("velocity_hull", "n");
    for (const auto& u : probe_directions(cfg.dim, 64)) {
      std::vector<double> best(count);
      for (int f = 0; f < count; ++f) best[f] = (samples.velocities(f) * u).maxCoeff();
      std::vector<double> suffix(best);
      for (int f = count - 2; f >= 0; --f) suffix[f] = std::max(suffix[f], suffix[f + 1]);
      for (int n = 0; n <= last; ++n) {
        const double hull_max =
            *std::max_element(best.begin() + n * per, best.begin() + (n + 1) * per + 1);
        hull.add(hull_max - suffix[n * per], n);
      }
    }
    report.checks.push_back(hull.finish(tol));
  }
  {
    MarginTracker mono("interval_monotone", "n");
    for (int n = 0; n < last; ++n) mono.add(in[n] - in[n + 1], n + 1);
    report.checks.push_back(mono.finish(tol));
  }
  {
    MarginTracker sp("speed_bound", "t");
    for (int f = 0; f < count; ++f) {
      sp.add(speed - samples.velocities(f).rowwise().norm().maxCoeff(), samples.time(f));
    }
    report.checks.push_back(sp.finish(tol));
  }
  {
    MarginTracker cross("cross_delay_position", "t");
    for (int f = origin; f < count; ++f) {
      const AgentMatrix& now = samples.positions(f);
      const AgentMatrix& then = samples.positions(f - per);
      double worst = 0.0;
      for (Eigen::Index a = 0; a < then.rows(); ++a) {
        for (Eigen::Index b = 0; b < now.rows(); ++b) {
          worst = std::max(worst, (then.row(a) - now.row(b)).norm());
        }
      }
      cross.add(cfg.tau * speed + series.position_diameter[f - per] - worst, samples.time(f));
    }
    report.checks.push_back(cross.finish(tol));
  }
  {
    MarginTracker gron("endpoint_gronwall", "n");
    for (int n = 0; n < last; ++n) {
      const double dv = series.velocity_diameter[(n + 1) * per];
      gron.add(decay * dv + (1.0 - decay) * in[n] - in[n + 1], n);
    }
    report.checks.push_back(gron.finish(tol));
  }
  {
    MarginTracker contr("contraction", "n");
    for (int n = 2; n < last; ++n) {
      const double area = series.phi_integral[n * per] - series.phi_integral[(n - 1) * per];
      contr.add((1.0 - decay * area) * in[n - 2] - in[n + 1], n);
    }
    report.checks.push_back(contr.finish(tol));
  }
  if (!series.lyapunov_d.empty()) {
    MarginTracker dom("lyapunov_dominates", "t");
    for (int f = 0; f < count; ++f) {
      dom.add(series.lyapunov_d[f] - series.velocity_diameter[f], samples.time(f));
    }
    for (int n = 0; n <= last; ++n) {
      dom.add(series.lyapunov_d[(n + 1) * per] - in[n], n * cfg.tau);
    }
    report.checks.push_back(dom.finish(tol, false));

    MarginTracker full("lyapunov_nonincreasing", "t");
    MarginTracker late("lyapunov_nonincreasing_after_2tau", "t");
    double low_full = std::numeric_limits<double>::infinity();
    double low_late = low_full;
    for (int f = origin; f < count; ++f) {
      const double l = series.lyapunov_l[f];
      low_full = std::min(low_full, l);
      full.add(low_full - l, samples.time(f));
      if (f >= 3 * per) {
        low_late = std::min(low_late, l);
        late.add(low_late - l, samples.time(f));
      }
    }
    report.checks.push_back(full.finish(tol, false));
    report.checks.push_back(late.finish(tol, false));
  }
  if (cert.certified()) {
    MarginTracker env("envelope", "t");
    for (int f = 0; f < count; ++f) {
      env.add(cert.envelope(samples.time(f)) - series.velocity_diameter[f], samples.time(f));
    }
    report.checks.push_back(env.finish(tol));
  }
  if (cert.dstar) {
    const auto forward = series.position_diameter.begin() + origin;
    const auto peak = std::max_element(forward, series.position_diameter.end());
    MarginTracker bound("dstar_position_bound", "t");
    bound.add(*cert.dstar - (cfg.tau * speed + *peak),
              samples.time(static_cast<int>(peak - series.position_diameter.begin())));
    report.checks.push_back(bound.finish(tol));

    const auto all_peak =
        std::max_element(series.position_diameter.begin(), series.position_diameter.end());
    MarginTracker sup("dstar_sup_bound", "t");
    sup.add(*cert.dstar - *all_peak,
            samples.time(static_cast<int>(all_peak - series.position_diameter.begin())));
    report.checks.push_back(sup.finish(tol));
  }

  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const InequalityCheck& c) { return c.pass || !c.in_verdict; });
  return report;
}

InequalityReport check_paper_inequalities(const Trajectory& traj, const FlockingCertificate& cert,
                                          int refine) {
  const SampledTrajectory samples(traj, refine);
  return check_paper_inequalities(samples, lyapunov_series(samples), cert);
}

}  // namespace flockcert
