#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "flockcert/diagnostics.hpp"
#include "flockcert/scenarios.hpp"
#include "oracles.hpp"

using namespace flockcert;

namespace {

// Smallest D with (e^{-K tau} / 3) * integral_0^D f = target, by bisection on the oracle integral.
double oracle_dstar(double beta, double tau, double i0) {
  const double scale = std::exp(-tau);
  auto g = [&](double d) { return scale / 3.0 * oracle::capped_power_integral(1, 1, beta, tau, d, 400000) - i0; };
  double lo = 0.0, hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Trajectory collinear_at_rest() {
  std::vector<AgentHistory> agents;
  for (double p : {0.0, 1.0, 3.0}) {
    agents.push_back({[=](double) { return VectorXd::Constant(1, p); }, [](double) { return VectorXd::Zero(1); }});
  }
  SystemConfig cfg;
  cfg.agents = 3;
  cfg.horizon = 4.0;
  cfg.steps_per_delay = 16;
  return integrate(cfg, HistorySet::from_functions(1.0, 1, agents));
}

}  // namespace

TEST_CASE("diameters") {
  const auto rest = collinear_at_rest();
  CHECK(diameter_positions(rest, 2.0) == 3.0);
  CHECK(diameter_velocities(rest, 2.0) == 0.0);

  const auto ex2 = integrate(scenario_example2({64, 3.0}).config, scenario_example2({64, 3.0}).history);
  CHECK(diameter_positions(ex2, 0.0) == 1.0);
  CHECK(diameter_velocities(ex2, 0.0) == 0.0);

  const auto ex1 = scenario_example1(1.0, 0.2, {64, 3.0});
  const auto t1 = integrate(ex1.config, ex1.history);
  CHECK(diameter_velocities(t1, 0.4) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(diameter_positions(t1, 3.5), std::out_of_range);
}

TEST_CASE("interval diameters") {
  CHECK(interval_diameter(collinear_at_rest(), 2) == 0.0);

  const auto ex1 = scenario_example1(1.0, 0.2, {64, 3.0});
  const auto t1 = integrate(ex1.config, ex1.history);
  CHECK(interval_diameter(t1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(interval_diameter(t1, 1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(interval_diameter(t1, 4), std::out_of_range);
  CHECK_THROWS_AS(interval_diameter(t1, -1), std::out_of_range);

  // 100 x 100 grid over the history square for Example 2.
  double grid_max = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double s = -1.0 + i / 99.0, t = -1.0 + j / 99.0;
      grid_max = std::max(grid_max, std::abs(2 * (1 + s) - 2 * (1 + t)));
    }
  }
  const auto ex2 = scenario_example2({64, 3.0});
  const auto t2 = integrate(ex2.config, ex2.history);
  CHECK(interval_diameter(t2, 0) == doctest::Approx(grid_max).epsilon(1e-12));
  CHECK(history_interval_diameter(ex2.history) == doctest::Approx(grid_max).epsilon(1e-12));
}

TEST_CASE("interval diameter equals brute force over the same dense samples") {
  RandomScenarioSpec spec;
  spec.seed = 17;
  spec.agents = 3;
  spec.dim = 2;
  const auto sc = scenario_random(spec, {8, 3.0});
  const auto traj = integrate(sc.config, sc.history);
  for (int n = 0; n <= 3; ++n) {
    std::vector<AgentMatrix> vs;
    const int per = 8 * 2;  // two dense samples per step here
    for (int f = 0; f <= per; ++f) {
      AgentMatrix x, v;
      traj.eval_all((n - 1.0) + static_cast<double>(f) / per, x, v);
      vs.push_back(v);
    }
    double best = 0.0;
    for (const auto& a : vs)
      for (const auto& b : vs)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) best = std::max(best, (a.row(c) - b.row(d)).norm());
    CHECK(interval_diameter(traj, n, 2) == doctest::Approx(best).epsilon(1e-13));
  }
}

TEST_CASE("initial speed bound") {
  CHECK(initial_speed_bound(scenario_example2().history) == doctest::Approx(2.0));
  CHECK(initial_speed_bound(scenario_noflock(1.0, 0.75).history) == 1.0);
  CHECK(initial_speed_bound(scenario_noflock(0.3, 0.6).history) == 1.0);
  AgentHistory zero{[](double) { return VectorXd::Zero(1); }, [](double) { return VectorXd::Zero(1); }};
  CHECK(initial_speed_bound(HistorySet::from_functions(1.0, 1, {zero, zero})) == 0.0);
}

TEST_CASE("directional velocity gap") {
  RandomScenarioSpec spec;
  spec.agents = 3;
  spec.dim = 3;
  const auto sc = scenario_random(spec, {8, 2.0});
  const auto traj = integrate(sc.config, sc.history);
  const double t = 0.7;
  const VectorXd gap = dense_eval(traj, 0, t).velocity - dense_eval(traj, 2, t).velocity;
  const VectorXd along = gap.normalized();
  VectorXd across = VectorXd::Zero(3);
  across << -gap[1], gap[0], 0.0;
  across.normalize();
  CHECK(directional_velocity_gap(traj, 1, 1, along, t) == 0.0);
  CHECK(directional_velocity_gap(traj, 0, 2, along, t) == doctest::Approx(gap.norm()).epsilon(1e-14));
  CHECK(std::abs(directional_velocity_gap(traj, 0, 2, across, t)) < 1e-14);
  CHECK_THROWS_AS(directional_velocity_gap(traj, 0, 2, 2.0 * along, t), std::invalid_argument);
}

TEST_CASE("phi takes the smaller branch") {
  const auto ex2 = KernelSpec::power_law(1, 1, 0.5);
  CHECK(phi_eval(ex2, 1.0, 2.0, 1.0) == doctest::Approx(std::exp(-1.0) / std::sqrt(10.0)).epsilon(1e-14));
  CHECK(phi_eval(ex2, 1.0, 0.0, 0.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(phi_eval(KernelSpec::tabulated({0, 1}, {0, 0}, 0), 1.0, 1.0, 1.0) == 0.0);
}

TEST_CASE("dstar bound") {
  const auto ex2 = KernelSpec::power_law(1, 1, 0.5);
  CHECK(dstar_bound(ex2, 1.0, 0.0) == 0.0);
  CHECK(*dstar_bound(ex2, 1.0, 0.1) == doctest::Approx(oracle_dstar(0.5, 1.0, 0.1)).epsilon(1e-6));
  CHECK(*dstar_bound(KernelSpec::power_law(1, 1, 0.75), 1.0, 0.05) ==
        doctest::Approx(oracle_dstar(0.75, 1.0, 0.05)).epsilon(1e-6));

  // The whole integral of e^{-1} (1 + s^2)^{-3/4} is below 1, so I_0 = 0.2 cannot be reached.
  CHECK_FALSE(dstar_bound(KernelSpec::power_law(1, 1, 0.75), 1.0, 0.2).has_value());

  // Constant kernel: the integrand is constant m and D = 3 e^{K tau} I_0 / m.
  const double k = 0.7, tau = 1.3, i0 = 2.5;
  const double m = std::min(std::exp(-k * tau) * k, std::exp(-2 * k * tau) / tau);
  CHECK(*dstar_bound(KernelSpec::power_law(k, 1, 0), tau, i0) ==
        doctest::Approx(3 * std::exp(k * tau) * i0 / m).epsilon(1e-9));

  // Anchored form: the integral starts at the anchor.
  const double anchor = 4.0;
  const auto d = dstar_bound(ex2, 1.0, 0.1, anchor);
  REQUIRE(d.has_value());
  const double lhs = std::exp(-1.0) / 3.0 *
                     (oracle::capped_power_integral(1, 1, 0.5, 1.0, *d, 400000) -
                      oracle::capped_power_integral(1, 1, 0.5, 1.0, anchor, 400000));
  CHECK(lhs == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("property: dstar grows with I_0") {
  std::mt19937_64 rng(8);
  const auto k = KernelSpec::power_law(1, 1, 0.4);
  double prev = 0.0;
  for (double i0 = 0.01; i0 < 5.0; i0 *= 1.7) {
    const double d = *dstar_bound(k, 0.5, i0);
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("decay rate") {
  const double x = std::exp(-3.0);
  CHECK(decay_rate(1.0, 1.0, std::exp(-2.0)) == doctest::Approx(std::log(1.0 / (1.0 - x)) / 3.0).epsilon(1e-14));
  CHECK(decay_rate(2.0, 0.5, std::exp(-2.0) / 0.5) ==
        doctest::Approx(2.0 / 3.0 * std::log(1.0 / (1.0 - x))).epsilon(1e-14));
  double prev = std::numeric_limits<double>::infinity();
  for (double phi = std::exp(-2.0); phi > 1e-30; phi *= 0.01) {
    const double c = decay_rate(1.0, 1.0, phi);
    CHECK(c > 0.0);
    CHECK(c < prev);
    prev = c;
  }
  CHECK(prev < 1e-29);
  CHECK_THROWS_AS(decay_rate(1.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(decay_rate(1.0, 1.0, 0.2), std::domain_error);
  CHECK_THROWS_AS(decay_rate(0.0, 1.0, 0.1), std::domain_error);
}

TEST_CASE("certificate") {
  const auto ex2 = scenario_example2();
  const auto cert = certify(ex2.config, ex2.history);
  CHECK(cert.sup_influence == 1.0);
  CHECK(cert.initial_speed == doctest::Approx(2.0));
  CHECK(cert.initial_diameter == doctest::Approx(2.0));
  CHECK(cert.initial_spread == 1.0);
  CHECK(cert.integral_diverges);
  REQUIRE(cert.certified());
  CHECK(*cert.dstar >= cert.tau * cert.initial_speed);
  CHECK(std::exp(-1.0) * cert.tau * *cert.phi_floor <= std::exp(-3.0));
  CHECK(*cert.phi_floor == doctest::Approx(std::exp(-1.0) / std::sqrt(1.0 + *cert.dstar * *cert.dstar)));
  CHECK(*cert.decay_rate == doctest::Approx(-std::log1p(-std::exp(-1.0) * *cert.phi_floor) / 3.0).epsilon(1e-12));
  CHECK(cert.envelope(2.0) == cert.initial_diameter);

  const auto nf = scenario_noflock(1.0, 0.75);
  const auto none = certify(nf.config, nf.history);
  CHECK_FALSE(none.integral_diverges);
  CHECK_FALSE(none.dstar.has_value());
  CHECK_FALSE(none.certified());
  CHECK_THROWS_AS(none.envelope(1.0), std::logic_error);
}

TEST_CASE("consensus certificate has I_0 = 0 and a positive rate") {
  RandomScenarioSpec spec;
  spec.velocity_spread = 0.0;
  const auto sc = scenario_random(spec, {16, 5.0});
  const auto cert = certify(sc.config, sc.history);
  CHECK(cert.initial_diameter == 0.0);
  REQUIRE(cert.certified());
  CHECK(*cert.decay_rate > 0.0);
  CHECK(*cert.dstar >= cert.tau * cert.initial_speed + cert.initial_spread);

  const auto traj = integrate(sc.config, sc.history);
  const auto series = lyapunov_series(traj);
  for (std::size_t f = 0; f < series.times.size(); ++f) {
    REQUIRE(series.velocity_diameter[f] == 0.0);
    REQUIRE(series.lyapunov_d[f] == 0.0);
    REQUIRE(series.lyapunov_l[f] == series.lyapunov_l.front());
  }
  const auto report = check_paper_inequalities(traj, cert);
  CHECK(report.pass);
  for (const auto& c : report.checks) CHECK(c.worst_margin >= 0.0);
}

TEST_CASE("Lyapunov series structure") {
  const auto sc = scenario_example2({32, 6.0});
  const auto traj = integrate(sc.config, sc.history);
  const auto s = lyapunov_series(traj);
  const double i0 = s.interval_diameters.front();
  for (std::size_t f = 0; f < s.times.size(); ++f) {
    if (s.times[f] <= 2.0 + 1e-12) REQUIRE(s.lyapunov_d[f] == i0);
    if (f > 0) REQUIRE(s.lyapunov_d[f] <= s.lyapunov_d[f - 1]);
  }
  CHECK(s.interval_diameters.size() == 7);

  const auto short_sc = scenario_example2({32, 1.5});
  CHECK_THROWS_AS(lyapunov_series(integrate(short_sc.config, short_sc.history)), std::invalid_argument);
  const auto two = scenario_example2({32, 2.0});
  const auto two_traj = integrate(two.config, two.history);
  CHECK_NOTHROW(lyapunov_series(two_traj));
  CHECK_THROWS_AS(check_paper_inequalities(two_traj, certify(two.config, two.history)), std::invalid_argument);
}

TEST_CASE("property: series invariants on random flocks") {
  for (std::uint64_t seed = 300; seed < 306; ++seed) {
    RandomScenarioSpec spec;
    spec.seed = seed;
    spec.agents = 2 + static_cast<int>(seed % 4);
    spec.dim = 1 + static_cast<int>(seed % 3);
    spec.tau = 0.5 + 0.25 * static_cast<double>(seed % 3);
    spec.kernel = KernelSpec::power_law(1.0, 1.0, 0.2 + 0.1 * static_cast<double>(seed % 4));
    const auto sc = scenario_random(spec, {16, 8.0});
    const auto traj = integrate(sc.config, sc.history);
    const auto cert = certify(sc.config, sc.history);
    const SampledTrajectory samples(traj);
    const auto s = lyapunov_series(samples);
    const double tol = 1e-4 * std::max(s.interval_diameters.front(), 1.0);
    for (std::size_t f = 0; f < s.times.size(); ++f) {
      REQUIRE(s.position_diameter[f] >= 0.0);
      REQUIRE(s.velocity_diameter[f] >= 0.0);
      REQUIRE(std::isfinite(s.lyapunov_l[f]));
      if (f == 0) continue;
      REQUIRE(s.running_max_position_diameter[f] >= s.running_max_position_diameter[f - 1]);
      REQUIRE(s.phi[f] <= s.phi[f - 1]);
      REQUIRE(s.phi_integral[f] >= s.phi_integral[f - 1]);
    }
    for (std::size_t n = 1; n < s.interval_diameters.size(); ++n) {
      REQUIRE(s.interval_diameters[n] <= s.interval_diameters[n - 1] + tol);
    }
    const auto report = check_paper_inequalities(samples, s, cert);
    for (const auto& c : report.checks) {
      INFO(c.name << " margin " << c.worst_margin << " at " << c.worst_location);
      if (c.in_verdict) CHECK(c.pass);
    }
    CHECK(report.pass);
    CHECK(report.tolerance == tol);
  }
}

TEST_CASE("report lookup") {
  const auto sc = scenario_example2({16, 4.0});
  const auto report = check_paper_inequalities(integrate(sc.config, sc.history), certify(sc.config, sc.history));
  for (const char* name : {"velocity_hull", "interval_monotone", "speed_bound", "cross_delay_position",
                           "endpoint_gronwall", "contraction", "envelope", "dstar_position_bound",
                           "dstar_sup_bound", "lyapunov_dominates", "lyapunov_nonincreasing",
                           "lyapunov_nonincreasing_after_2tau"}) {
    REQUIRE(report.find(name) != nullptr);
  }
  CHECK(report.find("missing") == nullptr);
  CHECK_FALSE(report.find("lyapunov_nonincreasing")->in_verdict);
  CHECK(report.find("contraction")->in_verdict);
}
