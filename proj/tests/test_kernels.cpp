#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "flockcert/kernel.hpp"
#include "flockcert/quadrature.hpp"
#include "oracles.hpp"

using namespace flockcert;

namespace {

std::vector<KernelSpec> kernel_zoo() {
  return {KernelSpec::power_law(1.0, 1.0, 0.5),  KernelSpec::power_law(1.0, 1.0, 0.0),
          KernelSpec::power_law(2.0, 2.0, 1.0),  KernelSpec::power_law(0.3, 0.1, 0.75),
          KernelSpec::power_law(5.0, 3.0, 0.25), KernelSpec::tabulated({0, 1, 2}, {3, 2, 1}, 1.0),
          KernelSpec::tabulated({0, 0.5, 4, 9}, {1, 1, 0.2, 0}, 0.25)};
}

}  // namespace

TEST_CASE("power law evaluates the closed form") {
  CHECK(psi_eval(KernelSpec::power_law(1, 1, 0), 7.3) == 1.0);
  CHECK(psi_eval(KernelSpec::power_law(1, 1, 0.5), 0.0) == 1.0);
  CHECK(psi_eval(KernelSpec::power_law(1, 1, 0.5), 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const double a = oracle::uniform(rng, 0.1, 5), s = oracle::uniform(rng, 0.1, 3);
    const double b = oracle::uniform(rng, 0, 2), r = oracle::uniform(rng, 0, 50);
    CHECK(psi_eval(KernelSpec::power_law(a, s, b), r) ==
          doctest::Approx(oracle::power_law(a, s, b, r)).epsilon(1e-13));
  }
}

TEST_CASE("negative radius is a domain error") {
  CHECK_THROWS_AS(psi_eval(KernelSpec::power_law(1, 1, 0.5), -1e-9), std::domain_error);
  CHECK_THROWS_AS(psi_eval(KernelSpec::tabulated({0, 1}, {1, 0}, 1), -1.0), std::domain_error);
}

TEST_CASE("invalid kernels are rejected at construction") {
  CHECK_THROWS_AS(KernelSpec::power_law(0, 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::power_law(1, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::power_law(1, -1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::power_law(1, 1, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::tabulated({0, 2, 1}, {3, 2, 1}, 10), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::tabulated({0, 1, 2}, {1, 2, 1}, 10), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::tabulated({1, 2}, {1, 0}, 10), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::tabulated({0, 1}, {1, -1}, 10), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::tabulated({0, 1}, {2, 0}, 1.0), std::invalid_argument);
}

TEST_CASE("tabulated kernels interpolate linearly and hold the last value") {
  const auto k = KernelSpec::tabulated({0, 1, 3}, {4, 2, 1}, 2.0);
  CHECK(k(0.5) == doctest::Approx(3.0));
  CHECK(k(2.0) == doctest::Approx(1.5));
  CHECK(k(3.0) == 1.0);
  CHECK(k(1e6) == 1.0);
}

TEST_CASE("sup is the value at zero") {
  CHECK(psi_sup(KernelSpec::power_law(1, 1, 0.5)) == 1.0);
  CHECK(psi_sup(KernelSpec::power_law(2, 2, 1)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(psi_sup(KernelSpec::tabulated({0, 1, 2}, {3, 2, 1}, 1)) == 3.0);
  for (const auto& k : kernel_zoo()) CHECK(psi_sup(k) == psi_eval(k, 0.0));
}

TEST_CASE("integral divergence flag") {
  CHECK(psi_integral_diverges(KernelSpec::power_law(1, 1, 0.5)));
  CHECK(psi_integral_diverges(KernelSpec::power_law(1, 1, 0.0)));
  CHECK_FALSE(psi_integral_diverges(KernelSpec::power_law(1, 1, 0.51)));
  CHECK_FALSE(psi_integral_diverges(KernelSpec::tabulated({0, 1, 2}, {3, 1, 0}, 2)));
  CHECK(psi_integral_diverges(KernelSpec::tabulated({0, 1, 2}, {3, 2, 1}, 1)));
}

TEST_CASE("integral of the beta = 1/2 kernel grows without bound") {
  const auto k = KernelSpec::power_law(1, 1, 0.5);
  auto decade = [&](double a) { return simpson([&](double s) { return k(s); }, a, 10.0 * a, 20000); };
  const double near = simpson([&](double s) { return k(s); }, 0.0, 1e3, 20000);
  CHECK(near == doctest::Approx(std::asinh(1e3)).epsilon(1e-8));
  // Growth is logarithmic: every decade adds ln 10 - O(1/a^2), so no finite limit exists.
  double total = near;
  for (double a = 1e3; a < 1e6; a *= 10.0) {
    const double step = decade(a);
    CHECK(step == doctest::Approx(std::asinh(10.0 * a) - std::asinh(a)).epsilon(1e-9));
    CHECK(step >= std::log(10.0) - 1.0 / (4.0 * a * a));
    total += step;
  }
  CHECK(total == doctest::Approx(std::asinh(1e6)).epsilon(1e-8));
  CHECK(total < 10.0 * near);
}

TEST_CASE("Lipschitz bounds") {
  CHECK(psi_lipschitz(KernelSpec::power_law(1, 1, 0)) == 0.0);
  CHECK(psi_lipschitz(KernelSpec::tabulated({0, 1}, {2.5, 0}, 2.5)) == 2.5);

  // Finite-difference slope over a dense grid on [0, 100].
  const auto k = KernelSpec::power_law(1, 1, 0.5);
  double slope = 0.0;
  const double dr = 1e-4;
  for (double r = 0.0; r < 100.0; r += dr) {
    slope = std::max(slope, std::abs(oracle::power_law(1, 1, 0.5, r + dr) - oracle::power_law(1, 1, 0.5, r)) / dr);
  }
  CHECK(psi_lipschitz(k) >= slope);
  CHECK(psi_lipschitz(k) == doctest::Approx(slope).epsilon(1e-6));
}

TEST_CASE("property: kernels are non-increasing and Lipschitz on random pairs") {
  std::mt19937_64 rng(20240611);
  for (const auto& k : kernel_zoo()) {
    const double lip = psi_lipschitz(k);
    for (int i = 0; i < 10000; ++i) {
      double r1 = oracle::uniform(rng, 0.0, 20.0), r2 = oracle::uniform(rng, 0.0, 20.0);
      if (r1 > r2) std::swap(r1, r2);
      const double p1 = k(r1), p2 = k(r2);
      REQUIRE(p1 >= p2);
      REQUIRE(p2 >= 0.0);
      REQUIRE(std::abs(p1 - p2) <= lip * (r2 - r1) + 1e-12);
    }
  }
}

TEST_CASE("property: random power laws keep their invariants") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = KernelSpec::power_law(oracle::uniform(rng, 0.1, 10), oracle::uniform(rng, 0.05, 5),
                                         oracle::uniform(rng, 0, 3));
    const double lip = psi_lipschitz(k);
    for (int i = 0; i < 500; ++i) {
      double r1 = oracle::uniform(rng, 0.0, 10.0), r2 = oracle::uniform(rng, 0.0, 10.0);
      if (r1 > r2) std::swap(r1, r2);
      REQUIRE(k(r1) >= k(r2));
      REQUIRE(std::abs(k(r1) - k(r2)) <= lip * (r2 - r1) + 1e-12);
    }
  }
}
