#include "flockcert/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <string>

namespace flockcert {

KernelSpec KernelSpec::power_law(double amplitude, double sigma, double beta) {
  if (!(std::isfinite(amplitude) && amplitude > 0.0))
    throw std::invalid_argument("power_law: amplitude must be positive and finite");
  if (!(std::isfinite(sigma) && sigma > 0.0))
    throw std::invalid_argument("power_law: sigma must be positive and finite");
  if (!(std::isfinite(beta) && beta >= 0.0))
    throw std::invalid_argument("power_law: beta must be non-negative and finite");
  return KernelSpec(PowerLaw{amplitude, sigma, beta});
}

KernelSpec KernelSpec::tabulated(std::vector<double> radii, std::vector<double> values,
                                 double lipschitz) {
  if (radii.empty() || radii.size() != values.size())
    throw std::invalid_argument("tabulated: radii and values must be non-empty and equal length");
  if (radii.front() != 0.0) throw std::invalid_argument("tabulated: radii must start at 0");
  if (!(std::isfinite(lipschitz) && lipschitz >= 0.0))
    throw std::invalid_argument("tabulated: lipschitz bound must be non-negative and finite");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(radii[i]) || !std::isfinite(values[i]))
      throw std::invalid_argument("tabulated: non-finite sample");
    if (values[i] < 0.0) throw std::invalid_argument("tabulated: values must be non-negative");
    if (i == 0) continue;
    if (!(radii[i] > radii[i - 1]))
      throw std::invalid_argument("tabulated: radii must be strictly increasing");
    if (values[i] > values[i - 1])
      throw std::invalid_argument("tabulated: values must be non-increasing");
    const double slope = (values[i - 1] - values[i]) / (radii[i] - radii[i - 1]);
    if (slope > lipschitz * (1.0 + 1e-12))
      throw std::invalid_argument("tabulated: declared lipschitz bound " + std::to_string(lipschitz) +
                                  " is below segment slope " + std::to_string(slope));
  }
  return KernelSpec(Tabulated{std::move(radii), std::move(values), lipschitz});
}

double KernelSpec::operator()(double r) const {
  if (!(r >= 0.0)) throw std::domain_error("psi: radius must be non-negative");
  if (const auto* p = std::get_if<PowerLaw>(&params_)) {
    if (p->beta == 0.0) return p->amplitude;
    return p->amplitude * std::pow(p->sigma * p->sigma + r * r, -p->beta);
  }
  const auto& t = std::get<Tabulated>(params_);
  if (r >= t.radii.back()) return t.values.back();
  const auto upper = std::upper_bound(t.radii.begin(), t.radii.end(), r);
  const auto i = static_cast<std::size_t>(std::distance(t.radii.begin(), upper));
  const double w = (r - t.radii[i - 1]) / (t.radii[i] - t.radii[i - 1]);
  return t.values[i - 1] + w * (t.values[i] - t.values[i - 1]);
}

double psi_eval(const KernelSpec& kernel, double r) { return kernel(r); }

double psi_sup(const KernelSpec& kernel) { return kernel(0.0); }

bool psi_integral_diverges(const KernelSpec& kernel) {
  if (kernel.is_power_law()) return kernel.as_power_law().beta <= 0.5;
  return kernel.as_tabulated().values.back() > 0.0;
}

double psi_lipschitz(const KernelSpec& kernel) {
  if (!kernel.is_power_law()) return kernel.as_tabulated().lipschitz;
  const auto& p = kernel.as_power_law();
  if (p.beta == 0.0) return 0.0;
  // |psi'(r)| = 2 beta A r (sigma^2 + r^2)^(-beta-1) peaks at r^2 = sigma^2 / (2 beta + 1).
  const double s2 = p.sigma * p.sigma;
  const double r_peak = p.sigma / std::sqrt(2.0 * p.beta + 1.0);
  const double base = s2 * (2.0 * p.beta + 2.0) / (2.0 * p.beta + 1.0);
  return 2.0 * p.beta * p.amplitude * r_peak * std::pow(base, -p.beta - 1.0);
}

}  // namespace flockcert
