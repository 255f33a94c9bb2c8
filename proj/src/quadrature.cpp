#include "flockcert/quadrature.hpp"

#include <algorithm>
#include <limits>

namespace flockcert {

std::vector<double> cumulative_simpson(const std::vector<double>& samples, double spacing) {
  const std::size_t n = samples.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 2; i < n; i += 2) {
    out[i] = out[i - 2] +
             spacing / 3.0 * (samples[i - 2] + 4.0 * samples[i - 1] + samples[i]);
  }
  for (std::size_t i = 1; i < n; i += 2) {
    if (i + 1 < n) {
      out[i] = out[i - 1] +
               spacing / 12.0 * (5.0 * samples[i - 1] + 8.0 * samples[i] - samples[i + 1]);
    } else {
      out[i] = out[i - 1] + 0.5 * spacing * (samples[i - 1] + samples[i]);
    }
  }
  return out;
}

CappedInfluence::CappedInfluence(const KernelSpec& kernel, double tau)
    : kernel_(kernel),
      scale_(std::exp(-psi_sup(kernel) * tau)),
      cap_(std::exp(-2.0 * psi_sup(kernel) * tau) / tau),
      release_(0.0),
      ladder_(1.0) {
  const double top = scale_ * psi_sup(kernel_);
  if (kernel_.is_power_law()) {
    const auto& p = kernel_.as_power_law();
    ladder_ = p.sigma;
    if (top <= cap_) {
      release_ = 0.0;
    } else if (p.beta == 0.0) {
      release_ = std::numeric_limits<double>::infinity();
    } else {
      // scale * A * (sigma^2 + s^2)^(-beta) = cap
      const double s2 = std::pow(scale_ * p.amplitude / cap_, 1.0 / p.beta) - p.sigma * p.sigma;
      release_ = s2 > 0.0 ? std::sqrt(s2) : 0.0;
    }
    return;
  }

  const auto& t = kernel_.as_tabulated();
  if (t.radii.size() > 1) ladder_ = t.radii[1];
  if (top <= cap_) {
    release_ = 0.0;
  } else if (scale_ * t.values.back() >= cap_) {
    release_ = std::numeric_limits<double>::infinity();
  } else {
    for (std::size_t i = 1; i < t.radii.size(); ++i) {
      const double lo = scale_ * t.values[i - 1];
      const double hi = scale_ * t.values[i];
      if (lo >= cap_ && hi < cap_) {
        const double w = (lo - cap_) / (lo - hi);
        release_ = t.radii[i - 1] + w * (t.radii[i] - t.radii[i - 1]);
        break;
      }
    }
  }
}

double CappedInfluence::operator()(double s) const {
  return std::min(scale_ * kernel_(s), cap_);
}

std::vector<double> CappedInfluence::breakpoints(double a, double b) const {
  std::vector<double> pts{a, b};
  auto add = [&](double x) {
    if (x > a && x < b) pts.push_back(x);
  };
  add(release_);
  double ladder_end = b;
  if (!kernel_.is_power_law()) {
    const auto& radii = kernel_.as_tabulated().radii;
    for (double r : radii) add(r);
    ladder_end = std::min(b, radii.back());
  }
  for (double x = ladder_; x < ladder_end; x *= 2.0) add(x);
  std::sort(pts.begin(), pts.end());
  return pts;
}

double CappedInfluence::integral(double a, double b, int panels) const {
  if (b <= a) return 0.0;
  const auto pts = breakpoints(a, b);
  double sum = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    sum += simpson(*this, pts[i - 1], pts[i], panels);
  }
  return sum;
}

double CappedInfluence::total(int panels) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (psi_integral_diverges(kernel_)) return inf;
  if (!kernel_.is_power_law()) return integral(0.0, kernel_.as_tabulated().radii.back(), panels);

  // Uncapped tail has a closed form: int_0^inf (sigma^2 + s^2)^(-beta) ds
  //   = sigma^(1 - 2 beta) sqrt(pi) Gamma(beta - 1/2) / (2 Gamma(beta)).
  const auto& p = kernel_.as_power_law();
  const double whole = p.amplitude * std::pow(p.sigma, 1.0 - 2.0 * p.beta) * std::sqrt(M_PI) *
                       std::tgamma(p.beta - 0.5) / (2.0 * std::tgamma(p.beta));
  if (release_ == 0.0) return scale_ * whole;
  double head = 0.0;
  const auto pts = breakpoints(0.0, release_);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    head += simpson([&](double s) { return kernel_(s); }, pts[i - 1], pts[i], panels);
  }
  return cap_ * release_ + scale_ * (whole - head);
}

}  // namespace flockcert
