#pragma once

#include <cmath>
#include <vector>

#include "flockcert/kernel.hpp"

namespace flockcert {

/// Composite Simpson rule on [a, b]; `panels` is rounded up to an even count.
template <typename F>
double simpson(F&& f, double a, double b, int panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  if (a == b) return 0.0;
  const double h = (b - a) / panels;
  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < panels; ++i) {
    const double v = f(a + i * h);
    if (i % 2 != 0) {
      odd += v;
    } else {
      even += v;
    }
  }
  return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

/// Running integral of uniformly spaced samples: out[i] = integral from x_0 to x_i.
///
/// Even indices use composite Simpson; odd indices add the first half of the
/// parabola through the next three samples (or the trapezoid on the last sample).
std::vector<double> cumulative_simpson(const std::vector<double>& samples, double spacing);

/// The capped influence f(s) = min{ e^{-K tau} psi(s), e^{-2 K tau} / tau }.
///
/// This is the integrand that bounds the position diameter; `integral` splits
/// the range at the cap crossing, at table radii and at a geometric ladder so
/// that ranges spanning many orders of magnitude stay accurate.
class CappedInfluence {
 public:
  CappedInfluence(const KernelSpec& kernel, double tau);

  double operator()(double s) const;

  double scale() const { return scale_; }
  double cap() const { return cap_; }
  /// Radius past which the cap stops binding; 0 if it never binds, +inf if it always does.
  double cap_release() const { return release_; }

  /// Integral over [a, b], `panels` Simpson panels on every piece.
  double integral(double a, double b, int panels = 32) const;

  /// Integral over [0, inf); +inf when psi is not integrable.
  double total(int panels = 32) const;

  const KernelSpec& kernel() const { return kernel_; }

 private:
  std::vector<double> breakpoints(double a, double b) const;

  KernelSpec kernel_;
  double scale_;
  double cap_;
  double release_;
  double ladder_;
};

}  // namespace flockcert
