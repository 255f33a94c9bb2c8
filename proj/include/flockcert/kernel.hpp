#pragma once

#include <variant>
#include <vector>

namespace flockcert {

/// Classical power-law influence psi(r) = amplitude / (sigma^2 + r^2)^beta.
struct PowerLaw {
  double amplitude = 1.0;
  double sigma = 1.0;
  double beta = 0.5;

  bool operator==(const PowerLaw&) const = default;
};

/// Piecewise-linear influence through (radii[i], values[i]), held constant past the last radius.
struct Tabulated {
  std::vector<double> radii;
  std::vector<double> values;
  double lipschitz = 0.0;

  bool operator==(const Tabulated&) const = default;
};

/// A validated influence function: non-negative, non-increasing and Lipschitz.
///
/// Construction through `power_law` / `tabulated` rejects parameter sets that
/// violate any of those properties (std::invalid_argument), so every member
/// function below is total on r >= 0.
class KernelSpec {
 public:
  static KernelSpec power_law(double amplitude, double sigma, double beta);
  static KernelSpec tabulated(std::vector<double> radii, std::vector<double> values,
                              double lipschitz);

  bool is_power_law() const { return std::holds_alternative<PowerLaw>(params_); }
  const PowerLaw& as_power_law() const { return std::get<PowerLaw>(params_); }
  const Tabulated& as_tabulated() const { return std::get<Tabulated>(params_); }

  /// psi(r); throws std::domain_error for r < 0.
  double operator()(double r) const;

  bool operator==(const KernelSpec&) const = default;

 private:
  explicit KernelSpec(std::variant<PowerLaw, Tabulated> params) : params_(std::move(params)) {}

  std::variant<PowerLaw, Tabulated> params_;
};

double psi_eval(const KernelSpec& kernel, double r);

/// K = psi(0), the supremum of psi.
double psi_sup(const KernelSpec& kernel);

/// True when the integral of psi over [0, inf) is infinite.
bool psi_integral_diverges(const KernelSpec& kernel);

/// A global Lipschitz bound. Exact for the power law, the declared bound for tables.
double psi_lipschitz(const KernelSpec& kernel);

}  // namespace flockcert
