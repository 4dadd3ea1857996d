#pragma once

// Performance boundary functions and the logarithmic error transformations.

#include <cstddef>

namespace ppcform {

struct RhoDerivatives {
  double first = 0.0;
  double second = 0.0;
};

/// rho(t) = rho_inf * csc(pi t / 2T) for t <= T, rho_inf afterwards.
/// The csc branch diverges at t = 0, so it is capped at rho_cap.
struct PerformanceProfile {
  double rho_inf = 0.1;
  double horizon = 5.0;  ///< T, seconds
  double rho_cap = 100.0;

  static PerformanceProfile with_default_cap(double rho_inf, double horizon) {
    return {rho_inf, horizon, 1e3 * rho_inf};
  }

  double rho(double t) const;
  /// Analytic first and second time derivatives; zero on the cap plateau and
  /// on the constant branch.
  RhoDerivatives derivatives(double t) const;
  /// gamma = rho_dot / rho.
  double gamma(double t) const { return derivatives(t).first / rho(t); }
  /// Largest value rho takes, i.e. rho_bar.
  double peak() const { return rho_cap; }
  bool valid() const { return rho_inf > 0.0 && horizon > 0.0 && rho_cap >= rho_inf; }
};

/// Counts inputs pushed back inside the transform domain.
struct ClampCounter {
  std::size_t count = 0;
};

inline constexpr double kDomainMargin = 1e-9;

/// epsilon = 0.5 ln((1 + x) / (1 - x)); |x| is clamped to 1 - 1e-9.
double transform_sym(double x, ClampCounter* clamps = nullptr);
double inverse_transform_sym(double eps);

/// Asymmetric corridor -lower < x < upper:
/// epsilon = 0.5 ln((x + lower) / (upper - x)).
/// Throws BoundaryDomainError unless lower > 0 and upper > 0.
double transform_asym(double x, double lower, double upper, ClampCounter* clamps = nullptr);
double clamp_asym(double x, double lower, double upper, ClampCounter* clamps = nullptr);
/// d epsilon / dx of transform_asym: 0.5 (1/(x + lower) - 1/(x - upper)).
double asym_slope(double x, double lower, double upper);

struct TransformFactors {
  double r = 0.0;      ///< (d S / dx) / rho
  double gamma = 0.0;  ///< rho_dot / rho
};

/// r = 1 / (rho (1 + x)(1 - x)), gamma = rho_dot / rho.
TransformFactors transform_factors(double x, const PerformanceProfile& profile, double t);

/// Everything the observer needs about one transformed error.
struct TransformPoint {
  double x = 0.0;
  double eps = 0.0;
  double r = 0.0;
  double gamma = 0.0;
};

/// Normalizes `error` by rho(t), clamps, and evaluates the symmetric transform.
TransformPoint evaluate_sym(double error, const PerformanceProfile& profile, double t,
                            ClampCounter* clamps = nullptr);

}  // namespace ppcform
