#include "ppcform/ppc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ppcform/errors.hpp"

namespace ppcform {

namespace {

double phase(const PerformanceProfile& p, double t) {
  return std::numbers::pi * t / (2.0 * p.horizon);
}

}  // namespace

double PerformanceProfile::rho(double t) const {
  if (t > horizon) return rho_inf;
  const double s = std::sin(phase(*this, t));
  if (s * rho_cap <= rho_inf) return rho_cap;
  return std::min(rho_inf / s, rho_cap);
}

RhoDerivatives PerformanceProfile::derivatives(double t) const {
  if (t > horizon) return {};
  const double th = phase(*this, t);
  const double s = std::sin(th);
  if (s * rho_cap <= rho_inf) return {};
  const double csc = 1.0 / s;
  const double cot = std::cos(th) / s;
  const double w = std::numbers::pi / (2.0 * horizon);
  return {-w * rho_inf * csc * cot, w * w * rho_inf * csc * (cot * cot + csc * csc)};
}

double transform_sym(double x, ClampCounter* clamps) {
  constexpr double limit = 1.0 - kDomainMargin;
  if (std::abs(x) > limit || std::isnan(x)) {
    x = std::isnan(x) ? 0.0 : std::copysign(limit, x);
    if (clamps) ++clamps->count;
  }
  return std::atanh(x);  // 0.5 ln((1 + x) / (1 - x)) without the cancellation
}

double inverse_transform_sym(double eps) { return std::tanh(eps); }

double clamp_asym(double x, double lower, double upper, ClampCounter* clamps) {
  if (!(lower > 0.0) || !(upper > 0.0)) {
    throw BoundaryDomainError("asymmetric transform needs positive half-widths (lower=" +
                              std::to_string(lower) + ", upper=" + std::to_string(upper) + ")");
  }
  const double lo = -lower + kDomainMargin;
  const double hi = upper - kDomainMargin;
  if (x < lo || x > hi) {
    if (clamps) ++clamps->count;
    return x < lo ? lo : hi;
  }
  return x;
}

double transform_asym(double x, double lower, double upper, ClampCounter* clamps) {
  x = clamp_asym(x, lower, upper, clamps);
  return 0.5 * std::log((x + lower) / (upper - x));
}

double asym_slope(double x, double lower, double upper) {
  return 0.5 * (1.0 / (x + lower) - 1.0 / (x - upper));
}

TransformFactors transform_factors(double x, const PerformanceProfile& profile, double t) {
  const double rho = profile.rho(t);
  return {1.0 / (rho * (1.0 + x) * (1.0 - x)), profile.derivatives(t).first / rho};
}

TransformPoint evaluate_sym(double error, const PerformanceProfile& profile, double t,
                            ClampCounter* clamps) {
  TransformPoint p;
  const double raw = error / profile.rho(t);
  ClampCounter local;
  p.eps = transform_sym(raw, &local);
  p.x = local.count ? std::copysign(1.0 - kDomainMargin, raw) : raw;
  if (clamps) clamps->count += local.count;
  const auto f = transform_factors(p.x, profile, t);
  p.r = f.r;
  p.gamma = f.gamma;
  return p;
}

}  // namespace ppcform
