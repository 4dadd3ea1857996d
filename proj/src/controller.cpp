#include "ppcform/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ppcform/errors.hpp"

namespace ppcform {

Corridor boundaries(const AuxiliaryState& aux, const CorridorParams& params,
                    const PerformanceProfile& rho_eps, double t) {
  Corridor c;
  c.rho = rho_eps.rho(t);
  c.xa = aux.q1 / c.rho;
  c.lower_delta = params.delta1 - c.xa;
  c.upper_delta = params.delta2 + c.xa;
  c.lo = -c.lower_delta * c.rho;
  c.hi = c.upper_delta * c.rho;
  if (!(c.lower_delta > kCorridorCollapse) || !(c.upper_delta > kCorridorCollapse)) {
    throw CorridorCollapse("tracking corridor collapsed (lower=" + std::to_string(c.lower_delta) +
                           ", upper=" + std::to_string(c.upper_delta) + ")");
  }
  return c;
}

AuxiliaryState aux_step(const AuxiliaryState& aux, double du, double omega_a, double dt) {
  const auto field = [&](double, const Vec2& q) {
    return Vec2(q(1), -omega_a * omega_a * q(0) - 2.0 * omega_a * q(1) + du);
  };
  const Vec2 next = integrate(field, Vec2(aux.q1, aux.q2), 0.0, dt);
  return {next(0), next(1)};
}

TransformedError transformed_error_dynamics(const TrackingError& e, const AuxiliaryState& aux,
                                            const CorridorParams& params,
                                            const PerformanceProfile& rho_eps, double t,
                                            ClampCounter* clamps) {
  TransformedError out;
  out.corridor = boundaries(aux, params, rho_eps, t);
  const double rho = out.corridor.rho;
  const RhoDerivatives d = rho_eps.derivatives(t);
  const double lower = out.corridor.lower_delta;
  const double upper = out.corridor.upper_delta;

  const double x = clamp_asym(e.e_p / rho, lower, upper, clamps);
  const double a = x + lower;  // > 0
  const double b = x - upper;  // < 0
  out.eps = 0.5 * std::log(a / -b);

  const double slope = 0.5 * (1.0 / a - 1.0 / b);
  // Normalized error relative to the shifted corridor centre, and its rate.
  const double pos = e.e_p - aux.q1;
  const double vel = e.e_v - aux.q2;
  const double w_dot = vel / rho - pos * d.first / (rho * rho);
  out.eps_dot = slope * w_dot;
  out.delta = 0.5 * (1.0 / (b * b) - 1.0 / (a * a)) * w_dot * w_dot +
              slope * (2.0 * pos * d.first * d.first / (rho * rho * rho) -
                       2.0 * vel * d.first / (rho * rho) - pos * d.second / (rho * rho));
  out.r_s = slope / rho;
  return out;
}

double control_law(const TransformedError& te, const SlidingGains& gains,
                   const AuxiliaryState& aux, const CorridorParams& params, double zeta_v_dot,
                   double h_v_dot) {
  const double s = sliding_value(te, gains);
  const double w = params.omega_a;
  return -gains.k_s * s + h_v_dot + zeta_v_dot - w * w * aux.q1 - 2.0 * w * aux.q2 -
         (te.delta + gains.lambda_s * te.eps_dot) / te.r_s;
}

Saturated saturate(double v, const SaturationLimits& limits) {
  const double u = std::clamp(v, limits.lo, limits.hi);
  return {u, u - v};
}

UavCommand uav_input_map(const Vec3& accel, double yaw, const QuadParams& params,
                         double max_tilt) {
  const double lift = accel(2) + params.gravity;
  if (!(lift > 0.1)) {
    throw ThrustDegenerate("vertical specific force " + std::to_string(lift) +
                           " too small for thrust inversion");
  }
  UavCommand cmd;
  cmd.thrust = params.mass * std::sqrt(accel(0) * accel(0) + accel(1) * accel(1) + lift * lift);
  const double cp = std::cos(yaw), sp = std::sin(yaw);
  const double pitch = std::atan2(accel(0) * cp + accel(1) * sp, lift);
  const double roll = std::atan2(std::cos(pitch) * (accel(0) * sp - accel(1) * cp), lift);
  cmd.pitch = std::clamp(pitch, -max_tilt, max_tilt);
  cmd.roll = std::clamp(roll, -max_tilt, max_tilt);
  cmd.tilt_clipped = cmd.pitch != pitch || cmd.roll != roll;
  return cmd;
}

WheelTorques ugv_input_map(const Vec2& accel, const UgvState& state, const UgvParams& params) {
  const double l = params.hand_offset;
  if (!(l > 1e-6)) throw SingularOffset("UGV offset L_r must exceed 1e-6");
  const double c = std::cos(state(2)), s = std::sin(state(2));
  const double v = state(3), w = state(4);
  const double r1 = accel(0) + l * w * w * c + v * w * s;
  const double r2 = accel(1) + l * w * w * s - v * w * c;
  const double v_dot = c * r1 + s * r2;
  const double w_dot = (-s * r1 + c * r2) / l;
  const double drive = params.mass * params.wheel_radius * v_dot;
  const double turn = params.inertia * params.wheel_radius * w_dot / params.half_track;
  return {0.5 * (drive + turn), 0.5 * (drive - turn)};
}

}  // namespace ppcform
