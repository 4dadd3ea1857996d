#pragma once

// Per-axis sliding-mode formation controller with variable performance
// boundaries, actuator saturation and the anti-windup auxiliary system, plus
// the maps from commanded accelerations to physical UAV/UGV inputs.

#include "ppcform/dynamics.hpp"
#include "ppcform/ppc.hpp"

namespace ppcform {

/// Base half-widths of the tracking corridor and the auxiliary-system pole.
struct CorridorParams {
  double delta1 = 1.0;   ///< lower base half-width
  double delta2 = 1.0;   ///< upper base half-width
  double omega_a = 8.0;  ///< rad/s, double pole of the auxiliary filter
  bool operator==(const CorridorParams&) const = default;
};

/// Auxiliary (anti-windup) filter driven by the saturation deficit.
struct AuxiliaryState {
  double q1 = 0.0;
  double q2 = 0.0;
};

/// Corridor collapses when either half-width drops to this value.
inline constexpr double kCorridorCollapse = 0.01;

struct Corridor {
  double lower_delta = 1.0;  ///< delta1 - x_a
  double upper_delta = 1.0;  ///< delta2 + x_a
  double lo = 0.0;           ///< -lower_delta * rho_eps
  double hi = 0.0;           ///< upper_delta * rho_eps
  double rho = 0.0;
  double xa = 0.0;  ///< q1 / rho_eps
};

/// Current corridor. Throws CorridorCollapse when a half-width is <= 0.01.
Corridor boundaries(const AuxiliaryState& aux, const CorridorParams& params,
                    const PerformanceProfile& rho_eps, double t);

/// q1' = q2, q2' = -w^2 q1 - 2 w q2 + du.
AuxiliaryState aux_step(const AuxiliaryState& aux, double du, double omega_a, double dt);

struct TrackingError {
  double e_p = 0.0;
  double e_v = 0.0;
};

/// Transformed tracking error, its derivative, and the collected remainder
/// of its second derivative.
struct TransformedError {
  double eps = 0.0;
  double eps_dot = 0.0;
  double delta = 0.0;  ///< terms of eps'' not multiplied by (e_v' - q2')
  double r_s = 0.0;    ///< positive slope multiplying (e_v' - q2') in eps''
  Corridor corridor;
};

TransformedError transformed_error_dynamics(const TrackingError& e, const AuxiliaryState& aux,
                                            const CorridorParams& params,
                                            const PerformanceProfile& rho_eps, double t,
                                            ClampCounter* clamps = nullptr);

struct SlidingGains {
  double lambda_s = 5.0;
  double k_s = 5.0;
  bool operator==(const SlidingGains&) const = default;
};

inline double sliding_value(const TransformedError& te, const SlidingGains& g) {
  return g.lambda_s * te.eps + te.eps_dot;
}

/// Commanded acceleration v. `zeta_v_dot` is the observer's estimate of the
/// leader acceleration and `h_v_dot` the formation feedforward. With this v,
/// s' = r_s (-k_s s + d), d being the observer's velocity-derivative error.
double control_law(const TransformedError& te, const SlidingGains& gains,
                   const AuxiliaryState& aux, const CorridorParams& params, double zeta_v_dot,
                   double h_v_dot);

struct SaturationLimits {
  double lo = -10.0;
  double hi = 10.0;
  bool valid() const { return lo < hi; }
  bool operator==(const SaturationLimits&) const = default;
};

struct Saturated {
  double u = 0.0;
  double du = 0.0;  ///< u - v
};

Saturated saturate(double v, const SaturationLimits& limits);

// ------------------------------------------------------------ input maps

struct UavCommand {
  double thrust = 0.0;  ///< U1, N
  double roll = 0.0;    ///< phi_d, rad
  double pitch = 0.0;   ///< theta_d, rad
  bool tilt_clipped = false;
};

/// Inverts the translational model at yaw psi_d; the vertical specific force
/// u_z + g must exceed 0.1 (ThrustDegenerate otherwise). Angles are clipped
/// to +-max_tilt.
UavCommand uav_input_map(const Vec3& accel, double yaw, const QuadParams& params,
                         double max_tilt);

/// Wheel torques producing the requested planar acceleration of the tracked
/// point. Throws SingularOffset if the offset L_r <= 1e-6.
WheelTorques ugv_input_map(const Vec2& accel, const UgvState& state, const UgvParams& params);

}  // namespace ppcform
