#pragma once

// Plant models: virtual leader, quadrotor (full and double-integrator),
// differential-drive UGV, and the attitude inner loop.

#include <Eigen/Core>

#include "ppcform/integrator.hpp"

namespace ppcform {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// ---------------------------------------------------------------- leader

/// Climb to `climb_height` along a quintic over [0, t0] with no planar
/// motion, then cruise: p = [v_c (t - t0), A sin(w (t - t0)), h].
struct LeaderParams {
  double t0 = 5.0;
  double climb_height = 4.0;
  double cruise_speed = 1.0;
  double sway_amplitude = 2.0;
  double sway_rate = 0.5;  ///< rad/s
};

struct LeaderSample {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 u = Vec3::Zero();  ///< acceleration input u_0
};

/// Closed-form leader state; at exactly t = t0 the cruise branch applies.
LeaderSample leader_closed_form(const LeaderParams& params, double t);

struct LeaderState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

/// Integrates p' = v, v' = u_0(t) over [t, t + dt]. The planar velocity jump
/// at the climb/cruise switch is applied as a state reset at t0.
LeaderState leader_step(const LeaderParams& params, const LeaderState& state, double t, double dt);

// ------------------------------------------------------- point mass plant

/// Per-axis double integrator x'' = u (the control-design model).
struct PointMassAxis {
  double p = 0.0;
  double v = 0.0;
};

PointMassAxis point_mass_step(const PointMassAxis& state, double u, double dt);

// ------------------------------------------------------------- quadrotor

struct QuadParams {
  double mass = 1.5;
  double ixx = 0.02;
  double iyy = 0.02;
  double izz = 0.04;
  double rotor_inertia = 0.0;         ///< I_r
  double residual_rotor_speed = 0.0;  ///< omega_bar
  double gravity = 9.81;
};

/// [x y z  vx vy vz  phi theta psi  phi' theta' psi']
using QuadState = Eigen::Matrix<double, 12, 1>;

struct QuadInputs {
  double thrust = 0.0;  ///< U1
  double roll = 0.0;    ///< U2
  double pitch = 0.0;   ///< U3
  double yaw = 0.0;     ///< U4
};

QuadState quad_derivative(const QuadParams& params, const QuadState& x, const QuadInputs& u);
QuadState quad_full_step(const QuadParams& params, const QuadState& x, const QuadInputs& u,
                         double dt);

/// Translational acceleration produced by (U1, phi, theta, psi).
Vec3 quad_translational_accel(const QuadParams& params, double thrust, double roll,
                              double pitch, double yaw);

struct AttitudeGains {
  double kp = 2500.0;
  double kd = 100.0;
};

/// Feedback-linearizing attitude loop: cancels the coupling terms of the
/// rotational dynamics and imposes phi'' = kp (phi_d - phi) - kd phi'
/// (same for theta, psi). Returns (U2, U3, U4).
Vec3 inner_loop_attitude(const QuadParams& params, const QuadState& x, const Vec3& desired,
                         const AttitudeGains& gains);

// ------------------------------------------------------------------- UGV

struct UgvParams {
  double mass = 1.0;          ///< m_g
  double inertia = 0.02;      ///< J_g
  double wheel_radius = 0.02;
  double half_track = 0.1;    ///< d
  double hand_offset = 0.2;   ///< L_r
};

/// [x y theta v omega], (x, y) being the offset point the model tracks.
using UgvState = Eigen::Matrix<double, 5, 1>;

struct WheelTorques {
  double right = 0.0;  ///< T1
  double left = 0.0;   ///< T2
};

UgvState ugv_derivative(const UgvParams& params, const UgvState& x, const WheelTorques& torque);
UgvState ugv_step(const UgvParams& params, const UgvState& x, const WheelTorques& torque,
                  double dt);

/// Planar velocity of the tracked point.
Vec2 ugv_point_velocity(const UgvParams& params, const UgvState& x);
/// Planar acceleration of the tracked point under the given torques.
Vec2 ugv_point_accel(const UgvParams& params, const UgvState& x, const WheelTorques& torque);

}  // namespace ppcform
