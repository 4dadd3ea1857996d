#include "ppcform/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ppcform {

namespace {

struct ClimbProfile {
  double z, zd, zdd;
};

// Quintic rest-to-rest rise over [0, t0].
ClimbProfile climb(const LeaderParams& lp, double t) {
  if (lp.t0 <= 0.0) return {lp.climb_height, 0.0, 0.0};
  const double s = std::clamp(t / lp.t0, 0.0, 1.0);
  const double h = lp.climb_height;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return {h * s3 * (10.0 - 15.0 * s + 6.0 * s2),
          h / lp.t0 * 30.0 * s2 * (1.0 - 2.0 * s + s2),
          h / (lp.t0 * lp.t0) * 60.0 * s * (1.0 - 3.0 * s + 2.0 * s2)};
}

Vec3 cruise_velocity_at_switch(const LeaderParams& lp) {
  return {lp.cruise_speed, lp.sway_amplitude * lp.sway_rate, 0.0};
}

}  // namespace

LeaderSample leader_closed_form(const LeaderParams& lp, double t) {
  LeaderSample s;
  if (t < lp.t0) {
    const ClimbProfile c = climb(lp, t);
    s.p = {0.0, 0.0, c.z};
    s.v = {0.0, 0.0, c.zd};
    s.u = {0.0, 0.0, c.zdd};
    return s;
  }
  const double tau = t - lp.t0;
  const double w = lp.sway_rate;
  const double a = lp.sway_amplitude;
  s.p = {lp.cruise_speed * tau, a * std::sin(w * tau), lp.climb_height};
  s.v = {lp.cruise_speed, a * w * std::cos(w * tau), 0.0};
  s.u = {0.0, -a * w * w * std::sin(w * tau), 0.0};
  return s;
}

LeaderState leader_step(const LeaderParams& lp, const LeaderState& state, double t, double dt) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  const auto field = [&](double tt, const Vec6& x) {
    Vec6 dx;
    dx.head<3>() = x.tail<3>();
    dx.tail<3>() = leader_closed_form(lp, tt).u;
    return dx;
  };
  Vec6 x;
  x << state.p, state.v;
  const double t_end = t + dt;
  if (t < lp.t0 && lp.t0 <= t_end) {
    x = integrate(field, x, t, lp.t0 - t);
    x.tail<3>() += cruise_velocity_at_switch(lp);
    if (t_end > lp.t0) x = integrate(field, x, lp.t0, t_end - lp.t0);
  } else {
    x = integrate(field, x, t, dt);
  }
  return {x.head<3>(), x.tail<3>()};
}

PointMassAxis point_mass_step(const PointMassAxis& state, double u, double dt) {
  const auto field = [u](double, const Vec2& x) { return Vec2(x(1), u); };
  const Vec2 next = integrate(field, Vec2(state.p, state.v), 0.0, dt);
  return {next(0), next(1)};
}

Vec3 quad_translational_accel(const QuadParams& qp, double thrust, double roll, double pitch,
                              double yaw) {
  const double cf = std::cos(roll), sf = std::sin(roll);
  const double ct = std::cos(pitch), st = std::sin(pitch);
  const double cp = std::cos(yaw), sp = std::sin(yaw);
  const double f = thrust / qp.mass;
  return {(cf * st * cp + sf * sp) * f, (cf * st * sp - sf * cp) * f, cf * ct * f - qp.gravity};
}

QuadState quad_derivative(const QuadParams& qp, const QuadState& x, const QuadInputs& u) {
  QuadState dx;
  dx.segment<3>(0) = x.segment<3>(3);
  dx.segment<3>(3) = quad_translational_accel(qp, u.thrust, x(6), x(7), x(8));
  dx.segment<3>(6) = x.segment<3>(9);
  const double dphi = x(9), dtheta = x(10), dpsi = x(11);
  const double wbar = qp.residual_rotor_speed;
  dx(9) = dtheta * dpsi * (qp.iyy - qp.izz) / qp.ixx - qp.rotor_inertia / qp.ixx * dtheta * wbar +
          u.roll / qp.ixx;
  dx(10) = dphi * dpsi * (qp.izz - qp.ixx) / qp.iyy - qp.rotor_inertia / qp.iyy * dphi * wbar +
           u.pitch / qp.iyy;
  dx(11) = dphi * dtheta * (qp.ixx - qp.iyy) / qp.izz + u.yaw / qp.izz;
  return dx;
}

QuadState quad_full_step(const QuadParams& qp, const QuadState& x, const QuadInputs& u,
                         double dt) {
  return integrate([&](double, const QuadState& s) { return quad_derivative(qp, s, u); }, x, 0.0,
                   dt);
}

Vec3 inner_loop_attitude(const QuadParams& qp, const QuadState& x, const Vec3& desired,
                         const AttitudeGains& g) {
  const double dphi = x(9), dtheta = x(10), dpsi = x(11);
  const double wbar = qp.residual_rotor_speed;
  const Vec3 err = desired - x.segment<3>(6);
  const Vec3 accel = g.kp * err - g.kd * x.segment<3>(9);
  const double coupling_roll = dtheta * dpsi * (qp.iyy - qp.izz) - qp.rotor_inertia * dtheta * wbar;
  const double coupling_pitch = dphi * dpsi * (qp.izz - qp.ixx) - qp.rotor_inertia * dphi * wbar;
  const double coupling_yaw = dphi * dtheta * (qp.ixx - qp.iyy);
  return {qp.ixx * accel(0) - coupling_roll, qp.iyy * accel(1) - coupling_pitch,
          qp.izz * accel(2) - coupling_yaw};
}

UgvState ugv_derivative(const UgvParams& gp, const UgvState& x, const WheelTorques& torque) {
  const double c = std::cos(x(2)), s = std::sin(x(2));
  const double v = x(3), w = x(4);
  UgvState dx;
  dx(0) = v * c - gp.hand_offset * w * s;
  dx(1) = v * s + gp.hand_offset * w * c;
  dx(2) = w;
  dx(3) = (torque.right + torque.left) / (gp.mass * gp.wheel_radius);
  dx(4) = (torque.right - torque.left) * gp.half_track / (gp.inertia * gp.wheel_radius);
  return dx;
}

UgvState ugv_step(const UgvParams& gp, const UgvState& x, const WheelTorques& torque, double dt) {
  return integrate([&](double, const UgvState& s) { return ugv_derivative(gp, s, torque); }, x,
                   0.0, dt);
}

Vec2 ugv_point_velocity(const UgvParams& gp, const UgvState& x) {
  const UgvState dx = ugv_derivative(gp, x, {});
  return {dx(0), dx(1)};
}

Vec2 ugv_point_accel(const UgvParams& gp, const UgvState& x, const WheelTorques& torque) {
  const UgvState dx = ugv_derivative(gp, x, torque);
  const double c = std::cos(x(2)), s = std::sin(x(2));
  const double v = x(3), w = x(4), vd = dx(3), wd = dx(4);
  const double along = vd - gp.hand_offset * w * w;
  const double across = gp.hand_offset * wd + v * w;
  return {along * c - across * s, along * s + across * c};
}

}  // namespace ppcform
