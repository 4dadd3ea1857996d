#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ppcform/controller.hpp"
#include "ppcform/errors.hpp"

using namespace ppcform;

namespace {

const PerformanceProfile kTrack = PerformanceProfile::with_default_cap(0.3, 5.0);

// Transformed tracking error written directly from the corridor definition.
double eps_oracle(double e_p, double q1, const CorridorParams& c, const PerformanceProfile& prof,
                  double t) {
  const double rho = prof.rho(t);
  const double xa = q1 / rho;
  const double x = e_p / rho;
  return 0.5 * std::log((x + c.delta1 - xa) / (c.delta2 + xa - x));
}

}  // namespace

TEST_CASE("corridor boundaries") {
  const CorridorParams c{1.0, 1.0, 8.0};
  const Corridor sym = boundaries({0.0, 0.0}, c, kTrack, 2.0);
  CHECK(sym.lower_delta == 1.0);
  CHECK(sym.upper_delta == 1.0);

  const Corridor widened = boundaries({0.3 * 0.3, 0.0}, c, kTrack, 6.0);
  CHECK(widened.xa == doctest::Approx(0.3));
  CHECK(widened.lower_delta == doctest::Approx(0.7));
  CHECK(widened.upper_delta == doctest::Approx(1.3));
  CHECK(widened.lo == doctest::Approx(-0.21));
  CHECK(widened.hi == doctest::Approx(0.39));

  CHECK_THROWS_AS(boundaries({0.3 * 0.995, 0.0}, c, kTrack, 6.0), CorridorCollapse);
  CHECK_THROWS_AS(boundaries({-0.3 * 0.995, 0.0}, c, kTrack, 6.0), CorridorCollapse);
  CHECK_NOTHROW(boundaries({0.3 * 0.98, 0.0}, c, kTrack, 6.0));
}

TEST_CASE("auxiliary filter: equilibrium, DC gain and impulse decay") {
  const double w = 8.0, dt = 1e-3;
  AuxiliaryState q{};
  for (int k = 0; k < 100; ++k) q = aux_step(q, 0.0, w, dt);
  CHECK(q.q1 == 0.0);
  CHECK(q.q2 == 0.0);

  const double c = 2.5;
  for (int k = 0; k < 5000; ++k) q = aux_step(q, c, w, dt);
  CHECK(q.q1 == doctest::Approx(c / (w * w)).epsilon(1e-9));
  CHECK(std::abs(q.q2) < 1e-9);

  // Unit impulse leaves q2(0+) = 1; the response is q1 = t exp(-w t).
  q = {0.0, 1.0};
  double t = 0.0, peak = 0.0;
  double at_seven = 0.0;
  double below_one_percent = -1.0;
  while (t < 12.0 / w) {
    q = aux_step(q, 0.0, w, dt);
    t += dt;
    CHECK(std::abs(q.q1 - t * std::exp(-w * t)) < 1e-10);
    peak = std::max(peak, std::abs(q.q1));
    if (std::abs(t - 7.0 / w) < 0.5 * dt) at_seven = std::abs(q.q1);
    if (below_one_percent < 0.0 && t > 1.0 / w && std::abs(q.q1) < 0.01 * peak) below_one_percent = t;
  }
  CHECK(peak == doctest::Approx(1.0 / (w * std::numbers::e)).epsilon(1e-6));
  // Envelope of the double pole: ratio to the peak is w t e^(1 - w t).
  CHECK(at_seven / peak == doctest::Approx(7.0 * std::exp(-6.0)).epsilon(1e-3));
  double tau = 7.0;  // solve tau e^(1 - tau) = 0.01 by bisection
  for (double lo = 7.0, hi = 9.0; hi - lo > 1e-12;) {
    tau = 0.5 * (lo + hi);
    (tau * std::exp(1.0 - tau) > 0.01 ? lo : hi) = tau;
  }
  CHECK(below_one_percent == doctest::Approx(tau / w).epsilon(1e-3));
}

TEST_CASE("transformed error vanishes at perfect tracking") {
  const CorridorParams c{1.0, 1.0, 8.0};
  for (double t : {0.5, 3.0, 5.0, 9.0}) {
    const TransformedError te = transformed_error_dynamics({0.0, 0.0}, {}, c, kTrack, t);
    CHECK(te.eps == 0.0);
    CHECK(te.eps_dot == 0.0);
    CHECK(te.delta == 0.0);
    CHECK(te.r_s > 0.0);
  }
}

TEST_CASE("transformed error rates match central differences") {
  const CorridorParams c{1.0, 1.0, 8.0};
  const AuxiliaryState frozen{0.05, 0.0};
  const auto ep = [](double t) { return 0.1 * std::sin(t); };
  const auto ev = [](double t) { return 0.1 * std::cos(t); };
  const auto ea = [](double t) { return -0.1 * std::sin(t); };
  const auto eps = [&](double t) { return eps_oracle(ep(t), frozen.q1, c, kTrack, t); };
  double worst1 = 0.0, worst2 = 0.0;
  for (double t = 0.55; t < 12.0; t += 0.0917) {
    if (std::abs(t - kTrack.horizon) < 0.01) continue;
    const TransformedError te = transformed_error_dynamics({ep(t), ev(t)}, frozen, c, kTrack, t);
    CHECK(te.eps == doctest::Approx(eps(t)).epsilon(1e-13));
    const double h1 = 1e-5;
    const double fd1 = (eps(t + h1) - eps(t - h1)) / (2.0 * h1);
    const double h2 = 1e-3;
    const double fd2 = (eps(t + h2) - 2.0 * eps(t) + eps(t - h2)) / (h2 * h2);
    const double eps_ddot = te.delta + te.r_s * (ea(t) - 0.0);
    worst1 = std::max(worst1, std::abs(te.eps_dot - fd1) / std::max(std::abs(fd1), 1e-3));
    worst2 = std::max(worst2, std::abs(eps_ddot - fd2) / std::max(std::abs(fd2), 1e-3));
  }
  MESSAGE("worst relative eps' / eps'' mismatch " << worst1 << " / " << worst2);
  CHECK(worst1 < 1e-4);
  CHECK(worst2 < 1e-3);
}

TEST_CASE("designed control closes the sliding dynamics (finite-difference oracle)") {
  // Along the flow with the input held at v, the oracle differentiates
  // s = lambda eps + eps' numerically and compares with r_s (-k_s s + d).
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const CorridorParams c{0.6 + u(gen), 0.6 + u(gen), 2.0 + 10.0 * u(gen)};
    const SlidingGains g{1.0 + 9.0 * u(gen), 1.0 + 9.0 * u(gen)};
    double t = 0.3 + 12.0 * u(gen);
    if (std::abs(t - kTrack.horizon) < 0.05) t += 0.1;
    const double rho = kTrack.rho(t);
    const AuxiliaryState aux{(u(gen) - 0.5) * 0.4 * rho, u(gen) - 0.5};
    const double xa = aux.q1 / rho;
    const double lower = c.delta1 - xa, upper = c.delta2 + xa;
    const double e_p = rho * (-lower + (lower + upper) * (0.1 + 0.8 * u(gen)));
    const double e_v = 2.0 * u(gen) - 1.0;
    const double zeta_dot = 2.0 * u(gen) - 1.0, true_accel = 2.0 * u(gen) - 1.0;
    const double h_dot = 2.0 * u(gen) - 1.0;

    const TransformedError te = transformed_error_dynamics({e_p, e_v}, aux, c, kTrack, t);
    const double v = control_law(te, g, aux, c, zeta_dot, h_dot);
    const double e_acc = v - h_dot - true_accel;
    const double q2_dot = -c.omega_a * c.omega_a * aux.q1 - 2.0 * c.omega_a * aux.q2;
    const auto eps_at = [&](double tau) {
      return eps_oracle(e_p + e_v * tau + 0.5 * e_acc * tau * tau,
                        aux.q1 + aux.q2 * tau + 0.5 * q2_dot * tau * tau, c, kTrack, t + tau);
    };
    const double h = 1e-3;
    const double f2 = eps_at(2 * h), f1 = eps_at(h), f0 = eps_at(0.0), m1 = eps_at(-h),
                 m2 = eps_at(-2 * h);
    const double d1 = (-f2 + 8.0 * f1 - 8.0 * m1 + m2) / (12.0 * h);
    const double d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * m1 - m2) / (12.0 * h * h);
    const double s = g.lambda_s * f0 + d1;
    const double s_dot = g.lambda_s * d1 + d2;
    const double expected = te.r_s * (-g.k_s * s + (zeta_dot - true_accel));
    CHECK(te.r_s > 0.0);
    worst = std::max(worst, std::abs(s_dot - expected) / (1.0 + std::abs(s_dot)));
  }
  MESSAGE("worst finite-difference closure mismatch " << worst);
  CHECK(worst < 1e-5);
}

TEST_CASE("pure feedforward at perfect tracking") {
  const CorridorParams c{1.0, 1.0, 8.0};
  const TransformedError te = transformed_error_dynamics({0.0, 0.0}, {}, c, kTrack, 7.0);
  CHECK(control_law(te, {5.0, 5.0}, {}, c, 0.4, -1.1) == doctest::Approx(-0.7).epsilon(1e-15));
}

TEST_CASE("saturation") {
  const SaturationLimits lim{-2.0, 2.0};
  CHECK(saturate(3.0, lim).u == 2.0);
  CHECK(saturate(3.0, lim).du == -1.0);
  CHECK(saturate(1.5, lim).u == 1.5);
  CHECK(saturate(1.5, lim).du == 0.0);
  CHECK(saturate(-5.0, lim).u == -2.0);
  CHECK(saturate(-5.0, lim).du == 3.0);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(gen);
    const double once = saturate(v, lim).u;
    CHECK(saturate(once, lim).u == once);
    CHECK(saturate(once, lim).du == 0.0);
  }
}

TEST_CASE("UAV input map") {
  const QuadParams qp;
  const double tilt = std::numbers::pi / 6.0;
  const UavCommand hover = uav_input_map(Vec3::Zero(), 0.0, qp, tilt);
  CHECK(hover.thrust == doctest::Approx(qp.mass * qp.gravity).epsilon(1e-15));
  CHECK(hover.roll == 0.0);
  CHECK(hover.pitch == 0.0);
  CHECK_FALSE(hover.tilt_clipped);
  CHECK_THROWS_AS(uav_input_map(Vec3(0.0, 0.0, -qp.gravity + 0.05), 0.0, qp, tilt),
                  ThrustDegenerate);

  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int tested = 0;
  while (tested < 10000) {
    const Vec3 a(6.0 * u(gen), 6.0 * u(gen), 6.0 * u(gen));
    const double yaw = std::numbers::pi * u(gen);
    const UavCommand cmd = uav_input_map(a, yaw, qp, tilt);
    if (cmd.tilt_clipped) continue;
    ++tested;
    const Vec3 back = quad_translational_accel(qp, cmd.thrust, cmd.roll, cmd.pitch, yaw);
    worst = std::max(worst, (back - a).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);

  double largest = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double phi = tilt * u(gen), theta = tilt * u(gen), psi = std::numbers::pi * u(gen);
    const double cx = std::cos(phi) * std::sin(theta) * std::cos(psi) + std::sin(phi) * std::sin(psi);
    largest = std::max(largest, cx * cx);
  }
  CHECK(largest <= 7.0 / 16.0);
  CHECK(largest > 0.43);
}

TEST_CASE("UGV input map") {
  const UgvParams p;
  UgvState rest = UgvState::Zero();
  const WheelTorques aligned = ugv_input_map(Vec2(1.0, 0.0), rest, p);
  CHECK(aligned.right == doctest::Approx(p.mass * p.wheel_radius / 2.0).epsilon(1e-15));
  CHECK(aligned.left == doctest::Approx(p.mass * p.wheel_radius / 2.0).epsilon(1e-15));
  const WheelTorques idle = ugv_input_map(Vec2::Zero(), rest, p);
  CHECK(idle.right == 0.0);
  CHECK(idle.left == 0.0);

  UgvParams bad = p;
  bad.hand_offset = 1e-7;
  CHECK_THROWS_AS(ugv_input_map(Vec2(1.0, 0.0), rest, bad), SingularOffset);

  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    UgvState x;
    x << u(gen), u(gen), std::numbers::pi * u(gen), 2.0 * u(gen), 3.0 * u(gen);
    const WheelTorques tq{0.1 * u(gen), 0.1 * u(gen)};
    const Vec2 a = ugv_point_accel(p, x, tq);
    const WheelTorques back = ugv_input_map(a, x, p);
    worst = std::max({worst, std::abs(back.right - tq.right), std::abs(back.left - tq.left)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("impulse response below 1% of peak within 7/omega") {
  const double w = 8.0, dt = 1e-4;
  AuxiliaryState q{0.0, 1.0};
  double t = 0.0, peak = 0.0, last_above = 0.0;
  while (t < 12.0 / w) {
    q = aux_step(q, 0.0, w, dt);
    t += dt;
    peak = std::max(peak, std::abs(q.q1));
    if (std::abs(q.q1) >= 0.01 * peak) last_above = t;
  }
  MESSAGE("q1 last at or above 1% of peak at " << last_above * w << " / omega");
  CHECK(last_above <= 7.0 / w);
}
