#pragma once

// Fixed-step classical Runge-Kutta scheme shared by every plant, observer
// and filter in the simulator.

#include <Eigen/Core>

#include "ppcform/errors.hpp"

namespace ppcform {

/// One classical 4-stage step of x' = field(t, x). Throws NonFiniteState if
/// the result contains NaN or inf.
template <typename Vec, typename Field>
Vec integrate(const Field& field, const Vec& x, double t, double dt) {
  const Vec k1 = field(t, x);
  const Vec k2 = field(t + 0.5 * dt, Vec(x + (0.5 * dt) * k1));
  const Vec k3 = field(t + 0.5 * dt, Vec(x + (0.5 * dt) * k2));
  const Vec k4 = field(t + dt, Vec(x + dt * k3));
  Vec next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) throw NonFiniteState("integrator produced a non-finite state");
  return next;
}

}  // namespace ppcform
