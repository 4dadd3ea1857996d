#include "ppcform/observer.hpp"

#include <Eigen/Core>

#include "ppcform/integrator.hpp"

namespace ppcform {

NeighborhoodError neighborhood_error(std::span<const ObserverState> states,
                                     LeaderAxisState leader, const WeightSnapshot& weights,
                                     int i) {
  const ObserverState& own = states[static_cast<std::size_t>(i)];
  NeighborhoodError xi;
  for (int j = 0; j < weights.size(); ++j) {
    const double a = weights.adjacency(i, j);
    if (a == 0.0) continue;
    const ObserverState& other = states[static_cast<std::size_t>(j)];
    xi.xi_p += a * (own.zeta_p - other.zeta_p);
    xi.xi_v += a * (own.zeta_v - other.zeta_v);
  }
  const double b = weights.pinning(i);
  if (b != 0.0) {
    xi.xi_p += b * (own.zeta_p - leader.p);
    xi.xi_v += b * (own.zeta_v - leader.v);
  }
  return xi;
}

std::vector<NeighborhoodError> neighborhood_errors(std::span<const ObserverState> states,
                                                   LeaderAxisState leader,
                                                   const WeightSnapshot& weights) {
  std::vector<NeighborhoodError> out(states.size());
  for (int i = 0; i < weights.size(); ++i) {
    out[static_cast<std::size_t>(i)] = neighborhood_error(states, leader, weights, i);
  }
  return out;
}

LawLaplacian::LawLaplacian(Eigen::MatrixXd laplacian) : matrix_(std::move(laplacian)) {
  min_singular_value(matrix_);
  lu_.compute(matrix_);
}

VirtualLaws virtual_laws(std::span<const NeighborhoodError> xi,
                         std::span<const TransformPoint> transformed,
                         std::span<const ObserverGains> gains, const LawLaplacian& laplacian) {
  const auto n = static_cast<Eigen::Index>(xi.size());
  Eigen::VectorXd xi_p(n), xi_v(n), r_eps(n), gamma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    xi_p(i) = xi[k].xi_p;
    xi_v(i) = xi[k].xi_v;
    r_eps(i) = transformed[k].r * transformed[k].eps;
    gamma(i) = transformed[k].gamma;
  }
  const Eigen::VectorXd spread = laplacian.solve(xi_p);

  Eigen::VectorXd weighted(n);  // P R eps
  for (Eigen::Index i = 0; i < n; ++i) weighted(i) = gains[static_cast<std::size_t>(i)].p * r_eps(i);
  const Eigen::VectorXd coupled = laplacian.matrix().transpose() * weighted;

  VirtualLaws laws{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const ObserverGains& g = gains[static_cast<std::size_t>(i)];
    laws.alpha1(i) = -g.k1 * r_eps(i) + gamma(i) * spread(i);
    laws.alpha2(i) = -g.eta * g.k2 * xi_v(i) - g.eta * coupled(i);
  }
  return laws;
}

ObserverState observer_step(const ObserverState& state, double alpha1, double alpha2,
                            const ObserverGains& gains, double dt) {
  using Vec4 = Eigen::Vector4d;
  const auto field = [&](double, const Vec4& x) {
    return Vec4(x(1) + x(2), x(3), (alpha1 - x(2)) / gains.sigma1, (alpha2 - x(3)) / gains.sigma2);
  };
  const Vec4 next =
      integrate(field, Vec4(state.zeta_p, state.zeta_v, state.abar1, state.abar2), 0.0, dt);
  return {next(0), next(1), next(2), next(3)};
}

double lyapunov_surrogate(std::span<const TransformPoint> transformed,
                          std::span<const ObserverState> states,
                          std::span<const ObserverGains> gains, const VirtualLaws& laws,
                          double leader_velocity) {
  double v = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double zv = states[i].zeta_v - leader_velocity;
    const double a1 = states[i].abar1 - laws.alpha1(k);
    const double a2 = states[i].abar2 - laws.alpha2(k);
    v += 0.5 * gains[i].p * transformed[i].eps * transformed[i].eps +
         0.5 * zv * zv / gains[i].eta + 0.5 * a1 * a1 + 0.5 * a2 * a2;
  }
  return v;
}

}  // namespace ppcform
