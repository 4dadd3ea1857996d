#pragma once

// Distributed leader-state observer with a prescribed-performance constraint
// on the neighborhood error. One instance of these laws runs per axis.

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "ppcform/graph.hpp"
#include "ppcform/ppc.hpp"

namespace ppcform {

struct ObserverGains {
  double k1 = 2.0;
  double k2 = 50.0;
  double eta = 1.0;
  double p = 1.0;
  double sigma1 = 0.01;  ///< filter time constant for alpha_1, s
  double sigma2 = 0.01;  ///< filter time constant for alpha_2, s

  bool valid() const {
    return k1 > 0.0 && k2 > 0.0 && eta > 0.0 && p > 0.0 && sigma1 > 0.0 && sigma2 > 0.0;
  }
  double min_time_constant() const { return sigma1 < sigma2 ? sigma1 : sigma2; }
  bool operator==(const ObserverGains&) const = default;
};

/// Estimated leader position/velocity plus the two virtual-law filter states.
struct ObserverState {
  double zeta_p = 0.0;
  double zeta_v = 0.0;
  double abar1 = 0.0;
  double abar2 = 0.0;
};

struct NeighborhoodError {
  double xi_p = 0.0;
  double xi_v = 0.0;
};

struct LeaderAxisState {
  double p = 0.0;
  double v = 0.0;
};

/// xi_i = sum_j a_ij^f (zeta_i - zeta_j) + b_i^f (zeta_i - zeta_0).
NeighborhoodError neighborhood_error(std::span<const ObserverState> states,
                                     LeaderAxisState leader, const WeightSnapshot& weights,
                                     int i);
std::vector<NeighborhoodError> neighborhood_errors(std::span<const ObserverState> states,
                                                   LeaderAxisState leader,
                                                   const WeightSnapshot& weights);

/// Which Laplacian enters the inverse and transpose terms of the virtual laws.
enum class LawLaplacianMode { Nominal, Faulted };

/// Laplacian used inside the virtual laws, with a cached factorization.
class LawLaplacian {
 public:
  /// Throws DegenerateTopology if the matrix is singular.
  explicit LawLaplacian(Eigen::MatrixXd laplacian);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct VirtualLaws {
  Eigen::VectorXd alpha1;
  Eigen::VectorXd alpha2;
};

/// Stacked virtual laws:
///   alpha1 = -K1 R eps + Gamma L^-1 xi_p
///   alpha2 = -H K2 xi_v - H L^T R P eps
VirtualLaws virtual_laws(std::span<const NeighborhoodError> xi,
                         std::span<const TransformPoint> transformed,
                         std::span<const ObserverGains> gains, const LawLaplacian& laplacian);

/// One integrator step of the observer with the alpha targets held fixed.
ObserverState observer_step(const ObserverState& state, double alpha1, double alpha2,
                            const ObserverGains& gains, double dt);

/// True when dt exceeds half of the faster filter time constant.
inline bool step_too_large(const ObserverGains& gains, double dt) {
  return dt > 0.5 * gains.min_time_constant();
}

/// 0.5 eps'P eps + 0.5 zv~' H^-1 zv~ + 0.5 |a1~|^2 + 0.5 |a2~|^2 for one axis.
double lyapunov_surrogate(std::span<const TransformPoint> transformed,
                          std::span<const ObserverState> states,
                          std::span<const ObserverGains> gains, const VirtualLaws& laws,
                          double leader_velocity);

}  // namespace ppcform
