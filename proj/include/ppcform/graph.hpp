#pragma once

// Directed communication topology, link-fault injection and faulted Laplacian.
//
// Agents are indexed 0..n-1 internally. The virtual leader is not a node of
// the follower graph; it enters only through the pinning vector.
// adjacency(i, j) is the weight of the directed link j -> i.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ppcform/errors.hpp"

namespace ppcform {

inline constexpr int kLeader = -1;

struct Edge {
  int source = 0;  ///< kLeader or a follower index
  int target = 0;
  double weight = 1.0;
};

struct TopologySpec {
  Eigen::MatrixXd adjacency;
  Eigen::VectorXd pinning;

  static TopologySpec from_edges(int n_followers, std::span<const Edge> edges);

  int size() const { return static_cast<int>(pinning.size()); }
  double weight(int source, int target) const {
    return source == kLeader ? pinning(target) : adjacency(target, source);
  }

  /// Subgraph induced by `members` (in the given order); edges touching other
  /// nodes are dropped.
  TopologySpec induced(std::span<const int> members) const;

  /// Structural checks: shape, non-negative weights, no self-loops.
  std::vector<ValidationIssue> validate(const std::string& path) const;
};

enum class NoiseMode { Held, Smoothed, None };

/// Shape of one fault signal: amplitude * sin(frequency * t) * noise.
struct PerturbationSpec {
  double amplitude = 0.5;
  double frequency = 1.0;  ///< rad/s
  NoiseMode noise = NoiseMode::Held;
  double smoothing_tau = 0.05;  ///< s, smoothed mode only

  /// `noise` is the current sample in [0, 1]; None mode ignores it.
  double value(double t, double noise) const;
};

struct FaultEntry {
  int source = 0;  ///< kLeader or a follower index
  int target = 0;
  double t_on = 0.0;
  double t_off = 0.0;
  PerturbationSpec perturbation;

  bool active(double t) const { return t >= t_on && t <= t_off; }
};

struct FaultSchedule {
  std::vector<FaultEntry> entries;

  bool any_active(double t) const;
  std::vector<ValidationIssue> validate(const TopologySpec& topology,
                                        const std::string& path) const;
};

/// Seeded source of the per-step rand() samples driving each fault entry.
///
/// Held samples are a pure function of (seed, entry, step). Smoothed samples
/// low-pass the held sequence; they are evaluated by walking the steps
/// forward, so any (seed, entry, step) still yields the same value.
class FaultNoise {
 public:
  FaultNoise(std::uint64_t seed, double dt);

  double sample(std::size_t entry, std::int64_t step, const PerturbationSpec& spec);

  static double held_sample(std::uint64_t seed, std::size_t entry, std::int64_t step);

 private:
  struct FilterState {
    std::int64_t step = -1;
    double value = 0.0;
  };
  std::uint64_t seed_;
  double dt_;
  std::vector<FilterState> filters_;
};

/// Faulted weights a^f, b^f at one instant.
struct WeightSnapshot {
  double t = 0.0;
  Eigen::MatrixXd adjacency;
  Eigen::VectorXd pinning;
  int clamp_events = 0;  ///< sign-preservation clamps fired for this snapshot

  int size() const { return static_cast<int>(pinning.size()); }
  WeightSnapshot induced(std::span<const int> members) const;
};

/// Faulted weights are clamped at this fraction of the nominal weight.
inline constexpr double kSignClampFraction = 0.05;

WeightSnapshot effective_weights(const TopologySpec& spec, const FaultSchedule& faults,
                                 double t, std::int64_t step, FaultNoise& noise);

struct FaultedLaplacian {
  double t = 0.0;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd degrees;
  WeightSnapshot weights;
};

FaultedLaplacian build_faulted_laplacian(const WeightSnapshot& weights);

/// Nominal (fault-free) Laplacian of a topology.
Eigen::MatrixXd nominal_laplacian(const TopologySpec& spec);

bool has_leader_spanning_tree(const TopologySpec& spec);

inline constexpr double kDegenerateSingularValue = 1e-9;

/// Smallest singular value of a Laplacian; throws DegenerateTopology below 1e-9.
double min_singular_value(const Eigen::MatrixXd& laplacian);
inline double min_eigen_lower_bound(const FaultedLaplacian& lap) {
  return min_singular_value(lap.matrix);
}

}  // namespace ppcform
