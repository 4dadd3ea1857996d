#include "ppcform/graph.hpp"

#include <cmath>
#include <deque>
#include <random>

namespace ppcform {

TopologySpec TopologySpec::from_edges(int n_followers, std::span<const Edge> edges) {
  TopologySpec spec;
  spec.adjacency = Eigen::MatrixXd::Zero(n_followers, n_followers);
  spec.pinning = Eigen::VectorXd::Zero(n_followers);
  for (const Edge& e : edges) {
    if (e.target < 0 || e.target >= n_followers || e.source < kLeader ||
        e.source >= n_followers) {
      throw std::out_of_range("edge endpoint out of range");
    }
    if (e.source == kLeader) {
      spec.pinning(e.target) = e.weight;
    } else {
      spec.adjacency(e.target, e.source) = e.weight;
    }
  }
  return spec;
}

TopologySpec TopologySpec::induced(std::span<const int> members) const {
  const auto m = static_cast<Eigen::Index>(members.size());
  TopologySpec sub;
  sub.adjacency = Eigen::MatrixXd::Zero(m, m);
  sub.pinning = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    sub.pinning(i) = pinning(members[i]);
    for (Eigen::Index j = 0; j < m; ++j) sub.adjacency(i, j) = adjacency(members[i], members[j]);
  }
  return sub;
}

std::vector<ValidationIssue> TopologySpec::validate(const std::string& path) const {
  std::vector<ValidationIssue> issues;
  const auto n = pinning.size();
  if (adjacency.rows() != n || adjacency.cols() != n) {
    issues.push_back({path + "/adjacency", "shape does not match follower count"});
    return issues;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(pinning(i) >= 0.0)) {
      issues.push_back({path + "/pinning/" + std::to_string(i + 1), "weight must be >= 0"});
    }
    if (adjacency(i, i) != 0.0) {
      issues.push_back({path + "/adjacency/" + std::to_string(i + 1), "self-loop not allowed"});
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(adjacency(i, j) >= 0.0)) {
        issues.push_back({path + "/adjacency/" + std::to_string(j + 1) + "->" +
                              std::to_string(i + 1),
                          "weight must be >= 0"});
      }
    }
  }
  return issues;
}

double PerturbationSpec::value(double t, double noise_sample) const {
  const double shape = amplitude * std::sin(frequency * t);
  return noise == NoiseMode::None ? shape : shape * noise_sample;
}

bool FaultSchedule::any_active(double t) const {
  for (const auto& e : entries) {
    if (e.active(t)) return true;
  }
  return false;
}

std::vector<ValidationIssue> FaultSchedule::validate(const TopologySpec& topology,
                                                     const std::string& path) const {
  std::vector<ValidationIssue> issues;
  const int n = topology.size();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const FaultEntry& e = entries[k];
    const std::string at = path + "/" + std::to_string(k);
    if (!(e.t_on < e.t_off)) issues.push_back({at + "/window", "t_on must be < t_off"});
    if (e.t_on < 0.0) issues.push_back({at + "/window", "t_on must be >= 0"});
    const bool endpoints_ok =
        e.target >= 0 && e.target < n && e.source >= kLeader && e.source < n;
    if (!endpoints_ok) {
      issues.push_back({at, "edge endpoint out of range"});
    } else if (!(topology.weight(e.source, e.target) > 0.0)) {
      issues.push_back({at, "faulted link does not exist in the nominal topology"});
    }
    const auto& p = e.perturbation;
    if (!std::isfinite(p.amplitude) || p.amplitude < 0.0) {
      issues.push_back({at + "/amplitude", "must be finite and >= 0"});
    }
    if (!std::isfinite(p.frequency)) issues.push_back({at + "/frequency", "must be finite"});
    if (p.noise == NoiseMode::Smoothed && !(p.smoothing_tau > 0.0)) {
      issues.push_back({at + "/smoothing_tau", "must be > 0 in smoothed mode"});
    }
  }
  return issues;
}

FaultNoise::FaultNoise(std::uint64_t seed, double dt) : seed_(seed), dt_(dt) {}

double FaultNoise::held_sample(std::uint64_t seed, std::size_t entry, std::int64_t step) {
  const auto s = static_cast<std::uint64_t>(step);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(entry), static_cast<std::uint32_t>(s),
                    static_cast<std::uint32_t>(s >> 32)};
  std::mt19937_64 gen(seq);
  return std::generate_canonical<double, 53>(gen);
}

double FaultNoise::sample(std::size_t entry, std::int64_t step, const PerturbationSpec& spec) {
  switch (spec.noise) {
    case NoiseMode::None:
      return 1.0;
    case NoiseMode::Held:
      return held_sample(seed_, entry, step);
    case NoiseMode::Smoothed:
      break;
  }
  if (filters_.size() <= entry) filters_.resize(entry + 1);
  FilterState& f = filters_[entry];
  if (f.step < 0 || step < f.step) {
    f.step = 0;
    f.value = held_sample(seed_, entry, 0);
  }
  const double blend = 1.0 - std::exp(-dt_ / spec.smoothing_tau);
  while (f.step < step) {
    ++f.step;
    f.value += blend * (held_sample(seed_, entry, f.step) - f.value);
  }
  return f.value;
}

WeightSnapshot WeightSnapshot::induced(std::span<const int> members) const {
  const auto m = static_cast<Eigen::Index>(members.size());
  WeightSnapshot sub;
  sub.t = t;
  sub.clamp_events = clamp_events;
  sub.adjacency = Eigen::MatrixXd::Zero(m, m);
  sub.pinning = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    sub.pinning(i) = pinning(members[i]);
    for (Eigen::Index j = 0; j < m; ++j) sub.adjacency(i, j) = adjacency(members[i], members[j]);
  }
  return sub;
}

WeightSnapshot effective_weights(const TopologySpec& spec, const FaultSchedule& faults,
                                 double t, std::int64_t step, FaultNoise& noise) {
  WeightSnapshot w;
  w.t = t;
  w.adjacency = spec.adjacency;
  w.pinning = spec.pinning;
  for (std::size_t k = 0; k < faults.entries.size(); ++k) {
    const FaultEntry& e = faults.entries[k];
    if (!e.active(t)) continue;
    const double delta = e.perturbation.value(t, noise.sample(k, step, e.perturbation));
    double& slot = e.source == kLeader ? w.pinning(e.target) : w.adjacency(e.target, e.source);
    const double nominal = spec.weight(e.source, e.target);
    double faulted = slot + delta;
    if (nominal > 0.0) {
      const double floor = kSignClampFraction * nominal;
      if (faulted < floor) {
        faulted = floor;
        ++w.clamp_events;
      }
    } else if (faulted != 0.0) {
      faulted = 0.0;
      ++w.clamp_events;
    }
    slot = faulted;
  }
  return w;
}

FaultedLaplacian build_faulted_laplacian(const WeightSnapshot& weights) {
  FaultedLaplacian lap;
  lap.t = weights.t;
  lap.weights = weights;
  lap.degrees = weights.adjacency.rowwise().sum() + weights.pinning;
  lap.matrix = -weights.adjacency;
  lap.matrix.diagonal() = lap.degrees;
  return lap;
}

Eigen::MatrixXd nominal_laplacian(const TopologySpec& spec) {
  WeightSnapshot w;
  w.adjacency = spec.adjacency;
  w.pinning = spec.pinning;
  return build_faulted_laplacian(w).matrix;
}

bool has_leader_spanning_tree(const TopologySpec& spec) {
  const int n = spec.size();
  std::vector<bool> reached(static_cast<std::size_t>(n), false);
  std::deque<int> frontier;
  for (int i = 0; i < n; ++i) {
    if (spec.pinning(i) > 0.0) {
      reached[static_cast<std::size_t>(i)] = true;
      frontier.push_back(i);
    }
  }
  while (!frontier.empty()) {
    const int j = frontier.front();
    frontier.pop_front();
    for (int i = 0; i < n; ++i) {
      if (!reached[static_cast<std::size_t>(i)] && spec.adjacency(i, j) > 0.0) {
        reached[static_cast<std::size_t>(i)] = true;
        frontier.push_back(i);
      }
    }
  }
  for (bool r : reached) {
    if (!r) return false;
  }
  return true;
}

double min_singular_value(const Eigen::MatrixXd& laplacian) {
  if (laplacian.size() == 0) throw DegenerateTopology("empty Laplacian");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(laplacian);
  const double smallest = svd.singularValues().minCoeff();
  if (!(smallest >= kDegenerateSingularValue)) {
    throw DegenerateTopology("Laplacian is singular (smallest singular value " +
                             std::to_string(smallest) + ")");
  }
  return smallest;
}

}  // namespace ppcform
