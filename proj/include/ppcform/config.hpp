#pragma once

// Scenario configuration: schema, JSON loading with full validation, and the
// bundled reference scenario.

#include <array>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "ppcform/controller.hpp"
#include "ppcform/dynamics.hpp"
#include "ppcform/graph.hpp"
#include "ppcform/observer.hpp"
#include "ppcform/ppc.hpp"

namespace ppcform {

enum class AgentKind { Uav, Ugv };
enum class Fidelity { Simplified, Full };

/// Which leader position/velocity the tracking error is measured against.
enum class TrackingReference {
  Leader,    ///< e = x - h - zeta_0 (true leader state)
  Observer,  ///< e = x - h - zeta_i (the agent's own estimate)
};

inline constexpr int kMaxAxes = 3;
inline constexpr std::array<const char*, kMaxAxes> kAxisNames{"x", "y", "z"};

/// Rotating planar offset h = radius * [cos(rate t + phase), sin(rate t + phase)],
/// plus a constant vertical offset for UAVs.
struct FormationSlot {
  double radius = 0.0;
  double rate = 0.0;
  double phase = 0.0;
  double altitude = 0.0;
};

struct FormationOffset {
  double p = 0.0;      ///< h_p
  double v = 0.0;      ///< h_v
  double v_dot = 0.0;  ///< h_v'
};

FormationOffset formation_plan_eval(const FormationSlot& slot, int axis, double t);

struct AxisControl {
  SlidingGains sliding;
  CorridorParams corridor;
  SaturationLimits limits;
  bool operator==(const AxisControl&) const = default;
};

struct AgentConfig {
  int id = 0;  ///< 1-based, matches the topology numbering
  AgentKind kind = AgentKind::Uav;
  Vec3 initial_position = Vec3::Zero();
  double initial_heading = 0.0;  ///< UGV only
  FormationSlot formation;
  std::array<ObserverGains, kMaxAxes> observer{};
  std::array<AxisControl, kMaxAxes> control{};

  int axis_count() const { return kind == AgentKind::Uav ? 3 : 2; }
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  double dt = 1e-3;
  double duration = 30.0;
  Fidelity fidelity = Fidelity::Simplified;

  LeaderParams leader;
  PerformanceProfile observer_profile = PerformanceProfile::with_default_cap(0.1, 5.0);
  PerformanceProfile tracking_profile = PerformanceProfile::with_default_cap(0.3, 5.0);
  LawLaplacianMode law_laplacian = LawLaplacianMode::Nominal;
  TrackingReference reference = TrackingReference::Leader;

  QuadParams quad;
  AttitudeGains attitude;
  double max_tilt = 30.0 * std::numbers::pi / 180.0;  ///< rad
  UgvParams ugv;

  // Kind-wide defaults; agents carry resolved copies (possibly overridden).
  std::array<ObserverGains, kMaxAxes> observer_gains{};
  std::array<AxisControl, kMaxAxes> uav_control{};
  std::array<AxisControl, kMaxAxes> ugv_control{};

  std::vector<Edge> edges;  ///< 0-based follower indices, kLeader for the leader
  FaultSchedule faults;
  std::vector<AgentConfig> agents;

  int trace_stride = 1;

  TopologySpec topology() const;
  std::int64_t step_count() const;
  double time_at(std::int64_t step) const { return static_cast<double>(step) * dt; }
};

/// All semantic checks; an empty result means the scenario is runnable.
std::vector<ValidationIssue> validate(const ScenarioConfig& config);

/// Parses and validates. Throws ParseError (with line/column) on malformed
/// text and ValidationError listing every failed check.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical JSON text for a configuration; parse_config round-trips it.
std::string to_json_text(const ScenarioConfig& config);

/// The five-UAV / four-UGV reference scenario.
ScenarioConfig paper_scenario();

}  // namespace ppcform
