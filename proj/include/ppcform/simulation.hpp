#pragma once

// Closed-loop run of a scenario: fault weights, observers, controllers,
// saturation, input maps and plants, advanced together one step at a time.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ppcform/config.hpp"

namespace ppcform {

/// One agent-axis sample; column order of the trace CSV.
struct TraceRow {
  int agent = 0;  ///< 1-based id
  int axis = 0;   ///< 0 = x, 1 = y, 2 = z
  double xp = 0.0, xv = 0.0;
  double zeta_p = 0.0, zeta_v = 0.0;
  double xi_p = 0.0, xi_v = 0.0;
  double rho = 0.0;  ///< observer boundary
  double e_p = 0.0, e_v = 0.0;
  double bound_lo = 0.0, bound_hi = 0.0;  ///< tracking corridor
  double eps = 0.0, s = 0.0;
  double v = 0.0, u = 0.0, du = 0.0;
  double xa = 0.0;
  bool fault_active = false;
};

struct ClampTotals {
  std::uint64_t observer_transform = 0;  ///< symmetric transform inputs pushed inside (-1, 1)
  std::uint64_t tracking_transform = 0;  ///< corridor transform inputs pushed inside
  std::uint64_t weight_floor = 0;        ///< faulted weights held at their floor

  ClampTotals& operator+=(const ClampTotals& o) {
    observer_transform += o.observer_transform;
    tracking_transform += o.tracking_transform;
    weight_floor += o.weight_floor;
    return *this;
  }
  std::uint64_t transform_total() const { return observer_transform + tracking_transform; }
  bool operator==(const ClampTotals&) const = default;
};

struct StepDiagnostics {
  std::array<double, kMaxAxes> lyapunov{};      ///< observer surrogate per axis
  std::array<double, kMaxAxes> min_singular{};  ///< smallest singular value of the faulted Laplacian
  int tilt_clips = 0;                           ///< full fidelity only
};

/// State of every agent-axis at the start of one integrator step.
struct TraceRecord {
  std::int64_t step = 0;
  double t = 0.0;
  bool fault_active = false;
  std::vector<TraceRow> rows;  ///< ordered by agent, then axis
  ClampTotals clamps;          ///< this step only
  StepDiagnostics diagnostics;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void consume(const TraceRecord& record) = 0;
  virtual void finish() {}
};

struct SimulationOptions {
  /// Order in which agents are evaluated inside a step (0-based indices);
  /// empty means natural order. Results must not depend on it.
  std::vector<int> evaluation_order;
};

struct RunSummary {
  std::int64_t steps = 0;
  ClampTotals clamps;
  int tilt_clips = 0;
};

/// Runs the scenario to completion, streaming one record per step into every
/// sink. Failures abort with SimulationAborted naming agent, axis and time.
RunSummary run(const ScenarioConfig& config, std::span<TraceSink* const> sinks,
               const SimulationOptions& options = {});

}  // namespace ppcform
