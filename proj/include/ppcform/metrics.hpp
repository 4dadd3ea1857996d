#pragma once

// Run metrics computed from trace records; the same accumulator serves a
// live run and a trace re-read from CSV.

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "ppcform/simulation.hpp"

namespace ppcform {

/// Scenario constants the metrics need beyond the trace itself.
struct MetricsContext {
  double observer_rho_inf = 0.1;
  double tracking_rho_inf = 0.3;
  double horizon = 5.0;    ///< T of the boundary functions
  double duration = 30.0;  ///< run length, s
  double steady_window = 5.0;

  static MetricsContext from(const ScenarioConfig& config);
};

/// |x_a| below this counts as reverted.
inline constexpr double kRevertTolerance = 1e-3;
/// Seconds allowed for the corridor to revert after saturation ends.
inline constexpr double kRevertWindow = 2.0;

struct ViolationSite {
  double t = std::numeric_limits<double>::quiet_NaN();
  int agent = 0;
  int axis = 0;
};

struct RunMetrics {
  std::int64_t records = 0;
  std::int64_t rows = 0;

  std::int64_t observer_violations = 0;  ///< rows with |xi_p| >= rho
  std::int64_t tracking_violations = 0;  ///< rows with e_p outside (bound_lo, bound_hi)
  ViolationSite first_observer_violation;
  ViolationSite first_tracking_violation;

  double steady_max_xi_p = 0.0;  ///< over the last steady_window seconds
  double steady_max_e_p = 0.0;
  /// First t after which |xi_p| < rho_inf for every agent-axis until the end;
  /// +inf if never settled.
  double convergence_time = std::numeric_limits<double>::infinity();

  /// Fraction of (step, UGV) pairs inside the UAV convex hull; NaN if undefined.
  double hull_ratio_after_horizon = std::numeric_limits<double>::quiet_NaN();
  double hull_ratio_after_twice_horizon = std::numeric_limits<double>::quiet_NaN();

  double saturation_duty = 0.0;  ///< fraction of rows with du != 0
  double max_abs_xa = 0.0;
  /// Rows where |x_a| >= 1e-3 more than 2 s after that axis last saturated.
  std::int64_t corridor_revert_failures = 0;
  /// Rows with x_a != 0 on an axis that has never saturated.
  std::int64_t widening_without_saturation = 0;

  std::int64_t violations() const { return observer_violations + tracking_violations; }
  bool operator==(const RunMetrics& other) const;
};

class MetricsAccumulator : public TraceSink {
 public:
  explicit MetricsAccumulator(MetricsContext context) : ctx_(context) {}

  void consume(const TraceRecord& record) override;
  void finish() override;
  const RunMetrics& metrics() const { return m_; }

 private:
  MetricsContext ctx_;
  RunMetrics m_;
  bool settled_ = false;
  std::int64_t saturated_rows_ = 0;
  std::int64_t hull_in_t_ = 0, hull_total_t_ = 0;
  std::int64_t hull_in_2t_ = 0, hull_total_2t_ = 0;
  std::map<std::pair<int, int>, double> last_saturation_;
};

RunMetrics compute_metrics(std::span<const TraceRecord> records, const MetricsContext& context);

// ------------------------------------------------------------ geometry

using Point2 = std::array<double, 2>;

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Inside or on the boundary of a counter-clockwise convex polygon.
bool inside_convex(const std::vector<Point2>& hull, const Point2& p);

}  // namespace ppcform
