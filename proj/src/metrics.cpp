#include "ppcform/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace ppcform {

MetricsContext MetricsContext::from(const ScenarioConfig& c) {
  MetricsContext ctx;
  ctx.observer_rho_inf = c.observer_profile.rho_inf;
  ctx.tracking_rho_inf = c.tracking_profile.rho_inf;
  ctx.horizon = std::max(c.observer_profile.horizon, c.tracking_profile.horizon);
  ctx.duration = c.duration;
  return ctx;
}

namespace {

bool same(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) ||
         (std::isnan(a) && std::isnan(b));
}

bool same(const ViolationSite& a, const ViolationSite& b) {
  return same(a.t, b.t) && a.agent == b.agent && a.axis == b.axis;
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double ratio(std::int64_t in, std::int64_t total) {
  return total == 0 ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(in) / static_cast<double>(total);
}

}  // namespace

bool RunMetrics::operator==(const RunMetrics& o) const {
  return records == o.records && rows == o.rows && observer_violations == o.observer_violations &&
         tracking_violations == o.tracking_violations &&
         same(first_observer_violation, o.first_observer_violation) &&
         same(first_tracking_violation, o.first_tracking_violation) &&
         same(steady_max_xi_p, o.steady_max_xi_p) && same(steady_max_e_p, o.steady_max_e_p) &&
         same(convergence_time, o.convergence_time) &&
         same(hull_ratio_after_horizon, o.hull_ratio_after_horizon) &&
         same(hull_ratio_after_twice_horizon, o.hull_ratio_after_twice_horizon) &&
         same(saturation_duty, o.saturation_duty) && same(max_abs_xa, o.max_abs_xa) &&
         corridor_revert_failures == o.corridor_revert_failures &&
         widening_without_saturation == o.widening_without_saturation;
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool inside_convex(const std::vector<Point2>& hull, const Point2& p) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0.0) return false;
  }
  return true;
}

void MetricsAccumulator::consume(const TraceRecord& rec) {
  const double t = rec.t;
  const bool steady = t >= ctx_.duration - ctx_.steady_window;
  ++m_.records;
  bool all_small = true;
  std::vector<Point2> uav, ugv;
  std::map<int, int> axes_of;
  std::map<int, Point2> planar;

  for (const TraceRow& r : rec.rows) {
    ++m_.rows;
    const double axi = std::abs(r.xi_p);
    if (!(axi < r.rho)) {
      if (m_.observer_violations++ == 0) m_.first_observer_violation = {t, r.agent, r.axis};
    }
    if (!(r.e_p > r.bound_lo && r.e_p < r.bound_hi)) {
      if (m_.tracking_violations++ == 0) m_.first_tracking_violation = {t, r.agent, r.axis};
    }
    if (steady) {
      m_.steady_max_xi_p = std::max(m_.steady_max_xi_p, axi);
      m_.steady_max_e_p = std::max(m_.steady_max_e_p, std::abs(r.e_p));
    }
    if (!(axi < ctx_.observer_rho_inf)) all_small = false;

    const auto key = std::make_pair(r.agent, r.axis);
    if (r.du != 0.0) {
      ++saturated_rows_;
      last_saturation_[key] = t;
    }
    m_.max_abs_xa = std::max(m_.max_abs_xa, std::abs(r.xa));
    const auto last = last_saturation_.find(key);
    if (last == last_saturation_.end()) {
      if (r.xa != 0.0) ++m_.widening_without_saturation;
    } else if (t - last->second > kRevertWindow && std::abs(r.xa) >= kRevertTolerance) {
      ++m_.corridor_revert_failures;
    }

    axes_of[r.agent] = std::max(axes_of[r.agent], r.axis + 1);
    if (r.axis < 2) planar[r.agent][static_cast<std::size_t>(r.axis)] = r.xp;
  }

  if (all_small) {
    if (!settled_) m_.convergence_time = t;
    settled_ = true;
  } else {
    settled_ = false;
    m_.convergence_time = std::numeric_limits<double>::infinity();
  }

  if (t > ctx_.horizon) {
    for (const auto& [agent, count] : axes_of) {
      (count == 3 ? uav : ugv).push_back(planar[agent]);
    }
    if (!ugv.empty() && uav.size() >= 3) {
      const auto hull = convex_hull(uav);
      std::int64_t in = 0;
      for (const auto& p : ugv) in += inside_convex(hull, p) ? 1 : 0;
      hull_in_t_ += in;
      hull_total_t_ += static_cast<std::int64_t>(ugv.size());
      if (t > 2.0 * ctx_.horizon) {
        hull_in_2t_ += in;
        hull_total_2t_ += static_cast<std::int64_t>(ugv.size());
      }
    }
  }
}

void MetricsAccumulator::finish() {
  m_.saturation_duty = m_.rows == 0 ? 0.0
                                    : static_cast<double>(saturated_rows_) /
                                          static_cast<double>(m_.rows);
  m_.hull_ratio_after_horizon = ratio(hull_in_t_, hull_total_t_);
  m_.hull_ratio_after_twice_horizon = ratio(hull_in_2t_, hull_total_2t_);
}

RunMetrics compute_metrics(std::span<const TraceRecord> records, const MetricsContext& context) {
  MetricsAccumulator acc(context);
  for (const auto& r : records) acc.consume(r);
  acc.finish();
  return acc.metrics();
}

}  // namespace ppcform
