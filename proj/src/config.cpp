#include "ppcform/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "ppcform/errors.hpp"

namespace ppcform {

using nlohmann::json;

FormationOffset formation_plan_eval(const FormationSlot& slot, int axis, double t) {
  if (axis == 2) return {slot.altitude, 0.0, 0.0};
  const double angle = slot.rate * t + slot.phase;
  const double r = slot.radius, w = slot.rate;
  const double c = std::cos(angle), s = std::sin(angle);
  if (axis == 0) return {r * c, -r * w * s, -r * w * w * c};
  return {r * s, r * w * c, -r * w * w * s};
}

TopologySpec ScenarioConfig::topology() const {
  return TopologySpec::from_edges(static_cast<int>(agents.size()), edges);
}

std::int64_t ScenarioConfig::step_count() const {
  if (!(dt > 0.0) || !(duration > 0.0)) return 0;
  return static_cast<std::int64_t>(std::llround(duration / dt));
}

// ------------------------------------------------------------ validation

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

struct Issues {
  std::vector<ValidationIssue> list;
  void add(std::string path, std::string message) {
    list.push_back({std::move(path), std::move(message)});
  }
  void positive(double v, const std::string& path) {
    if (!(v > 0.0) || !std::isfinite(v)) add(path, "must be a finite value > 0 (got " + num(v) + ")");
  }
};

const char* observer_field_names[] = {"k1", "k2", "eta", "p", "sigma1", "sigma2"};

std::array<double, 6> observer_fields(const ObserverGains& g) {
  return {g.k1, g.k2, g.eta, g.p, g.sigma1, g.sigma2};
}

void check_observer(Issues& out, const ObserverGains& g, const std::string& base, int axis) {
  const auto values = observer_fields(g);
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.positive(values[k], base + "/" + observer_field_names[k] + "/" + std::to_string(axis));
  }
}

void check_control(Issues& out, const AxisControl& c, const std::string& base, int axis) {
  const std::string ax = "/" + std::to_string(axis);
  out.positive(c.sliding.lambda_s, base + "/lambda_s" + ax);
  out.positive(c.sliding.k_s, base + "/k_s" + ax);
  out.positive(c.corridor.delta1, base + "/delta1" + ax);
  out.positive(c.corridor.delta2, base + "/delta2" + ax);
  out.positive(c.corridor.omega_a, base + "/omega_a" + ax);
  if (!c.limits.valid() || !std::isfinite(c.limits.lo) || !std::isfinite(c.limits.hi)) {
    out.add(base + "/saturation/" + kAxisNames[axis],
            "lower limit must be below upper limit (got [" + num(c.limits.lo) + ", " +
                num(c.limits.hi) + "])");
  }
}

void check_profile(Issues& out, const PerformanceProfile& p, const std::string& base) {
  out.positive(p.rho_inf, base + "/rho_inf");
  out.positive(p.horizon, base + "/horizon");
  if (!(p.rho_cap >= p.rho_inf) || !std::isfinite(p.rho_cap)) {
    out.add(base + "/rho_cap", "must be finite and >= rho_inf");
  }
}

std::vector<int> members_of(const ScenarioConfig& c, AgentKind kind) {
  std::vector<int> out;
  for (std::size_t i = 0; i < c.agents.size(); ++i) {
    if (c.agents[i].kind == kind) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace

std::vector<ValidationIssue> validate(const ScenarioConfig& config) {
  Issues out;
  const int n = static_cast<int>(config.agents.size());

  out.positive(config.dt, "/integrator/dt");
  out.positive(config.duration, "/integrator/duration");
  if (config.trace_stride < 1) out.add("/output/trace_stride", "must be >= 1");

  check_profile(out, config.observer_profile, "/performance/observer");
  check_profile(out, config.tracking_profile, "/performance/tracking");

  const LeaderParams& lp = config.leader;
  if (!(lp.t0 >= 0.0) || !std::isfinite(lp.t0)) out.add("/leader/t0", "must be >= 0");
  for (auto [v, key] : {std::pair{lp.climb_height, "climb_height"},
                        std::pair{lp.cruise_speed, "cruise_speed"},
                        std::pair{lp.sway_amplitude, "sway_amplitude"},
                        std::pair{lp.sway_rate, "sway_rate"}}) {
    if (!std::isfinite(v)) out.add(std::string("/leader/") + key, "must be finite");
  }

  const QuadParams& q = config.quad;
  out.positive(q.mass, "/plants/uav/mass");
  out.positive(q.ixx, "/plants/uav/ixx");
  out.positive(q.iyy, "/plants/uav/iyy");
  out.positive(q.izz, "/plants/uav/izz");
  out.positive(q.gravity, "/plants/uav/gravity");
  if (!(q.rotor_inertia >= 0.0)) out.add("/plants/uav/rotor_inertia", "must be >= 0");
  if (!std::isfinite(q.residual_rotor_speed)) {
    out.add("/plants/uav/residual_rotor_speed", "must be finite");
  }
  out.positive(config.attitude.kp, "/plants/uav/attitude_kp");
  out.positive(config.attitude.kd, "/plants/uav/attitude_kd");
  if (!(config.max_tilt > 0.0 && config.max_tilt < std::numbers::pi / 2)) {
    out.add("/plants/uav/max_tilt_deg", "must lie in (0, 90) degrees");
  }
  const UgvParams& g = config.ugv;
  out.positive(g.mass, "/plants/ugv/mass");
  out.positive(g.inertia, "/plants/ugv/inertia");
  out.positive(g.wheel_radius, "/plants/ugv/wheel_radius");
  out.positive(g.half_track, "/plants/ugv/half_track");
  if (!(g.hand_offset > 1e-6)) out.add("/plants/ugv/hand_offset", "must exceed 1e-6 m");

  // Kind-wide gains, then any per-agent value that differs from them.
  double min_sigma = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kMaxAxes; ++a) {
    check_observer(out, config.observer_gains[a], "/observer", a);
    min_sigma = std::min(min_sigma, config.observer_gains[a].min_time_constant());
    check_control(out, config.uav_control[a], "/controller/uav", a);
    if (a < 2) check_control(out, config.ugv_control[a], "/controller/ugv", a);
    if (config.uav_control[a].limits.lo + q.gravity <= 0.1 && a == 2) {
      out.add("/controller/uav/saturation/z",
              "lower limit must exceed -g + 0.1 so thrust stays positive");
    }
  }

  if (n == 0) out.add("/agents", "at least one agent is required");
  std::set<int> ids;
  for (int i = 0; i < n; ++i) {
    const AgentConfig& ag = config.agents[i];
    const std::string base = "/agents/" + std::to_string(i);
    if (ag.id != i + 1) {
      out.add(base + "/id", "ids must be 1.." + std::to_string(n) + " in order (got " +
                                std::to_string(ag.id) + ")");
    }
    if (!ag.initial_position.allFinite()) out.add(base + "/position", "must be finite");
    if (!std::isfinite(ag.initial_heading)) out.add(base + "/heading", "must be finite");
    for (double v : {ag.formation.radius, ag.formation.rate, ag.formation.phase,
                     ag.formation.altitude}) {
      if (!std::isfinite(v)) {
        out.add(base + "/formation", "all formation parameters must be finite");
        break;
      }
    }
    const auto& defaults = ag.kind == AgentKind::Uav ? config.uav_control : config.ugv_control;
    for (int a = 0; a < ag.axis_count(); ++a) {
      if (!(ag.observer[a] == config.observer_gains[a])) {
        check_observer(out, ag.observer[a], base + "/observer", a);
      }
      min_sigma = std::min(min_sigma, ag.observer[a].min_time_constant());
      if (!(ag.control[a] == defaults[a])) check_control(out, ag.control[a], base + "/controller", a);
      if (a == 2 && ag.control[a].limits.lo + q.gravity <= 0.1) {
        out.add(base + "/controller/saturation/z",
                "lower limit must exceed -g + 0.1 so thrust stays positive");
      }
    }
  }
  if (min_sigma > 0.0 && config.dt > min_sigma / 5.0) {
    out.add("/integrator/dt", "dt = " + num(config.dt) +
                                  " violates the stiffness guard dt <= min(sigma)/5 = " +
                                  num(min_sigma / 5.0));
  }

  // Topology: structure, leader reachability per axis, faults.
  bool topology_ok = n > 0;
  for (std::size_t k = 0; k < config.edges.size(); ++k) {
    const Edge& e = config.edges[k];
    const std::string base = "/topology/edges/" + std::to_string(k);
    if (e.target < 0 || e.target >= n) {
      out.add(base + "/to", "unknown follower " + std::to_string(e.target + 1));
      topology_ok = false;
    }
    if (e.source != kLeader && (e.source < 0 || e.source >= n)) {
      out.add(base + "/from", "unknown follower " + std::to_string(e.source + 1));
      topology_ok = false;
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      out.add(base + "/weight", "must be finite and >= 0");
      topology_ok = false;
    }
    if (e.source == e.target) {
      out.add(base, "self-loops are not allowed");
      topology_ok = false;
    }
  }
  if (topology_ok) {
    const TopologySpec topo = config.topology();
    for (auto& issue : topo.validate("/topology")) out.list.push_back(issue);
    if (!has_leader_spanning_tree(topo)) {
      out.add("/topology", "leader-reachability assumption violated: the leader does not reach "
                           "every follower through directed links (x/y axes)");
    } else {
      const std::vector<int> uavs = members_of(config, AgentKind::Uav);
      if (!uavs.empty() && !has_leader_spanning_tree(topo.induced(uavs))) {
        out.add("/topology", "leader-reachability assumption violated: the leader does not "
                             "reach every UAV through UAV-only links (z axis)");
      }
    }
    for (auto& issue : config.faults.validate(topo, "/faults")) out.list.push_back(issue);

    // Initial feasibility with observers starting at the agents' positions.
    if (out.list.empty()) {
      const LeaderSample l0 = leader_closed_form(config.leader, 0.0);
      const double rho_obs = config.observer_profile.rho(0.0);
      const double rho_trk = config.tracking_profile.rho(0.0);
      for (int a = 0; a < kMaxAxes; ++a) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i) {
          if (config.agents[i].axis_count() > a) members.push_back(i);
        }
        if (members.empty()) continue;
        const TopologySpec sub = topo.induced(members);
        for (std::size_t k = 0; k < members.size(); ++k) {
          const int i = members[k];
          const AgentConfig& ag = config.agents[i];
          const double zi = ag.initial_position(a);
          double xi = sub.pinning(k) * (zi - l0.p(a));
          for (std::size_t j = 0; j < members.size(); ++j) {
            xi += sub.adjacency(k, j) * (zi - config.agents[members[j]].initial_position(a));
          }
          const std::string base = "/agents/" + std::to_string(i);
          if (!(std::abs(xi) < rho_obs)) {
            out.add(base + "/position", std::string("initial neighborhood error on axis ") +
                                            kAxisNames[a] + " (" + num(xi) +
                                            ") is outside the observer corridor +-" +
                                            num(rho_obs));
          }
          const double ref = config.reference == TrackingReference::Leader ? l0.p(a) : zi;
          const double e = zi - formation_plan_eval(ag.formation, a, 0.0).p - ref;
          const CorridorParams& cp = ag.control[a].corridor;
          if (!(e > -cp.delta1 * rho_trk && e < cp.delta2 * rho_trk)) {
            out.add(base + "/position", std::string("initial tracking error on axis ") +
                                            kAxisNames[a] + " (" + num(e) +
                                            ") is outside the tracking corridor");
          }
        }
      }
    }
  }
  return out.list;
}

// --------------------------------------------------------------- parsing

namespace {

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t k = 0; k < end; ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

class Reader {
 public:
  Issues issues;

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    issues.add(path, "expected an object");
    return false;
  }

  void only(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        issues.add(path + "/" + it.key(), "unknown field");
      }
    }
  }

  void number(const json& j, const char* key, const std::string& path, double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else {
      issues.add(path + "/" + key, "expected a number");
    }
  }

  void integer(const json& j, const char* key, const std::string& path, std::int64_t& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number_integer()) {
      out = v.get<std::int64_t>();
    } else {
      issues.add(path + "/" + key, "expected an integer");
    }
  }

  void text(const json& j, const char* key, const std::string& path, std::string& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_string()) {
      out = v.get<std::string>();
    } else {
      issues.add(path + "/" + key, "expected a string");
    }
  }

  /// Scalar (applied to every axis) or an array with one value per axis.
  template <typename Set>
  void per_axis(const json& j, const char* key, const std::string& path, int axes, Set&& set) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    const std::string p = path + "/" + key;
    if (v.is_number()) {
      for (int a = 0; a < axes; ++a) set(a, v.get<double>());
    } else if (v.is_array() && static_cast<int>(v.size()) == axes &&
               std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      for (int a = 0; a < axes; ++a) set(a, v[a].get<double>());
    } else {
      issues.add(p, "expected a number or an array of " + std::to_string(axes) + " numbers");
    }
  }

  bool vector(const json& v, const std::string& path, std::size_t size, std::vector<double>& out) {
    if (!v.is_array() || v.size() != size ||
        !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      issues.add(path, "expected an array of " + std::to_string(size) + " numbers");
      return false;
    }
    out.clear();
    for (const auto& e : v) out.push_back(e.get<double>());
    return true;
  }

  /// "leader" or 0 for the leader, 1..n for followers; returns 0-based or kLeader.
  bool node(const json& v, const std::string& path, bool leader_allowed, int& out) {
    if (v.is_string() && v.get<std::string>() == "leader" && leader_allowed) {
      out = kLeader;
      return true;
    }
    if (v.is_number_integer()) {
      const auto id = v.get<std::int64_t>();
      if (id == 0 && leader_allowed) {
        out = kLeader;
        return true;
      }
      if (id >= 1 && id <= 1000000) {
        out = static_cast<int>(id) - 1;
        return true;
      }
    }
    issues.add(path, leader_allowed ? "expected \"leader\", 0, or a follower id >= 1"
                                    : "expected a follower id >= 1");
    return false;
  }

  void observer(const json& j, const std::string& path, int axes,
                std::array<ObserverGains, kMaxAxes>& g) {
    if (!object(j, path)) return;
    only(j, path, {"k1", "k2", "eta", "p", "sigma1", "sigma2", "law_laplacian"});
    per_axis(j, "k1", path, axes, [&](int a, double v) { g[a].k1 = v; });
    per_axis(j, "k2", path, axes, [&](int a, double v) { g[a].k2 = v; });
    per_axis(j, "eta", path, axes, [&](int a, double v) { g[a].eta = v; });
    per_axis(j, "p", path, axes, [&](int a, double v) { g[a].p = v; });
    per_axis(j, "sigma1", path, axes, [&](int a, double v) { g[a].sigma1 = v; });
    per_axis(j, "sigma2", path, axes, [&](int a, double v) { g[a].sigma2 = v; });
  }

  void control(const json& j, const std::string& path, int axes,
               std::array<AxisControl, kMaxAxes>& c) {
    if (!object(j, path)) return;
    only(j, path, {"lambda_s", "k_s", "delta1", "delta2", "omega_a", "saturation"});
    per_axis(j, "lambda_s", path, axes, [&](int a, double v) { c[a].sliding.lambda_s = v; });
    per_axis(j, "k_s", path, axes, [&](int a, double v) { c[a].sliding.k_s = v; });
    per_axis(j, "delta1", path, axes, [&](int a, double v) { c[a].corridor.delta1 = v; });
    per_axis(j, "delta2", path, axes, [&](int a, double v) { c[a].corridor.delta2 = v; });
    per_axis(j, "omega_a", path, axes, [&](int a, double v) { c[a].corridor.omega_a = v; });
    if (j.contains("saturation")) {
      const json& s = j.at("saturation");
      const std::string sp = path + "/saturation";
      if (!object(s, sp)) return;
      for (auto it = s.begin(); it != s.end(); ++it) {
        const auto found = std::find_if(kAxisNames.begin(), kAxisNames.begin() + axes,
                                        [&](const char* n) { return it.key() == n; });
        if (found == kAxisNames.begin() + axes) {
          issues.add(sp + "/" + it.key(), "unknown axis");
          continue;
        }
        std::vector<double> lim;
        if (vector(it.value(), sp + "/" + it.key(), 2, lim)) {
          c[found - kAxisNames.begin()].limits = {lim[0], lim[1]};
        }
      }
    }
  }

  void profile(const json& j, const std::string& path, PerformanceProfile& p) {
    if (!object(j, path)) return;
    only(j, path, {"rho_inf", "horizon", "rho_cap"});
    number(j, "rho_inf", path, p.rho_inf);
    number(j, "horizon", path, p.horizon);
    if (j.contains("rho_cap")) {
      number(j, "rho_cap", path, p.rho_cap);
    } else {
      p.rho_cap = 1e3 * p.rho_inf;
    }
  }
};

template <typename T>
bool enum_value(Reader& r, const json& j, const char* key, const std::string& path,
                std::initializer_list<std::pair<const char*, T>> table, T& out) {
  if (!j.contains(key)) return false;
  std::string s;
  r.text(j, key, path, s);
  for (const auto& [name, value] : table) {
    if (s == name) {
      out = value;
      return true;
    }
  }
  std::string allowed;
  for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : "|") + std::string(name);
  r.issues.add(path + "/" + key, "expected one of " + allowed);
  return false;
}

void read_scenario(Reader& r, const json& root, ScenarioConfig& c) {
  if (!r.object(root, "")) return;
  r.only(root, "", {"name", "seed", "fidelity", "integrator", "leader", "performance", "observer",
                    "controller", "plants", "topology", "faults", "agents", "output"});
  r.text(root, "name", "", c.name);
  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      c.seed = s.get<std::uint64_t>();
    } else {
      r.issues.add("/seed", "expected a non-negative integer");
    }
  }
  enum_value<Fidelity>(r, root, "fidelity", "",
                       {{"simplified", Fidelity::Simplified}, {"full", Fidelity::Full}},
                       c.fidelity);

  if (root.contains("integrator")) {
    const json& j = root.at("integrator");
    if (r.object(j, "/integrator")) {
      r.only(j, "/integrator", {"dt", "duration"});
      r.number(j, "dt", "/integrator", c.dt);
      r.number(j, "duration", "/integrator", c.duration);
    }
  }
  if (root.contains("leader")) {
    const json& j = root.at("leader");
    if (r.object(j, "/leader")) {
      r.only(j, "/leader", {"t0", "climb_height", "cruise_speed", "sway_amplitude", "sway_rate"});
      r.number(j, "t0", "/leader", c.leader.t0);
      r.number(j, "climb_height", "/leader", c.leader.climb_height);
      r.number(j, "cruise_speed", "/leader", c.leader.cruise_speed);
      r.number(j, "sway_amplitude", "/leader", c.leader.sway_amplitude);
      r.number(j, "sway_rate", "/leader", c.leader.sway_rate);
    }
  }
  if (root.contains("performance")) {
    const json& j = root.at("performance");
    if (r.object(j, "/performance")) {
      r.only(j, "/performance", {"observer", "tracking"});
      if (j.contains("observer")) r.profile(j.at("observer"), "/performance/observer", c.observer_profile);
      if (j.contains("tracking")) r.profile(j.at("tracking"), "/performance/tracking", c.tracking_profile);
    }
  }
  if (root.contains("observer")) {
    const json& j = root.at("observer");
    r.observer(j, "/observer", kMaxAxes, c.observer_gains);
    if (j.is_object()) {
      enum_value<LawLaplacianMode>(
          r, j, "law_laplacian", "/observer",
          {{"nominal", LawLaplacianMode::Nominal}, {"faulted", LawLaplacianMode::Faulted}},
          c.law_laplacian);
    }
  }
  if (root.contains("controller")) {
    const json& j = root.at("controller");
    if (r.object(j, "/controller")) {
      r.only(j, "/controller", {"reference", "uav", "ugv"});
      enum_value<TrackingReference>(
          r, j, "reference", "/controller",
          {{"leader", TrackingReference::Leader}, {"observer", TrackingReference::Observer}},
          c.reference);
      if (j.contains("uav")) r.control(j.at("uav"), "/controller/uav", 3, c.uav_control);
      if (j.contains("ugv")) r.control(j.at("ugv"), "/controller/ugv", 2, c.ugv_control);
    }
  }
  if (root.contains("plants")) {
    const json& j = root.at("plants");
    if (r.object(j, "/plants")) {
      r.only(j, "/plants", {"uav", "ugv"});
      if (j.contains("uav") && r.object(j.at("uav"), "/plants/uav")) {
        const json& u = j.at("uav");
        const std::string p = "/plants/uav";
        r.only(u, p, {"mass", "ixx", "iyy", "izz", "rotor_inertia", "residual_rotor_speed",
                      "gravity", "max_tilt_deg", "attitude_kp", "attitude_kd"});
        r.number(u, "mass", p, c.quad.mass);
        r.number(u, "ixx", p, c.quad.ixx);
        r.number(u, "iyy", p, c.quad.iyy);
        r.number(u, "izz", p, c.quad.izz);
        r.number(u, "rotor_inertia", p, c.quad.rotor_inertia);
        r.number(u, "residual_rotor_speed", p, c.quad.residual_rotor_speed);
        r.number(u, "gravity", p, c.quad.gravity);
        r.number(u, "attitude_kp", p, c.attitude.kp);
        r.number(u, "attitude_kd", p, c.attitude.kd);
        if (u.contains("max_tilt_deg")) {
          double deg = 30.0;
          r.number(u, "max_tilt_deg", p, deg);
          c.max_tilt = deg * std::numbers::pi / 180.0;
        }
      }
      if (j.contains("ugv") && r.object(j.at("ugv"), "/plants/ugv")) {
        const json& u = j.at("ugv");
        const std::string p = "/plants/ugv";
        r.only(u, p, {"mass", "inertia", "wheel_radius", "half_track", "hand_offset"});
        r.number(u, "mass", p, c.ugv.mass);
        r.number(u, "inertia", p, c.ugv.inertia);
        r.number(u, "wheel_radius", p, c.ugv.wheel_radius);
        r.number(u, "half_track", p, c.ugv.half_track);
        r.number(u, "hand_offset", p, c.ugv.hand_offset);
      }
    }
  }
  if (root.contains("output")) {
    const json& j = root.at("output");
    if (r.object(j, "/output")) {
      r.only(j, "/output", {"trace_stride"});
      std::int64_t stride = c.trace_stride;
      r.integer(j, "trace_stride", "/output", stride);
      c.trace_stride = static_cast<int>(std::clamp<std::int64_t>(stride, -1, 1 << 30));
    }
  }

  // Topology.
  if (!root.contains("topology")) {
    r.issues.add("/topology", "required");
  } else if (r.object(root.at("topology"), "/topology")) {
    const json& t = root.at("topology");
    r.only(t, "/topology", {"edges"});
    const json edges = t.value("edges", json::array());
    if (!edges.is_array()) {
      r.issues.add("/topology/edges", "expected an array");
    } else {
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const std::string p = "/topology/edges/" + std::to_string(k);
        const json& e = edges[k];
        if (!r.object(e, p)) continue;
        r.only(e, p, {"from", "to", "weight"});
        Edge edge;
        bool ok = e.contains("from") && e.contains("to");
        if (!ok) r.issues.add(p, "edges need \"from\" and \"to\"");
        if (ok) ok = r.node(e.at("from"), p + "/from", true, edge.source);
        if (ok) ok = r.node(e.at("to"), p + "/to", false, edge.target);
        r.number(e, "weight", p, edge.weight);
        if (ok) c.edges.push_back(edge);
      }
    }
  }

  // Faults.
  if (root.contains("faults")) {
    const json& f = root.at("faults");
    if (!f.is_array()) {
      r.issues.add("/faults", "expected an array");
    } else {
      for (std::size_t k = 0; k < f.size(); ++k) {
        const std::string p = "/faults/" + std::to_string(k);
        const json& e = f[k];
        if (!r.object(e, p)) continue;
        r.only(e, p, {"from", "to", "window", "amplitude", "frequency", "noise", "smoothing_tau"});
        FaultEntry entry;
        bool ok = e.contains("from") && e.contains("to") && e.contains("window");
        if (!ok) r.issues.add(p, "faults need \"from\", \"to\" and \"window\"");
        if (ok) ok = r.node(e.at("from"), p + "/from", true, entry.source);
        if (ok) ok = r.node(e.at("to"), p + "/to", false, entry.target);
        std::vector<double> window;
        if (ok) ok = r.vector(e.at("window"), p + "/window", 2, window);
        if (ok) {
          entry.t_on = window[0];
          entry.t_off = window[1];
        }
        r.number(e, "amplitude", p, entry.perturbation.amplitude);
        r.number(e, "frequency", p, entry.perturbation.frequency);
        r.number(e, "smoothing_tau", p, entry.perturbation.smoothing_tau);
        enum_value<NoiseMode>(r, e, "noise", p,
                              {{"held", NoiseMode::Held},
                               {"smoothed", NoiseMode::Smoothed},
                               {"none", NoiseMode::None}},
                              entry.perturbation.noise);
        if (ok) c.faults.entries.push_back(entry);
      }
    }
  }

  // Agents, resolved against the kind-wide defaults.
  if (!root.contains("agents")) {
    r.issues.add("/agents", "required");
    return;
  }
  const json& agents = root.at("agents");
  if (!agents.is_array()) {
    r.issues.add("/agents", "expected an array");
    return;
  }
  for (std::size_t k = 0; k < agents.size(); ++k) {
    const std::string p = "/agents/" + std::to_string(k);
    const json& a = agents[k];
    if (!r.object(a, p)) continue;
    r.only(a, p, {"id", "kind", "position", "heading", "formation", "observer", "controller"});
    AgentConfig ag;
    std::int64_t id = 0;
    if (!a.contains("id")) r.issues.add(p + "/id", "required");
    r.integer(a, "id", p, id);
    ag.id = static_cast<int>(std::clamp<std::int64_t>(id, -1, 1 << 30));
    if (!a.contains("kind")) {
      r.issues.add(p + "/kind", "required");
    } else {
      enum_value<AgentKind>(r, a, "kind", p, {{"uav", AgentKind::Uav}, {"ugv", AgentKind::Ugv}},
                            ag.kind);
    }
    const int axes = ag.axis_count();
    if (!a.contains("position")) {
      r.issues.add(p + "/position", "required");
    } else {
      std::vector<double> pos;
      if (r.vector(a.at("position"), p + "/position", static_cast<std::size_t>(axes), pos)) {
        for (int i = 0; i < axes; ++i) ag.initial_position(i) = pos[i];
      }
    }
    r.number(a, "heading", p, ag.initial_heading);
    if (a.contains("formation") && r.object(a.at("formation"), p + "/formation")) {
      const json& f = a.at("formation");
      const std::string fp = p + "/formation";
      r.only(f, fp, {"radius", "rate", "phase", "altitude"});
      r.number(f, "radius", fp, ag.formation.radius);
      r.number(f, "rate", fp, ag.formation.rate);
      r.number(f, "phase", fp, ag.formation.phase);
      r.number(f, "altitude", fp, ag.formation.altitude);
    }
    ag.observer = c.observer_gains;
    ag.control = ag.kind == AgentKind::Uav ? c.uav_control : c.ugv_control;
    if (a.contains("observer")) {
      const json& o = a.at("observer");
      if (o.is_object() && o.contains("law_laplacian")) {
        r.issues.add(p + "/observer/law_laplacian", "only settable scenario-wide");
      }
      r.observer(o, p + "/observer", axes, ag.observer);
    }
    if (a.contains("controller")) r.control(a.at("controller"), p + "/controller", axes, ag.control);
    c.agents.push_back(ag);
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ParseError("parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(col) + ": " + e.what(),
                     line, col);
  }
  Reader reader;
  ScenarioConfig config;
  read_scenario(reader, root, config);
  if (!reader.issues.list.empty()) throw ValidationError(std::move(reader.issues.list));
  auto issues = validate(config);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading scenario file " + path.string());
  return parse_config(buf.str());
}

// --------------------------------------------------------- serialization

namespace {

json node_json(int index) { return index == kLeader ? json("leader") : json(index + 1); }

json observer_json(const std::array<ObserverGains, kMaxAxes>& g, int axes) {
  json out = json::object();
  auto arr = [&](auto field) {
    json a = json::array();
    for (int i = 0; i < axes; ++i) a.push_back(field(g[i]));
    return a;
  };
  out["k1"] = arr([](const ObserverGains& x) { return x.k1; });
  out["k2"] = arr([](const ObserverGains& x) { return x.k2; });
  out["eta"] = arr([](const ObserverGains& x) { return x.eta; });
  out["p"] = arr([](const ObserverGains& x) { return x.p; });
  out["sigma1"] = arr([](const ObserverGains& x) { return x.sigma1; });
  out["sigma2"] = arr([](const ObserverGains& x) { return x.sigma2; });
  return out;
}

json control_json(const std::array<AxisControl, kMaxAxes>& c, int axes) {
  json out = json::object();
  auto arr = [&](auto field) {
    json a = json::array();
    for (int i = 0; i < axes; ++i) a.push_back(field(c[i]));
    return a;
  };
  out["lambda_s"] = arr([](const AxisControl& x) { return x.sliding.lambda_s; });
  out["k_s"] = arr([](const AxisControl& x) { return x.sliding.k_s; });
  out["delta1"] = arr([](const AxisControl& x) { return x.corridor.delta1; });
  out["delta2"] = arr([](const AxisControl& x) { return x.corridor.delta2; });
  out["omega_a"] = arr([](const AxisControl& x) { return x.corridor.omega_a; });
  json sat = json::object();
  for (int i = 0; i < axes; ++i) sat[kAxisNames[i]] = {c[i].limits.lo, c[i].limits.hi};
  out["saturation"] = sat;
  return out;
}

json profile_json(const PerformanceProfile& p) {
  return {{"rho_inf", p.rho_inf}, {"horizon", p.horizon}, {"rho_cap", p.rho_cap}};
}

const char* noise_name(NoiseMode m) {
  switch (m) {
    case NoiseMode::Held: return "held";
    case NoiseMode::Smoothed: return "smoothed";
    case NoiseMode::None: return "none";
  }
  return "held";
}

}  // namespace

namespace {

// Degrees for the emitted file, rounded when that still parses back to the
// same radians.
double tilt_degrees(double rad) {
  const double deg = rad * 180.0 / std::numbers::pi;
  const double rounded = std::round(deg * 1e9) / 1e9;
  return rounded * std::numbers::pi / 180.0 == rad ? rounded : deg;
}

}  // namespace

std::string to_json_text(const ScenarioConfig& c) {
  json root = json::object();
  root["name"] = c.name;
  root["seed"] = c.seed;
  root["fidelity"] = c.fidelity == Fidelity::Full ? "full" : "simplified";
  root["integrator"] = {{"dt", c.dt}, {"duration", c.duration}};
  root["leader"] = {{"t0", c.leader.t0},
                    {"climb_height", c.leader.climb_height},
                    {"cruise_speed", c.leader.cruise_speed},
                    {"sway_amplitude", c.leader.sway_amplitude},
                    {"sway_rate", c.leader.sway_rate}};
  root["performance"] = {{"observer", profile_json(c.observer_profile)},
                         {"tracking", profile_json(c.tracking_profile)}};
  json obs = observer_json(c.observer_gains, kMaxAxes);
  obs["law_laplacian"] = c.law_laplacian == LawLaplacianMode::Faulted ? "faulted" : "nominal";
  root["observer"] = obs;
  root["controller"] = {
      {"reference", c.reference == TrackingReference::Observer ? "observer" : "leader"},
      {"uav", control_json(c.uav_control, 3)},
      {"ugv", control_json(c.ugv_control, 2)}};
  root["plants"] = {
      {"uav",
       {{"mass", c.quad.mass},
        {"ixx", c.quad.ixx},
        {"iyy", c.quad.iyy},
        {"izz", c.quad.izz},
        {"rotor_inertia", c.quad.rotor_inertia},
        {"residual_rotor_speed", c.quad.residual_rotor_speed},
        {"gravity", c.quad.gravity},
        {"max_tilt_deg", tilt_degrees(c.max_tilt)},
        {"attitude_kp", c.attitude.kp},
        {"attitude_kd", c.attitude.kd}}},
      {"ugv",
       {{"mass", c.ugv.mass},
        {"inertia", c.ugv.inertia},
        {"wheel_radius", c.ugv.wheel_radius},
        {"half_track", c.ugv.half_track},
        {"hand_offset", c.ugv.hand_offset}}}};

  json edges = json::array();
  for (const Edge& e : c.edges) {
    edges.push_back({{"from", node_json(e.source)}, {"to", e.target + 1}, {"weight", e.weight}});
  }
  root["topology"] = {{"edges", edges}};

  json faults = json::array();
  for (const FaultEntry& f : c.faults.entries) {
    faults.push_back({{"from", node_json(f.source)},
                      {"to", f.target + 1},
                      {"window", {f.t_on, f.t_off}},
                      {"amplitude", f.perturbation.amplitude},
                      {"frequency", f.perturbation.frequency},
                      {"noise", noise_name(f.perturbation.noise)},
                      {"smoothing_tau", f.perturbation.smoothing_tau}});
  }
  root["faults"] = faults;

  json agents = json::array();
  for (const AgentConfig& ag : c.agents) {
    const int axes = ag.axis_count();
    json a = {{"id", ag.id}, {"kind", ag.kind == AgentKind::Uav ? "uav" : "ugv"}};
    json pos = json::array();
    for (int i = 0; i < axes; ++i) pos.push_back(ag.initial_position(i));
    a["position"] = pos;
    if (ag.kind == AgentKind::Ugv) a["heading"] = ag.initial_heading;
    a["formation"] = {{"radius", ag.formation.radius},
                      {"rate", ag.formation.rate},
                      {"phase", ag.formation.phase},
                      {"altitude", ag.formation.altitude}};
    const auto& defaults = ag.kind == AgentKind::Uav ? c.uav_control : c.ugv_control;
    bool obs_differs = false, ctl_differs = false;
    for (int i = 0; i < axes; ++i) {
      obs_differs = obs_differs || !(ag.observer[i] == c.observer_gains[i]);
      ctl_differs = ctl_differs || !(ag.control[i] == defaults[i]);
    }
    if (obs_differs) a["observer"] = observer_json(ag.observer, axes);
    if (ctl_differs) a["controller"] = control_json(ag.control, axes);
    agents.push_back(a);
  }
  root["agents"] = agents;
  root["output"] = {{"trace_stride", c.trace_stride}};
  return root.dump(2) + "\n";
}

// ------------------------------------------------------ reference scenario

ScenarioConfig paper_scenario() {
  ScenarioConfig c;
  c.name = "paper_scenario";
  c.seed = 0;
  c.dt = 1e-3;
  c.duration = 30.0;
  c.fidelity = Fidelity::Simplified;
  c.observer_profile = PerformanceProfile::with_default_cap(0.1, 5.0);
  c.tracking_profile = PerformanceProfile::with_default_cap(0.3, 5.0);
  c.trace_stride = 10;

  for (int a = 0; a < kMaxAxes; ++a) {
    c.observer_gains[a] = ObserverGains{};
    c.uav_control[a].sliding = {5.0, a == 2 ? 10.0 : 5.0};
    c.uav_control[a].corridor = {1.0, 1.0, 8.0};
    c.uav_control[a].limits = {-10.0, 10.0};
    c.ugv_control[a].sliding = {5.0, 5.0};
    c.ugv_control[a].corridor = {1.0, 1.0, 8.0};
    c.ugv_control[a].limits = {-5.0, 5.0};
  }
  c.uav_control[2].limits = {-c.quad.gravity + 0.5, 10.0};

  // Followers 1..5 are UAVs, 6..9 UGVs (0-based below).
  c.edges = {{kLeader, 0, 1.0}, {kLeader, 4, 1.0}, {0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0},
             {3, 4, 1.0},       {0, 5, 1.0},       {1, 6, 1.0}, {2, 7, 1.0}, {3, 8, 1.0}};

  FaultEntry f1;
  f1.source = 0;
  f1.target = 1;
  f1.t_on = 10.0;
  f1.t_off = 15.0;
  FaultEntry f2;
  f2.source = kLeader;
  f2.target = 4;
  f2.t_on = 20.0;
  f2.t_off = 25.0;
  c.faults.entries = {f1, f2};

  const double uav_xy[5][2] = {{1, 3}, {-2, 2}, {-2, -2}, {1, -3}, {3, 0}};
  for (int i = 0; i < 5; ++i) {
    AgentConfig ag;
    ag.id = i + 1;
    ag.kind = AgentKind::Uav;
    ag.initial_position = {uav_xy[i][0], uav_xy[i][1], 0.0};
    ag.formation = {3.0, 0.5, 2.0 * (i + 1) * std::numbers::pi / 5.0, 0.0};
    ag.observer = c.observer_gains;
    ag.control = c.uav_control;
    c.agents.push_back(ag);
  }
  const double ugv_xy[4][2] = {{1.5, 0}, {0, 1.5}, {-1.5, 0}, {0, -1.5}};
  for (int j = 0; j < 4; ++j) {
    AgentConfig ag;
    ag.id = 6 + j;
    ag.kind = AgentKind::Ugv;
    ag.initial_position = {ugv_xy[j][0], ugv_xy[j][1], 0.0};
    ag.formation = {2.0, 0.3, 2.0 * j * std::numbers::pi / 4.0, 0.0};
    ag.observer = c.observer_gains;
    ag.control = c.ugv_control;
    c.agents.push_back(ag);
  }
  return c;
}

}  // namespace ppcform
