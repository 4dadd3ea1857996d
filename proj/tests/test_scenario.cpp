#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "ppcform/config.hpp"
#include "ppcform/errors.hpp"
#include "ppcform/metrics.hpp"
#include "ppcform/simulation.hpp"
#include "ppcform/trace_io.hpp"

using namespace ppcform;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ppcform_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ScenarioConfig short_run(double duration) {
  ScenarioConfig c = paper_scenario();
  c.duration = duration;
  c.trace_stride = 1;
  return c;
}

struct Recorder : TraceSink {
  std::vector<TraceRecord> records;
  void consume(const TraceRecord& r) override { records.push_back(r); }
};

// Every issue path reported for a scenario text, or empty if it loads.
std::vector<ValidationIssue> issues_of(const json& j) {
  try {
    parse_config(j.dump());
  } catch (const ValidationError& e) {
    return e.issues();
  }
  return {};
}

bool has_path(const std::vector<ValidationIssue>& issues, const std::string& prefix) {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.path.rfind(prefix, 0) == 0; });
}

std::string write_trace(const ScenarioConfig& c, const fs::path& dir,
                        const SimulationOptions& opts = {}) {
  {
    CsvTraceWriter csv(dir / "trace.csv", c.trace_stride);
    TraceSink* sinks[] = {&csv};
    run(c, sinks, opts);
  }
  return slurp(dir / "trace.csv");
}

}  // namespace

TEST_CASE("bundled scenario file matches the built-in reference") {
  const ScenarioConfig loaded =
      load_config(fs::path(PPCFORM_SCENARIO_DIR) / "paper_scenario.json");
  CHECK(to_json_text(loaded) == to_json_text(paper_scenario()));
  CHECK(loaded.agents.size() == 9);
  CHECK(loaded.dt == 1e-3);
  CHECK(loaded.duration == 30.0);
  CHECK(loaded.fidelity == Fidelity::Simplified);
}

TEST_CASE("scenario JSON round trip") {
  ScenarioConfig c = paper_scenario();
  c.seed = 77;
  c.fidelity = Fidelity::Full;
  c.reference = TrackingReference::Observer;
  c.law_laplacian = LawLaplacianMode::Faulted;
  c.faults.entries[0].perturbation.noise = NoiseMode::Smoothed;
  c.agents[2].observer[1].k1 = 3.5;
  c.agents[7].control[0].limits = {-4.0, 3.0};
  const std::string text = to_json_text(c);
  const ScenarioConfig back = parse_config(text);
  CHECK(to_json_text(back) == text);
  CHECK(back.agents[2].observer[1].k1 == 3.5);
  CHECK(back.agents[2].observer[0].k1 == 2.0);
  CHECK(back.agents[7].control[0].limits == SaturationLimits{-4.0, 3.0});
}

TEST_CASE("leader must reach every follower") {
  json j = json::parse(to_json_text(paper_scenario()));
  for (auto& e : j["topology"]["edges"])
    if (e["from"] == "leader") e["weight"] = 0.0;
  const auto issues = issues_of(j);
  REQUIRE_FALSE(issues.empty());
  const bool named = std::any_of(issues.begin(), issues.end(), [](const ValidationIssue& i) {
    return i.path == "/topology" && i.message.find("leader-reachability") != std::string::npos;
  });
  CHECK(named);

  // Dropping the leader -> 1 link strands agents 1..4 and the UGVs they feed.
  json k = json::parse(to_json_text(paper_scenario()));
  auto& edges = k["topology"]["edges"];
  edges.erase(edges.begin());
  CHECK(has_path(issues_of(k), "/topology"));
}

TEST_CASE("step size and gains are gated before a run") {
  json j = json::parse(to_json_text(paper_scenario()));
  j["integrator"]["dt"] = 0.01;
  const auto dt_issues = issues_of(j);
  REQUIRE(has_path(dt_issues, "/integrator/dt"));
  CHECK(dt_issues.front().message.find("stiffness") != std::string::npos);

  json k = json::parse(to_json_text(paper_scenario()));
  k["controller"]["uav"]["k_s"][0] = 0.0;
  CHECK(has_path(issues_of(k), "/controller/uav/k_s/0"));

  ScenarioConfig c = paper_scenario();
  c.ugv_control[1].sliding.k_s = 0.0;
  Recorder rec;
  TraceSink* sinks[] = {&rec};
  CHECK_THROWS_AS(run(c, sinks), ValidationError);
  CHECK(rec.records.empty());
}

TEST_CASE("every single-field corruption is caught") {
  const json base = json::parse(to_json_text(paper_scenario()));
  REQUIRE(issues_of(base).empty());
  struct Mutation {
    const char* pointer;
    json value;
    const char* expected_path;
  };
  const std::vector<Mutation> mutations = {
      {"/seed", -1, "/seed"},
      {"/seed", "zero", "/seed"},
      {"/fidelity", "exact", "/fidelity"},
      {"/integrator/dt", 0.0, "/integrator/dt"},
      {"/integrator/dt", 0.01, "/integrator/dt"},
      {"/integrator/duration", -3.0, "/integrator/duration"},
      {"/leader/t0", -1.0, "/leader/t0"},
      {"/performance/observer/rho_inf", 0.0, "/performance/observer/rho_inf"},
      {"/performance/observer/horizon", -5.0, "/performance/observer/horizon"},
      {"/performance/observer/rho_cap", 0.01, "/performance/observer/rho_cap"},
      {"/performance/tracking/rho_inf", -0.3, "/performance/tracking/rho_inf"},
      {"/observer/k1/0", 0.0, "/observer/k1/0"},
      {"/observer/k2/1", -50.0, "/observer/k2/1"},
      {"/observer/eta/2", 0.0, "/observer/eta/2"},
      {"/observer/p/0", 0.0, "/observer/p/0"},
      {"/observer/sigma1/0", 0.0, "/observer/sigma1/0"},
      {"/observer/sigma2/1", 0.001, "/integrator/dt"},
      {"/observer/law_laplacian", "inverse", "/observer/law_laplacian"},
      {"/controller/reference", "sky", "/controller/reference"},
      {"/controller/uav/lambda_s/0", 0.0, "/controller/uav/lambda_s/0"},
      {"/controller/uav/k_s/2", -1.0, "/controller/uav/k_s/2"},
      {"/controller/uav/delta1/1", 0.0, "/controller/uav/delta1/1"},
      {"/controller/uav/delta2/0", -1.0, "/controller/uav/delta2/0"},
      {"/controller/uav/omega_a/0", 0.0, "/controller/uav/omega_a/0"},
      {"/controller/uav/saturation/x", json::array({3.0, -3.0}), "/controller/uav/saturation/x"},
      {"/controller/uav/saturation/z", json::array({-12.0, 10.0}), "/controller/uav/saturation/z"},
      {"/controller/ugv/k_s/1", 0.0, "/controller/ugv/k_s/1"},
      {"/controller/ugv/saturation/y", json::array({1.0, 1.0}), "/controller/ugv/saturation/y"},
      {"/plants/uav/mass", 0.0, "/plants/uav/mass"},
      {"/plants/uav/ixx", -0.02, "/plants/uav/ixx"},
      {"/plants/uav/gravity", 0.0, "/plants/uav/gravity"},
      {"/plants/uav/rotor_inertia", -1.0, "/plants/uav/rotor_inertia"},
      {"/plants/uav/max_tilt_deg", 95.0, "/plants/uav/max_tilt_deg"},
      {"/plants/uav/attitude_kp", 0.0, "/plants/uav/attitude_kp"},
      {"/plants/ugv/mass", 0.0, "/plants/ugv/mass"},
      {"/plants/ugv/wheel_radius", -0.02, "/plants/ugv/wheel_radius"},
      {"/plants/ugv/half_track", 0.0, "/plants/ugv/half_track"},
      {"/plants/ugv/hand_offset", 0.0, "/plants/ugv/hand_offset"},
      {"/topology/edges/2/weight", -1.0, "/topology/edges/2/weight"},
      {"/topology/edges/2/to", 12, "/topology/edges/2/to"},
      {"/topology/edges/3/from", 3, "/topology/edges/3"},
      {"/faults/0/window", json::array({15.0, 10.0}), "/faults/0"},
      {"/faults/0/to", 9, "/faults/0"},
      {"/faults/1/noise", "pink", "/faults/1/noise"},
      {"/faults/0/amplitude", -0.5, "/faults/0"},
      {"/agents/0/id", 4, "/agents/0/id"},
      {"/agents/0/kind", "boat", "/agents/0/kind"},
      {"/agents/0/position/0", 400.0, "/agents/0/position"},
      {"/agents/6/position", json::array({1.0, 2.0, 3.0}), "/agents/6/position"},
      {"/agents/3/formation/radius", "wide", "/agents/3/formation/radius"},
      {"/output/trace_stride", 0, "/output/trace_stride"},
      {"/name", 5, "/name"},
      {"/colour", "red", "/colour"},
  };
  for (const Mutation& m : mutations) {
    json j = base;
    j[json::json_pointer(m.pointer)] = m.value;
    const auto issues = issues_of(j);
    const std::string pointer = m.pointer;
    CAPTURE(pointer);
    CHECK(has_path(issues, m.expected_path));
  }
}

TEST_CASE("parse errors carry line and column") {
  const std::string text = "{\n  \"name\": \"x\",\n  \"seed\": ,\n}\n";
  try {
    parse_config(text);
    FAIL("malformed text was accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 11);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/scenario.json"), IoError);
}

TEST_CASE("formation offsets") {
  const ScenarioConfig c = paper_scenario();
  const FormationSlot& uav5 = c.agents[4].formation;
  CHECK(formation_plan_eval(uav5, 0, 0.0).p == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(formation_plan_eval(uav5, 1, 0.0).p) < 1e-14);
  const FormationSlot& ugv8 = c.agents[7].formation;
  CHECK(formation_plan_eval(ugv8, 0, 0.0).p == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(std::abs(formation_plan_eval(ugv8, 1, 0.0).p) < 1e-14);

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> ut(0.0, 30.0);
  for (int k = 0; k < 1000; ++k) {
    const double t = ut(gen);
    for (const AgentConfig& ag : c.agents) {
      const double x = formation_plan_eval(ag.formation, 0, t).p;
      const double y = formation_plan_eval(ag.formation, 1, t).p;
      CHECK(std::hypot(x, y) == doctest::Approx(ag.kind == AgentKind::Uav ? 3.0 : 2.0));
    }
    // Analytic rate and acceleration against central differences.
    const FormationSlot& s = c.agents[k % 9].formation;
    const double h = 1e-5;
    for (int a = 0; a < 2; ++a) {
      const FormationOffset f = formation_plan_eval(s, a, t);
      const double fd_v =
          (formation_plan_eval(s, a, t + h).p - formation_plan_eval(s, a, t - h).p) / (2 * h);
      const double fd_a =
          (formation_plan_eval(s, a, t + h).v - formation_plan_eval(s, a, t - h).v) / (2 * h);
      CHECK(std::abs(f.v - fd_v) < 1e-8);
      CHECK(std::abs(f.v_dot - fd_a) < 1e-8);
    }
  }
}

TEST_CASE("three-step run writes one block of rows per step") {
  const fs::path dir = scratch("three_step");
  const ScenarioConfig c = short_run(0.003);
  REQUIRE(c.step_count() == 3);
  const std::string text = write_trace(c, dir);
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,agent,axis,xp,xv,zeta_p,zeta_v,xi_p,xi_v,rho,e_p,e_v,bound_lo,bound_hi,eps,s,v,u,du,"
        "xa,fault_active");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  const int rows_per_step = 5 * 3 + 4 * 2;
  CHECK(lines.size() == 3u * rows_per_step);
  CHECK(lines.front().rfind("0,1,0,", 0) == 0);
  CHECK(lines.back().rfind("0.002,9,1,", 0) == 0);
}

TEST_CASE("metrics recomputed from the CSV equal the live metrics") {
  const fs::path dir = scratch("round_trip");
  ScenarioConfig c = short_run(6.0);
  MetricsAccumulator live(MetricsContext::from(c));
  {
    CsvTraceWriter csv(dir / "trace.csv", 1);
    TraceSink* sinks[] = {&csv, &live};
    run(c, sinks);
  }
  const std::vector<TraceRecord> back = read_trace_csv(dir / "trace.csv");
  CHECK(back.size() == static_cast<std::size_t>(c.step_count()));
  const RunMetrics again = compute_metrics(back, MetricsContext::from(c));
  CHECK(again == live.metrics());
  CHECK(again.records == c.step_count());
}

TEST_CASE("identical config and seed give byte-identical traces") {
  const ScenarioConfig c = short_run(2.0);
  const std::string a = write_trace(c, scratch("det_a"));
  const std::string b = write_trace(c, scratch("det_b"));
  CHECK(a.size() > 1000);
  CHECK(a == b);
}

TEST_CASE("agent evaluation order does not change results") {
  ScenarioConfig c = short_run(12.0);  // covers the first fault window
  const std::string natural = write_trace(c, scratch("order_natural"));
  SimulationOptions reversed;
  reversed.evaluation_order.resize(c.agents.size());
  std::iota(reversed.evaluation_order.rbegin(), reversed.evaluation_order.rend(), 0);
  CHECK(write_trace(c, scratch("order_reversed"), reversed) == natural);
  SimulationOptions shuffled;
  shuffled.evaluation_order.resize(c.agents.size());
  std::iota(shuffled.evaluation_order.begin(), shuffled.evaluation_order.end(), 0);
  std::shuffle(shuffled.evaluation_order.begin(), shuffled.evaluation_order.end(),
               std::mt19937_64(5));
  CHECK(write_trace(c, scratch("order_shuffled"), shuffled) == natural);
}

TEST_CASE("plot data files") {
  const fs::path dir = scratch("plotdata");
  const ScenarioConfig c = short_run(1.0);
  {
    PlotdataWriter plot(dir, c.dt, c.step_count(), {0.5, 1.0}, 10);
    TraceSink* sinks[] = {&plot};
    run(c, sinks);
  }
  for (const char* name : {"snapshot_t0.5.csv", "snapshot_t1.csv", "observer_envelope.csv",
                           "tracking_envelope.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }
  std::istringstream snap(slurp(dir / "snapshot_t1.csv"));
  std::string line;
  std::getline(snap, line);
  CHECK(line == "t,agent,x,y,z");
  int count = 0;
  while (std::getline(snap, line)) {
    ++count;
    CHECK(line.rfind("0.999,", 0) == 0);
    if (count > 5) CHECK(line.back() == ',');  // UGVs have no altitude
  }
  CHECK(count == 9);
  std::istringstream env(slurp(dir / "observer_envelope.csv"));
  int env_rows = -1;
  while (std::getline(env, line)) ++env_rows;
  CHECK(env_rows == 100 * 23);
}

TEST_CASE("violation detector finds a planted violation") {
  std::vector<TraceRecord> records;
  for (int k = 0; k < 50; ++k) {
    TraceRecord r;
    r.step = k;
    r.t = 0.1 * k;
    for (int agent = 1; agent <= 2; ++agent) {
      TraceRow row;
      row.agent = agent;
      row.axis = 0;
      row.rho = 1.0;
      row.xi_p = 0.5;
      row.bound_lo = -1.0;
      row.bound_hi = 1.0;
      row.e_p = 0.2;
      r.rows.push_back(row);
    }
    records.push_back(r);
  }
  MetricsContext ctx;
  ctx.duration = 5.0;
  CHECK(compute_metrics(records, ctx).violations() == 0);

  records[31].rows[1].xi_p = -1.0;  // on the boundary counts as outside
  RunMetrics m = compute_metrics(records, ctx);
  CHECK(m.observer_violations == 1);
  CHECK(m.tracking_violations == 0);
  CHECK(m.first_observer_violation.t == doctest::Approx(3.1));
  CHECK(m.first_observer_violation.agent == 2);

  records[12].rows[0].e_p = 1.5;
  m = compute_metrics(records, ctx);
  CHECK(m.tracking_violations == 1);
  CHECK(m.first_tracking_violation.agent == 1);
  CHECK(m.first_tracking_violation.t == doctest::Approx(1.2));
}

TEST_CASE("convex hull geometry") {
  const auto hull = convex_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {1, 0}, {2, 1}});
  CHECK(hull.size() == 4);
  CHECK(inside_convex(hull, {1.0, 1.0}));
  CHECK(inside_convex(hull, {2.0, 1.0}));
  CHECK(inside_convex(hull, {0.0, 0.0}));
  CHECK_FALSE(inside_convex(hull, {2.0001, 1.0}));
  CHECK_FALSE(inside_convex(hull, {-1.0, -1.0}));
  // Radius-2 points sit inside a regular pentagon of radius 3 (inradius 3 cos 36 deg).
  std::vector<Point2> pent;
  for (int i = 1; i <= 5; ++i) {
    const double a = 2.0 * i * std::numbers::pi / 5.0;
    pent.push_back({3.0 * std::cos(a), 3.0 * std::sin(a)});
  }
  const auto ring = convex_hull(pent);
  CHECK(ring.size() == 5);
  for (int k = 0; k < 360; ++k) {
    const double a = k * std::numbers::pi / 180.0;
    CHECK(inside_convex(ring, {2.0 * std::cos(a), 2.0 * std::sin(a)}));
    CHECK_FALSE(inside_convex(ring, {3.01 * std::cos(a), 3.01 * std::sin(a)}));
  }
}

// ----------------------------------------------------- run-level properties

namespace {

struct AxisSample {
  double t;
  bool fault;
  std::vector<double> zeta_tilde, xi;  // per member of the axis group
  double min_singular;
  double lyapunov;
};

struct PropertyProbe : TraceSink {
  explicit PropertyProbe(const ScenarioConfig& c) : config(c) {}
  const ScenarioConfig& config;
  std::vector<std::array<AxisSample, kMaxAxes>> samples;
  std::vector<TraceRecord> records;
  void consume(const TraceRecord& r) override {
    const LeaderSample l = leader_closed_form(config.leader, r.t);
    std::array<AxisSample, kMaxAxes> s;
    for (int a = 0; a < kMaxAxes; ++a) {
      s[a] = {r.t, r.fault_active, {}, {}, r.diagnostics.min_singular[a], r.diagnostics.lyapunov[a]};
    }
    for (const TraceRow& row : r.rows) {
      s[row.axis].zeta_tilde.push_back(row.zeta_p - l.p(row.axis));
      s[row.axis].xi.push_back(row.xi_p);
    }
    samples.push_back(std::move(s));
    records.push_back(r);
  }
};

double norm(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

struct ReferenceRun {
  ScenarioConfig c = paper_scenario();
  PropertyProbe probe{c};
  MetricsAccumulator metrics{MetricsContext::from(c)};
  RunSummary summary;
  ReferenceRun() {
    TraceSink* sinks[] = {&probe, &metrics};
    summary = run(c, sinks);
  }
};

// One run shared by the property checks below.
const ReferenceRun& reference_run() {
  static const ReferenceRun r;
  return r;
}

}  // namespace

TEST_CASE("reference run is complete") {
  const ReferenceRun& ref = reference_run();
  CHECK(ref.probe.records.size() == static_cast<std::size_t>(ref.c.step_count()));
}

TEST_CASE("estimate error is bounded by the neighborhood error") {
  const ReferenceRun& ref = reference_run();
  const PropertyProbe& probe = ref.probe;

  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& step : probe.samples) {
    for (const AxisSample& s : step) {
      const double bound = norm(s.xi) / s.min_singular;
      worst = std::max(worst, norm(s.zeta_tilde) - bound);
    }
  }
  MESSAGE("largest excess of |zeta~| over |xi| / s_min: " << worst);
  CHECK(worst <= 1e-9);
}

// After T the surrogate may not rise more than 5% above its running minimum
// unless it is below the fitted floor: the residual level once transients are
// over, i.e. its largest value after 2T (fault windows included).
void check_surrogate_plateau(const PropertyProbe& probe, double horizon) {
  for (int a = 0; a < kMaxAxes; ++a) {
    double floor = 0.0;
    for (const auto& step : probe.samples)
      if (step[a].t >= 2.0 * horizon) floor = std::max(floor, step[a].lyapunov);
    double running_min = std::numeric_limits<double>::infinity();
    int excursions = 0;
    double worst_ratio = 0.0, worst_t = 0.0;
    for (const auto& step : probe.samples) {
      const AxisSample& s = step[a];
      if (s.t <= horizon) continue;
      running_min = std::min(running_min, s.lyapunov);
      const double cap = std::max(1.05 * running_min, floor);
      if (s.lyapunov / cap > worst_ratio) {
        worst_ratio = s.lyapunov / cap;
        worst_t = s.t;
      }
      if (s.lyapunov > cap) ++excursions;
    }
    CAPTURE(a);
    MESSAGE("axis " << a << ": floor " << floor << ", worst V / cap " << worst_ratio << " at t = "
                    << worst_t);
    CHECK(excursions == 0);
  }
}

TEST_CASE("observer surrogate settles to a plateau") {
  const ReferenceRun& ref = reference_run();
  check_surrogate_plateau(ref.probe, ref.c.observer_profile.horizon);
}

TEST_CASE("observer surrogate plateau with the leader maneuver inside the transient") {
  // Same team and faults, but the climb ends at 2 s so the leader's velocity
  // jump falls before T instead of on it.
  ScenarioConfig c = paper_scenario();
  c.leader.t0 = 2.0;
  PropertyProbe probe(c);
  TraceSink* sinks[] = {&probe};
  run(c, sinks);
  check_surrogate_plateau(probe, c.observer_profile.horizon);
}

TEST_CASE("sliding variable stays inside its post-transient envelope") {
  const ReferenceRun& ref = reference_run();
  const ScenarioConfig& c = ref.c;
  const PropertyProbe& probe = ref.probe;
  const double horizon = c.observer_profile.horizon;

  double early = 0.0, late = 0.0;
  for (const TraceRecord& r : probe.records) {
    if (r.t <= horizon) continue;
    double m = 0.0;
    for (const TraceRow& row : r.rows) m = std::max(m, std::abs(row.s));
    if (r.t <= 2.0 * horizon) early = std::max(early, m);
    else if (!r.fault_active) late = std::max(late, m);
  }
  MESSAGE("max |s| on (T, 2T]: " << early << ", after 2T outside faults: " << late);
  CHECK(late <= early + 1e-6);
}

TEST_CASE("transformed error obeys the sliding bound") {
  const ReferenceRun& ref = reference_run();
  const ScenarioConfig& c = ref.c;
  const PropertyProbe& probe = ref.probe;
  const double horizon = c.observer_profile.horizon;

  std::map<std::pair<int, int>, double> sup_s;
  for (const TraceRecord& r : probe.records)
    if (r.t > horizon)
      for (const TraceRow& row : r.rows) {
        double& v = sup_s[{row.agent, row.axis}];
        v = std::max(v, std::abs(row.s));
      }
  double worst = -std::numeric_limits<double>::infinity();
  for (const TraceRecord& r : probe.records) {
    if (r.t <= 2.0 * horizon) continue;
    for (const TraceRow& row : r.rows) {
      const AgentConfig& ag = c.agents[row.agent - 1];
      const double bound = sup_s[{row.agent, row.axis}] / ag.control[row.axis].sliding.lambda_s;
      worst = std::max(worst, std::abs(row.eps) - bound);
    }
  }
  MESSAGE("largest excess of |eps| over sup|s| / lambda: " << worst);
  CHECK(worst <= 0.0);
}

TEST_CASE("corridor reverts once saturation ends") {
  const ReferenceRun& ref = reference_run();
  const PropertyProbe& probe = ref.probe;

  const RunMetrics& m = ref.metrics.metrics();
  CHECK(m.violations() == 0);
  CHECK(m.corridor_revert_failures == 0);
  CHECK(m.widening_without_saturation == 0);
  CHECK(ref.summary.clamps.transform_total() == 0);
  // On every saturation-free stretch the |x_a| envelope never rises: the
  // largest value over the rest of the stretch is non-increasing, and the
  // second half of a stretch peaks no higher than the first.
  std::map<std::pair<int, int>, std::vector<double>> stretch;
  int rises = 0, checked = 0;
  auto close = [&](std::vector<double>& xs) {
    if (xs.size() >= 200) {
      const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
      const double first = *std::max_element(xs.begin(), mid);
      const double second = *std::max_element(mid, xs.end());
      ++checked;
      if (second > first) ++rises;
    }
    xs.clear();
  };
  for (const TraceRecord& r : probe.records) {
    for (const TraceRow& row : r.rows) {
      auto& xs = stretch[{row.agent, row.axis}];
      if (row.du != 0.0) close(xs);
      else xs.push_back(std::abs(row.xa));
    }
  }
  for (auto& [key, xs] : stretch) close(xs);
  MESSAGE(checked << " saturation-free stretches checked");
  CHECK(checked > 0);
  CHECK(rises == 0);
}
