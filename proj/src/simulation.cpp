#include "ppcform/simulation.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "ppcform/errors.hpp"

namespace ppcform {

namespace {

/// Agents taking part in one axis (every agent for x/y, the UAVs for z).
struct AxisGroup {
  int axis = 0;
  std::vector<int> members;
  std::optional<LawLaplacian> nominal;
  double nominal_sigma = 0.0;
};

struct AgentRuntime {
  std::array<PointMassAxis, kMaxAxes> simple{};
  QuadState quad = QuadState::Zero();
  UgvState ugv = UgvState::Zero();
  std::array<ObserverState, kMaxAxes> obs{};
  std::array<AuxiliaryState, kMaxAxes> aux{};
};

PointMassAxis plant_axis(const ScenarioConfig& c, const AgentConfig& ag, const AgentRuntime& rt,
                         int a) {
  if (c.fidelity == Fidelity::Simplified) return rt.simple[a];
  if (ag.kind == AgentKind::Uav) return {rt.quad(a), rt.quad(3 + a)};
  const Vec2 vel = ugv_point_velocity(c.ugv, rt.ugv);
  return {rt.ugv(a), vel(a)};
}

std::vector<int> resolve_order(const SimulationOptions& options, int n) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (options.evaluation_order.empty()) return order;
  std::vector<int> sorted = options.evaluation_order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != order) throw std::invalid_argument("evaluation_order must permute 0..n-1");
  return options.evaluation_order;
}

}  // namespace

RunSummary run(const ScenarioConfig& config, std::span<TraceSink* const> sinks,
               const SimulationOptions& options) {
  if (auto issues = validate(config); !issues.empty()) throw ValidationError(std::move(issues));

  const int n = static_cast<int>(config.agents.size());
  const std::vector<int> order = resolve_order(options, n);
  const TopologySpec topology = config.topology();
  const double dt = config.dt;
  const std::int64_t steps = config.step_count();

  std::vector<AxisGroup> groups;
  for (int a = 0; a < kMaxAxes; ++a) {
    AxisGroup g;
    g.axis = a;
    for (int i = 0; i < n; ++i) {
      if (config.agents[i].axis_count() > a) g.members.push_back(i);
    }
    if (g.members.empty()) continue;
    g.nominal.emplace(nominal_laplacian(topology.induced(g.members)));
    g.nominal_sigma = min_singular_value(g.nominal->matrix());
    groups.push_back(std::move(g));
  }

  std::vector<AgentRuntime> agents(static_cast<std::size_t>(n));
  std::vector<int> row_offset(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) {
    const AgentConfig& ag = config.agents[i];
    AgentRuntime& rt = agents[i];
    for (int a = 0; a < ag.axis_count(); ++a) {
      rt.simple[a] = {ag.initial_position(a), 0.0};
      rt.obs[a].zeta_p = ag.initial_position(a);
    }
    rt.quad.head<3>() = ag.initial_position;
    rt.ugv << ag.initial_position(0), ag.initial_position(1), ag.initial_heading, 0.0, 0.0;
    row_offset[i + 1] = row_offset[i] + ag.axis_count();
  }

  FaultNoise noise(config.seed, dt);
  RunSummary summary;
  std::vector<AgentRuntime> next = agents;
  TraceRecord rec;
  rec.rows.resize(static_cast<std::size_t>(row_offset[n]));

  int ctx_agent = 0, ctx_axis = 0;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double t = config.time_at(k);
    try {
      ctx_agent = 0;
      ctx_axis = 0;
      const LeaderSample leader = leader_closed_form(config.leader, t);
      rec.step = k;
      rec.t = t;
      rec.fault_active = config.faults.any_active(t);
      rec.clamps = {};
      rec.diagnostics = {};
      ClampCounter obs_clamps, trk_clamps;

      const WeightSnapshot weights = effective_weights(topology, config.faults, t, k, noise);
      rec.clamps.weight_floor = static_cast<std::uint64_t>(weights.clamp_events);

      // Observers: every agent reads the same start-of-step estimates.
      for (AxisGroup& g : groups) {
        const int a = g.axis;
        ctx_axis = a;
        const std::size_t m = g.members.size();
        const WeightSnapshot snap = weights.induced(g.members);
        std::vector<ObserverState> states(m);
        std::vector<ObserverGains> gains(m);
        for (std::size_t s = 0; s < m; ++s) {
          states[s] = agents[g.members[s]].obs[a];
          gains[s] = config.agents[g.members[s]].observer[a];
        }
        const auto xi = neighborhood_errors(states, {leader.p(a), leader.v(a)}, snap);
        std::vector<TransformPoint> transformed(m);
        for (std::size_t s = 0; s < m; ++s) {
          transformed[s] = evaluate_sym(xi[s].xi_p, config.observer_profile, t, &obs_clamps);
        }
        std::optional<LawLaplacian> faulted;
        if (rec.fault_active) {
          const FaultedLaplacian lap = build_faulted_laplacian(snap);
          rec.diagnostics.min_singular[a] = min_singular_value(lap.matrix);
          if (config.law_laplacian == LawLaplacianMode::Faulted) faulted.emplace(lap.matrix);
        } else {
          rec.diagnostics.min_singular[a] = g.nominal_sigma;
        }
        const LawLaplacian& law = faulted ? *faulted : *g.nominal;
        const VirtualLaws laws = virtual_laws(xi, transformed, gains, law);
        rec.diagnostics.lyapunov[a] =
            lyapunov_surrogate(transformed, states, gains, laws, leader.v(a));

        for (std::size_t s = 0; s < m; ++s) {
          const int i = g.members[s];
          ctx_agent = config.agents[i].id;
          const auto idx = static_cast<Eigen::Index>(s);
          next[i].obs[a] =
              observer_step(states[s], laws.alpha1(idx), laws.alpha2(idx), gains[s], dt);
          TraceRow& row = rec.rows[static_cast<std::size_t>(row_offset[i] + a)];
          row.zeta_p = states[s].zeta_p;
          row.zeta_v = states[s].zeta_v;
          row.xi_p = xi[s].xi_p;
          row.xi_v = xi[s].xi_v;
          row.rho = config.observer_profile.rho(t);
        }
      }

      // Tracking controllers and plants.
      for (int i : order) {
        const AgentConfig& ag = config.agents[i];
        const AgentRuntime& rt = agents[i];
        ctx_agent = ag.id;
        Vec3 command = Vec3::Zero();
        for (int a = 0; a < ag.axis_count(); ++a) {
          ctx_axis = a;
          const AxisControl& ctl = ag.control[a];
          const PointMassAxis x = plant_axis(config, ag, rt, a);
          const FormationOffset h = formation_plan_eval(ag.formation, a, t);
          const ObserverState& ob = rt.obs[a];
          const bool own = config.reference == TrackingReference::Observer;
          const double ref_p = own ? ob.zeta_p : leader.p(a);
          const double ref_v = own ? ob.zeta_v : leader.v(a);
          const TrackingError e{x.p - h.p - ref_p, x.v - h.v - ref_v};
          const AuxiliaryState& aux = rt.aux[a];
          const TransformedError te = transformed_error_dynamics(
              e, aux, ctl.corridor, config.tracking_profile, t, &trk_clamps);
          const double v = control_law(te, ctl.sliding, aux, ctl.corridor, ob.abar2, h.v_dot);
          const Saturated sat = saturate(v, ctl.limits);
          next[i].aux[a] = aux_step(aux, sat.du, ctl.corridor.omega_a, dt);
          command(a) = sat.u;

          TraceRow& row = rec.rows[static_cast<std::size_t>(row_offset[i] + a)];
          row.agent = ag.id;
          row.axis = a;
          row.xp = x.p;
          row.xv = x.v;
          row.e_p = e.e_p;
          row.e_v = e.e_v;
          row.bound_lo = te.corridor.lo;
          row.bound_hi = te.corridor.hi;
          row.eps = te.eps;
          row.s = sliding_value(te, ctl.sliding);
          row.v = v;
          row.u = sat.u;
          row.du = sat.du;
          row.xa = te.corridor.xa;
          row.fault_active = rec.fault_active;
        }

        AgentRuntime& out = next[i];
        if (config.fidelity == Fidelity::Simplified) {
          for (int a = 0; a < ag.axis_count(); ++a) {
            ctx_axis = a;
            out.simple[a] = point_mass_step(rt.simple[a], command(a), dt);
          }
        } else if (ag.kind == AgentKind::Uav) {
          ctx_axis = 2;
          const UavCommand cmd = uav_input_map(command, 0.0, config.quad, config.max_tilt);
          if (cmd.tilt_clipped) ++rec.diagnostics.tilt_clips;
          const Vec3 torque =
              inner_loop_attitude(config.quad, rt.quad, {cmd.roll, cmd.pitch, 0.0}, config.attitude);
          out.quad = quad_full_step(config.quad, rt.quad,
                                    {cmd.thrust, torque(0), torque(1), torque(2)}, dt);
        } else {
          const WheelTorques torque = ugv_input_map(command.head<2>(), rt.ugv, config.ugv);
          out.ugv = ugv_step(config.ugv, rt.ugv, torque, dt);
        }
      }

      rec.clamps.observer_transform = obs_clamps.count;
      rec.clamps.tracking_transform = trk_clamps.count;
    } catch (const SimulationAborted&) {
      throw;
    } catch (const Error& e) {
      throw SimulationAborted(e.what(), ctx_agent, ctx_axis, t);
    }

    summary.clamps += rec.clamps;
    summary.tilt_clips += rec.diagnostics.tilt_clips;
    for (TraceSink* sink : sinks) sink->consume(rec);
    std::swap(agents, next);
    summary.steps = k + 1;
  }
  for (TraceSink* sink : sinks) sink->finish();
  return summary;
}

}  // namespace ppcform
