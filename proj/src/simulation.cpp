#include "evasion/simulation.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "evasion/errors.hpp"
#include "evasion/motion_control.hpp"
#include "evasion/vehicle_model.hpp"

namespace evasion {
namespace {

int ticks(double interval, double dt) { return static_cast<int>(std::lround(interval / dt)); }

KinematicState kinematic_view(const DynamicState& s) {
  const Vec2 v = rotate_local_to_global(s.v_x, s.v_y, s.theta);
  return {s.x, s.y, v.x, v.y};
}

KinematicInput normalized(const KinematicInput& a, const PlannerProblem& problem) {
  return {std::clamp(a.a_X / problem.accel_scale_x, -1.0, 1.0),
          std::clamp(a.a_Y / problem.accel_scale_y, -1.0, 1.0)};
}

StageCost horizon_sums(const PlannerSolution& sol) {
  StageCost sum;
  for (const auto& c : sol.stage_costs) {
    sum.safe += c.safe;
    sum.stable += c.stable;
    sum.brake += c.brake;
    sum.steer += c.steer;
    sum.barrier_violated = sum.barrier_violated || c.barrier_violated;
  }
  return sum;
}

// Lateral PD toward y = 0 with the body speed held, used outside the maneuver.
KinematicInput lane_keep(const DynamicState& s, double omega, double cap) {
  const Vec2 v = rotate_local_to_global(s.v_x, s.v_y, s.theta);
  return course_acceleration(s, -omega * omega * s.y - 2.0 * omega * v.y, cap);
}

// The planner's own prediction runs through the drawn danger rectangle.
bool predicts_zone_entry(const PlannerSolution& sol, const Obstacle& obs, double zone_depth,
                         double margin) {
  return std::any_of(sol.predicted_states.begin(), sol.predicted_states.end(), [&](const auto& s) {
    return s.x >= obs.x_obs && s.x <= obs.x_obs + zone_depth && std::abs(s.y) < obs.w + margin;
  });
}

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  out += buf;
}

}  // namespace

ObstacleDetector::ObstacleDetector(const Scenario& scenario, std::shared_ptr<const YMaxTable> table)
    : scenario_(scenario), table_(std::move(table)) {
  if (!table_) throw Error("obstacle detector needs a y_max table");
}

Detection ObstacleDetector::detect(const DynamicState& s, double t) {
  if (t < 0.0) throw Error("detection time must be non-negative");
  const Obstacle& obs = scenario_.obstacle;
  const double gap = obs.x_obs - s.x;
  const double closing = std::max(s.v_x * std::cos(s.theta), kClosingSpeedFloor);
  if (!triggered_) {
    if (gap > scenario_.detection_distance + 1e-9) return {};
    const double tau = gap / closing;
    latched_ = {true, tau, lateral_steering_index(obs.w, tau, s.v_x, *table_), t};
    triggered_ = true;
    return latched_;
  }
  if (s.x > obs.x_obs + obs.w) return {false, latched_.tau, latched_.nu, latched_.t_detect};
  return {true, std::max(gap, 0.0) / closing, latched_.nu, latched_.t_detect};
}

Scenario resolve_scenario(const Scenario& scenario, const YMaxTable& table) {
  Scenario out = scenario;
  if (scenario.nu > 0.0)
    out.obstacle.w = scenario.nu * table.lookup(scenario.detection_distance / scenario.v0, scenario.v0);
  return out;
}

EpisodeTrace run_episode(const Scenario& scenario_in, const VehicleParams& p,
                         const EpisodeOptions& options) {
  p.validate();
  Scenario scenario = scenario_in;
  if (options.barrier) scenario.barrier = *options.barrier;
  if (options.sensor_latency) scenario.sensor_latency = *options.sensor_latency;
  if (options.gps_period) scenario.gps_period = *options.gps_period;
  scenario.validate();

  auto table = options.table ? options.table
                             : std::make_shared<const YMaxTable>(build_default_ymax_table(p));
  scenario = resolve_scenario(scenario, *table);

  const double dt = scenario.control_dt;
  const int n_steps = ticks(scenario.sim_duration, dt);
  const int planner_every = std::max(1, ticks(scenario.planner_dt, dt));
  const int latency_ticks = ticks(scenario.sensor_latency, dt);
  const int gps_every = scenario.gps_period > 0.0 ? std::max(1, ticks(scenario.gps_period, dt)) : 1;

  EpisodeTrace trace;
  trace.scenario = scenario;
  trace.rows.reserve(static_cast<std::size_t>(n_steps) + 1);

  const PlannerProblem problem = make_planner_problem(scenario, p);
  MsfConfig msf_cfg = options.msf;
  msf_cfg.direction = scenario.dodge_direction;
  msf_cfg.zone_depth = scenario.zone_depth;
  MsfPlanner msf(p, scenario.obstacle, msf_cfg);
  ObstacleDetector detector(scenario, table);
  BlendConfig blend_cfg = options.blend;
  blend_cfg.threshold = scenario.blend_threshold;
  blend_cfg.width = scenario.blend_width;
  Budget budget = options.budget;
  if (options.force_plan_failure) budget.max_iterations = 0;

  SpeedControllerState speed = make_speed_controller(p);
  ReferenceShaper shaper(speed.K_p / speed.K_i, scenario.v0);

  DynamicState state;
  state.x = scenario.obstacle.x_obs - scenario.detection_distance - scenario.v0 * scenario.approach_time;
  state.v_x = scenario.v0;

  std::vector<Vec2> positions;
  positions.reserve(static_cast<std::size_t>(n_steps) + 1);
  Vec2 gps_fix{state.x, state.y};

  std::optional<HorizonInputs> previous;
  ControlReference ref{0.0, scenario.v0, false};
  double delta_mpc = 0.0;
  double lambda = 1.0;
  StageCost cost{};
  std::string status = "idle";
  bool maneuver_done = false;
  int next_plan = 0;

  try {
    for (int k = 0; k <= n_steps; ++k) {
      const double t = k * dt;
      positions.push_back({state.x, state.y});
      if (k % gps_every == 0) gps_fix = positions[static_cast<std::size_t>(std::max(0, k - latency_ticks))];

      DynamicState view = state;
      view.x = gps_fix.x;
      view.y = gps_fix.y;
      const bool was_triggered = detector.latched().active;
      const Detection det = detector.detect(view, t);
      // The planner clock restarts at the detection instant.
      if (det.active && !was_triggered) next_plan = k;

      if (k == next_plan) {
        next_plan += planner_every;
        const MsfReference m = msf.update(view, det, t);
        trace.detection = detector.latched();

        if (!msf.started() || m.phase == MsfPhase::Inactive) {
          if (msf.started()) maneuver_done = true;
          const KinematicInput a = lane_keep(view, msf_cfg.return_frequency, p.mu * p.g);
          ref = fbl_extract(a, view, p);
          ref.v_x_ref = maneuver_done ? scenario.v_des : scenario.v0;
          lambda = 1.0;
          delta_mpc = 0.0;
          cost = {};
          status = "idle";
        } else {
          const KinematicInput a_msf{m.a_X, m.a_Y};
          KinematicInput a = a_msf;
          lambda = 1.0;
          status = to_string(m.phase);
          delta_mpc = 0.0;
          const bool mpc_phase = m.phase == MsfPhase::Dodge || m.phase == MsfPhase::Hold;
          const KinematicState s0 = kinematic_view(view);
          if (mpc_phase && !options.force_msf_only && s0.v_X < kLowSpeedGuard) {
            // Heading too far off the road axis for the planner's model.
            ++trace.plan_failures;
            previous.reset();
            cost = {};
            status += "/mpc_timeout";
          } else if (mpc_phase && !options.force_msf_only) {
            const KinematicInput u_msf = normalized(a_msf, problem);
            HorizonInputs guess(static_cast<std::size_t>(problem.horizon), u_msf);
            if (previous) {
              guess = shift_inputs(*previous);
              guess.back() = u_msf;
            }
            const PlannerSolution sol = plan(s0, problem, guess, budget);
            ++trace.plan_calls;
            BlendDecision d = blend_weight(sol, blend_cfg);
            const bool unsafe = options.zone_guard && d.reason != BlendReason::MpcTimeout &&
                                predicts_zone_entry(sol, scenario.obstacle, scenario.zone_depth,
                                                    options.guard_margin);
            if (unsafe) d.lambda = 1.0;
            if (d.reason == BlendReason::MpcTimeout) {
              ++trace.plan_failures;
              previous.reset();
            } else {
              previous = sol.inputs;
            }
            lambda = d.lambda;
            cost = horizon_sums(sol);
            const KinematicInput a_mpc = sol.first_acceleration(problem);
            delta_mpc = fbl_extract(a_mpc, view, p).delta_ref;
            a = blend_refs(a_mpc, a_msf, lambda);
            status += '/';
            status += unsafe ? "zone_guard" : to_string(d.reason);
          } else {
            previous.reset();
            cost = {};
          }
          ref = fbl_extract(a, view, p);
        }
      }

      const double v_target = shaper.step(ref.v_x_ref, dt);
      const double T_wheel = pi_speed_step(speed, v_target, state.v_x, dt);
      const WheelTorques T = torque_distribution(2.0 * T_wheel, p);
      state.delta = eps_step(ref.delta_ref, state.delta, dt, p);

      TraceRow row;
      row.t = t;
      row.state = state;
      row.delta_mpc = delta_mpc;
      row.delta_ref = ref.delta_ref;
      row.vx_ref = ref.v_x_ref;
      row.T_rl = T.rear_left;
      row.T_rr = T.rear_right;
      row.lambda = lambda;
      row.cost = cost;
      row.status = status;
      trace.rows.push_back(std::move(row));

      if (k < n_steps)
        state = dynamic_step(state, state.delta, 0.0, (T.rear_left + T.rear_right) / p.r, p, dt);
    }
  } catch (const LowSpeedDomain& e) {
    trace.aborted = true;
    trace.abort_reason = e.what();
  }
  return trace;
}

ClearanceReport min_clearance(const EpisodeTrace& trace, const Obstacle& obs, double zone_depth,
                              double front_margin) {
  if (trace.rows.empty()) throw Error("clearance needs a non-empty trace");
  ClearanceReport r;
  r.min_lateral_clearance = std::numeric_limits<double>::infinity();
  const double dir = trace.scenario.dodge_direction >= 0 ? 1.0 : -1.0;
  const double zone_end = obs.x_obs + zone_depth;
  for (const auto& row : trace.rows) {
    const DynamicState& s = row.state;
    if (s.x >= obs.x_obs - front_margin && s.x <= zone_end)
      r.min_lateral_clearance = std::min(r.min_lateral_clearance, std::abs(s.y) - obs.w);
    if (s.x > zone_end) {
      r.reached = true;
      r.return_overshoot = std::max(r.return_overshoot, -dir * s.y);
    }
    r.max_speed = std::max(r.max_speed, std::hypot(s.v_x, s.v_y));
    r.peak_steer = std::max(r.peak_steer, std::abs(s.delta));
  }
  r.collided = r.min_lateral_clearance < 0.0;
  const DynamicState& last = trace.rows.back().state;
  const Vec2 v = rotate_local_to_global(last.v_x, last.v_y, last.theta);
  r.return_settled = r.reached && std::abs(last.y) < 0.25 && std::abs(v.y) < 0.25;
  return r;
}

ClearanceReport min_clearance(const EpisodeTrace& trace) {
  return min_clearance(trace, trace.scenario.obstacle, trace.scenario.zone_depth);
}

std::string trace_csv_header() {
  return "t,x,y,theta,vx,vy,gamma,delta,delta_mpc,delta_ref,vx_ref,T_rl,T_rr,lambda,J_safe,"
         "J_stable,J_brake,J_steer,status\n";
}

std::string trace_to_csv(const EpisodeTrace& trace) {
  std::string out = trace_csv_header();
  out.reserve(out.size() + trace.rows.size() * 200);
  for (const auto& r : trace.rows) {
    const double fields[] = {r.t,         r.state.x,      r.state.y,       r.state.theta,
                             r.state.v_x, r.state.v_y,    r.state.gamma,   r.state.delta,
                             r.delta_mpc, r.delta_ref,    r.vx_ref,        r.T_rl,
                             r.T_rr,      r.lambda,       r.cost.safe,     r.cost.stable,
                             r.cost.brake, r.cost.steer};
    for (double f : fields) {
      append_number(out, f);
      out += ',';
    }
    out += r.status;
    out += '\n';
  }
  return out;
}

void write_trace(const EpisodeTrace& trace, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
  const std::string csv = trace_to_csv(trace);
  f.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  f.flush();
  if (!f) throw Error("cannot write " + path.string() + ": " + std::strerror(errno));
}

}  // namespace evasion
