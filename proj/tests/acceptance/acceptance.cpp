// One PASS/FAIL line per acceptance criterion. An optional argument selects a single criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evasion/arbitration.hpp"
#include "evasion/config.hpp"
#include "evasion/errors.hpp"
#include "evasion/motion_control.hpp"
#include "evasion/mpc_planner.hpp"
#include "evasion/msf_planner.hpp"
#include "evasion/nlp_solver.hpp"
#include "evasion/simulation.hpp"
#include "evasion/vehicle_model.hpp"
#include "oracles.hpp"

using namespace evasion;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream note;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      note << " [" << what << "]";
      ok = false;
    }
  }
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, static_cast<double>(args)...);
  return buf;
}

const std::shared_ptr<const YMaxTable>& table() {
  static const auto t = std::make_shared<const YMaxTable>(build_default_ymax_table(VehicleParams{}));
  return t;
}

// Tied two-step plan from rest-free cruising at 5 m/s toward a unit obstacle 1 m ahead.
KinematicInput example2(const CostWeights& w) {
  PlannerProblem p;
  p.obstacle = {1.0, 1.0};
  p.horizon = 2;
  p.weights = w;
  const PlannerSolution sol = plan({0, 0, 5, 0}, p, std::nullopt, Budget{}, PlanOptions{true});
  return sol.inputs.front();
}

void criterion1(Check& c) {
  const KinematicInput u = example2(CostWeights{});
  const KinematicInput v = example2(CostWeights{{0.5, 0.25, 0.05, 0.2}});
  c.note << fmt("uniform (%.3f, %.3f), shifted (%.3f, %.3f)", u.a_X, u.a_Y, v.a_X, v.a_Y);
  c.expect(std::abs(u.a_X - 0.0) <= 0.15 && std::abs(u.a_Y - 0.53) <= 0.15,
           "uniform weights off (0.00, 0.53)");
  c.expect(std::abs(v.a_X + 0.35) <= 0.15 && std::abs(v.a_Y - 1.0) <= 0.15,
           "shifted weights off (-0.35, 1.00)");
  c.expect(v.a_Y >= 1.0 - 1e-9, "steering not at its bound");
  c.expect(v.a_Y > u.a_Y, "steering did not increase");
  c.expect(v.a_X < 0.0, "no braking introduced");
}

std::vector<std::string> suite_files() {
  const std::string dir = EVASION_SCENARIO_DIR;
  return {dir + "/relaxed_v5_tau5.ini", dir + "/relaxed_v5_tau4.ini", dir + "/relaxed_v5_tau3.ini",
          dir + "/tight_v6_tau3_a.ini", dir + "/tight_v6_tau3_b.ini", dir + "/tight_v4p5_tau3.ini"};
}

void criterion2(Check& c) {
  std::vector<std::future<std::string>> jobs;
  for (const auto& file : suite_files()) {
    jobs.push_back(std::async(std::launch::async, [file] {
      const ScenarioConfig cfg = load_scenario(file);
      EpisodeOptions o;
      o.table = table();
      o.barrier = BarrierMode::Repaired;
      const EpisodeTrace t = run_episode(cfg.scenario, cfg.vehicle, o);
      const ClearanceReport r = min_clearance(t);
      std::string err;
      if (t.aborted) err += " aborted(" + t.abort_reason + ")";
      if (!r.reached) err += " never reached the zone";
      if (!(r.min_lateral_clearance > 0.0)) err += fmt(" clearance %.3f", r.min_lateral_clearance);
      if (r.peak_steer > cfg.vehicle.delta_max + 1e-12) err += fmt(" peak steer %.4f", r.peak_steer);
      for (const auto& row : t.rows) {
        if (row.status != "idle") continue;
        if (std::abs(row.state.v_x - cfg.scenario.v_des) > 1.5 &&
            std::abs(row.state.v_x - cfg.scenario.v0) > 1e-9) {
          err += fmt(" speed %.2f at t=%.2f", row.state.v_x, row.t);
          break;
        }
      }
      const std::string name = std::filesystem::path(file).stem().string();
      return name + fmt("[nu %.2f w %.2f clr %.2f]", cfg.scenario.nu, t.scenario.obstacle.w,
                        r.min_lateral_clearance) + (err.empty() ? "" : " FAIL:" + err);
    }));
  }
  for (auto& j : jobs) {
    const std::string s = j.get();
    c.note << s << " ";
    if (s.find("FAIL:") != std::string::npos) c.ok = false;
  }
}

void criterion3(Check& c) {
  const ScenarioConfig cfg = load_scenario(std::string(EVASION_SCENARIO_DIR) + "/extreme_v7_tau1p4.ini");
  EpisodeOptions o;
  o.table = table();
  o.force_plan_failure = true;
  const EpisodeTrace t = run_episode(cfg.scenario, cfg.vehicle, o);
  const ClearanceReport r = min_clearance(t);
  c.note << fmt("tau %.2f nu %.2f w %.2f clearance %.3f", t.detection.tau, t.detection.nu,
                t.scenario.obstacle.w, r.min_lateral_clearance);
  c.expect(!t.aborted, "aborted: " + t.abort_reason);
  c.expect(t.plan_failures >= t.plan_calls && t.plan_calls > 0, "plans did not all fail");
  c.expect(r.reached, "never reached the zone");
  c.expect(r.min_lateral_clearance > 0.0 && !r.collided, "collision");
  c.expect(std::abs(t.detection.tau - 1.4) < 0.02, "tau not 1.4");
  c.expect(std::abs(t.detection.nu - 0.95) < 0.02, "nu not about 0.95");
}

void oracle_gradient(Check& c) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PlannerProblem p;
  p.obstacle = {25.0, 2.5};
  p.horizon = 5;
  int checked = 0, attempts = 0;
  double worst = 0.0;
  while (checked < 100 && attempts < 10000) {
    ++attempts;
    const KinematicState s0{10.0 + 5.0 * u(rng), 2.0 + 0.5 * u(rng), 5.0 + u(rng), 0.3 * u(rng)};
    HorizonInputs in(5);
    for (auto& x : in) x = {0.9 * u(rng), 0.9 * u(rng)};
    const auto fd = cost_gradient(s0, in, p);
    std::vector<std::pair<double, double>> pairs;
    bool kink = false;
    for (std::size_t i = 0; i < in.size() && !kink; ++i) {
      for (int k = 0; k < 2; ++k) {
        auto diff = [&](double h) {
          HorizonInputs a = in, b = in;
          (k == 0 ? a[i].a_X : a[i].a_Y) += h;
          (k == 0 ? b[i].a_X : b[i].a_Y) -= h;
          return (total_cost(s0, a, p) - total_cost(s0, b, p)) / (2 * h);
        };
        const double d1 = diff(1e-3), d2 = diff(5e-4);
        const double rich = (4 * d2 - d1) / 3;
        if (std::abs(d1 - d2) > 1e-2 * std::max(1.0, std::abs(rich))) {
          kink = true;
          break;
        }
        pairs.emplace_back(k == 0 ? fd[i].a_X : fd[i].a_Y, rich);
      }
    }
    if (kink) continue;
    ++checked;
    for (auto [got, ref] : pairs) worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
  }
  c.note << fmt("(a) %.0f points worst rel %.2e ", checked, worst);
  c.expect(checked == 100, "(a) too few smooth points");
  c.expect(worst <= 1e-4, "(a) gradient mismatch");
}

void oracle_grid(Check& c) {
  double worst = 0.0;
  for (const CostWeights& w : {CostWeights{}, CostWeights{{0.5, 0.25, 0.05, 0.2}}, CostWeights{{0.1, 0.2, 0.3, 0.4}}}) {
    PlannerProblem p;
    p.obstacle = {1.0, 1.0};
    p.horizon = 2;
    p.weights = w;
    oracle::PlannerSetup o;
    o.eta = w.eta;
    const auto grid = oracle::grid_minimum(
        [&](double a, double b) { return oracle::planner_cost(o, {{a, b}, {a, b}}); }, 401);
    const PlannerSolution sol = plan({0, 0, 5, 0}, p, std::nullopt, Budget{}, PlanOptions{true});
    worst = std::max(worst, (sol.cost - grid.f) / std::abs(grid.f));
  }
  c.note << fmt("(b) worst excess %.2e ", worst);
  c.expect(worst <= 0.01, "(b) plan cost above grid optimum by more than 1%");
}

void oracle_dynamics(Check& c) {
  const VehicleParams p;
  const oracle::Car car;
  DynamicState s;
  s.x = 1.0, s.y = 0.5, s.theta = 0.1, s.v_x = 6.0, s.v_y = 0.2, s.gamma = 0.15;
  const double delta = 0.06, Fx = 400.0, T = 1.0;
  const oracle::State6 ref =
      oracle::euler_richardson(car, {s.x, s.y, s.theta, s.v_x, s.v_y, s.gamma}, delta, Fx, T, 200000);
  auto err = [&](int n) {
    DynamicState x = s;
    for (int i = 0; i < n; ++i) x = dynamic_step(x, delta, 0.0, Fx, p, T / n);
    const double e[] = {x.x - ref[0], x.y - ref[1], x.theta - ref[2], x.v_x - ref[3], x.v_y - ref[4], x.gamma - ref[5]};
    double m = 0.0;
    for (double v : e) m = std::max(m, std::abs(v));
    return m;
  };
  const double e100 = err(100);
  const double order = std::log2(err(10) / err(20));
  c.note << fmt("(c) err %.1e order %.2f ", e100, order);
  c.expect(e100 <= 1e-5, "(c) RK4 error above 1e-5");
  c.expect(std::abs(order - 4.0) <= 0.6, "(c) convergence order not 4");
}

void oracle_fbl(Check& c) {
  const VehicleParams p;
  const oracle::Car car;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int n = 0;
  for (int i = 0; i < 5000; ++i) {
    const double delta = -0.3 + 0.6 * u(rng);
    const oracle::State6 s{0, 0, -1.0 + 2.0 * u(rng), 1.0 + 9.0 * u(rng), -0.2 + 0.4 * u(rng), -0.3 + 0.6 * u(rng)};
    const double beta = std::atan(s[4] / s[3]);
    if (std::abs(delta - beta - car.lf * s[5] / s[3]) >= 0.28) continue;
    const oracle::State6 d = oracle::single_track_rhs(car, s, delta, 0.0);
    const double ax = d[3] - s[5] * s[4], ay = d[4] + s[5] * s[3];
    DynamicState ds;
    ds.theta = s[2], ds.v_x = s[3], ds.v_y = s[4], ds.gamma = s[5];
    const ControlReference r = fbl_extract(
        {ax * std::cos(s[2]) - ay * std::sin(s[2]), ax * std::sin(s[2]) + ay * std::cos(s[2])}, ds, p);
    worst = std::max(worst, std::abs(r.delta_ref - delta));
    ++n;
  }
  c.note << fmt("(d) %.0f states worst %.1e ", n, worst);
  c.expect(n > 1000 && worst <= 1e-6, "(d) FBL round trip");
}

void oracle_tire(Check& c) {
  const VehicleParams p;
  double worst = 0.0;
  for (const TireCurve& t : {front_tire(p), rear_tire(p)}) {
    for (int i = -10000; i <= 10000; ++i) {
      const double alpha = t.peak_slip() * i / 10001.0;
      worst = std::max(worst, std::abs(inverse_lateral_tire_force(lateral_tire_force(alpha, t), t).alpha - alpha));
    }
  }
  c.note << fmt("(e) worst %.1e", worst);
  c.expect(worst <= 1e-9, "(e) tire inverse round trip");
}

void criterion4(Check& c) {
  oracle_gradient(c);
  oracle_grid(c);
  oracle_dynamics(c);
  oracle_fbl(c);
  oracle_tire(c);
}

void criterion5(Check& c) {
  const VehicleParams p;
  SpeedControllerState ctl = make_speed_controller(p);
  ReferenceShaper shaper(ctl.K_p / ctl.K_i, 0.0);
  const double J = equivalent_inertia(p), dt = 1e-3, step = 0.2;
  double v = 0.0, worst = 0.0;
  for (int k = 1; k <= 4000; ++k) {
    v += p.r * pi_speed_step(ctl, shaper.step(step, dt), v, dt) / J * dt;
    if (k == 500 || k == 1000 || k == 2000 || k == 4000) {
      const double t = k * dt;
      const double expect = 1.0 - (1.0 + t) * std::exp(-t);
      worst = std::max(worst, std::abs(v / step - expect) / expect);
    }
  }
  c.note << fmt("worst relative error %.2e", worst);
  c.expect(worst <= 0.01, "step response off the double-pole curve");
}

void criterion6(Check& c) {
  const YMaxTable& t = *table();
  for (double v : {1.0, 3.0, 5.0, 7.0}) c.expect(t.lookup(0.0, v) == 0.0, fmt("y_max(0, %.0f) nonzero", v));
  int n = 0;
  for (int i = 20; i <= 120; ++i) {
    const double tt = 0.05 * i;
    const bool ordered = t.lookup(tt, 7) > t.lookup(tt, 5) && t.lookup(tt, 5) > t.lookup(tt, 3) &&
                         t.lookup(tt, 3) > t.lookup(tt, 1);
    c.expect(ordered, fmt("ordering broken at t=%.2f", tt));
    ++n;
  }
  c.note << fmt("%.0f times; y_max(6 s) = %.2f/%.2f/%.2f/%.2f m at 7/5/3/1 m/s", n, t.lookup(6, 7),
                t.lookup(6, 5), t.lookup(6, 3), t.lookup(6, 1));
}

void invariants_solver(Check& c) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int runs = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 6);
    std::vector<double> center(n), x0(n), lo(n, -1.0), hi(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) center[k] = 1.5 * u(rng), x0[k] = u(rng);
    const Objective f = [&](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += (k + 1.0) * (x[k] - center[k]) * (x[k] - center[k]) + std::abs(x[k]) * 0.1;
      return s;
    };
    Budget b;
    b.max_iterations = 1 + i % 10;
    b.max_function_evaluations = 5 + 7 * (i % 15);
    int calls = 0;
    const Objective counted = [&](std::span<const double> x) { ++calls; return f(x); };
    const SolveResult r = minimize_box(counted, {}, x0, lo, hi, b);
    c.expect(r.f_star <= f(x0), "solver worsened its start");
    c.expect(r.iterations <= b.max_iterations, "iteration budget exceeded");
    c.expect(r.evaluations <= b.max_function_evaluations && r.evaluations == calls, "evaluation budget dishonest");
    c.expect(f(r.x_star) == r.f_star, "reported f_star differs from f(x_star)");
    for (std::size_t k = 0; k < n; ++k) c.expect(r.x_star[k] >= -1.0 && r.x_star[k] <= 1.0, "left the box");
    ++runs;
  }
  c.note << fmt("solver %.0f runs; ", runs);
}

void invariants_barrier(Check& c) {
  const VehicleParams p;
  for (double w : {0.5, 2.0, 4.0})
    for (double v : {0.5, 3.0, 7.0}) {
      double prev = -1.0;
      for (double x = -200.0; x <= 200.0; x += 0.25) {
        const double b = safety_barrier(x, v, {25.0, w}, p.mu, p.g);
        c.expect(b > 0.0 && b < w, "barrier outside (0, w)");
        c.expect(b >= prev, "barrier not monotone in x");
        prev = b;
      }
    }
  c.note << "barrier ok; ";
}

void invariants_blend(Check& c) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 5000; ++i) {
    const KinematicInput a{u(rng), u(rng)}, b{u(rng), u(rng)};
    const double lam = (u(rng) + 3.0) / 6.0;
    const KinematicInput m = blend_refs(a, b, lam);
    c.expect(m.a_X >= std::min(a.a_X, b.a_X) - 1e-12 && m.a_X <= std::max(a.a_X, b.a_X) + 1e-12 &&
                 m.a_Y >= std::min(a.a_Y, b.a_Y) - 1e-12 && m.a_Y <= std::max(a.a_Y, b.a_Y) + 1e-12,
             "blend not convex");
    PlannerSolution sol;
    sol.status = SolveStatus::BudgetExhausted;
    sol.inputs = {{u(rng) / 3, u(rng) / 3}};
    const BlendDecision d = blend_weight(sol);
    c.expect(d.lambda >= 0.0 && d.lambda <= 1.0, "lambda outside [0, 1]");
  }
  c.note << "blend ok; ";
}

void invariants_actuators(Check& c) {
  const VehicleParams p;
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SpeedControllerState ctl = make_speed_controller(p);
  double delta = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double T = pi_speed_step(ctl, 10.0 * u(rng), 10.0 * u(rng), 0.01);
    c.expect(std::abs(T) <= p.T_max, "torque above T_max");
    const WheelTorques w = torque_distribution(2.0 * T, p);
    c.expect(std::abs(w.rear_left) <= p.T_max && std::abs(w.rear_right) <= p.T_max, "wheel torque above T_max");
    const double next = eps_step(u(rng), delta, 0.01, p);
    c.expect(std::abs(next) <= p.delta_max + 1e-12, "steering above its limit");
    c.expect(std::abs(next - delta) <= p.delta_rate_max * 0.01 + 1e-12, "steering rate above its limit");
    delta = next;
    DynamicState s;
    s.v_x = 1.0 + 8.0 * (u(rng) + 1.0), s.v_y = 0.3 * u(rng), s.gamma = 0.5 * u(rng), s.theta = u(rng);
    const ControlReference r = fbl_extract({5.0 * u(rng), 10.0 * u(rng)}, s, p);
    c.expect(std::abs(r.delta_ref) <= p.delta_max, "steering reference above its limit");
    c.expect(r.v_x_ref >= 0.0, "negative speed reference");
  }
  c.note << "actuators ok; ";
}

void invariants_determinism(Check& c) {
  const ScenarioConfig cfg = load_scenario(suite_files().front());
  EpisodeOptions o;
  o.table = table();
  const std::string a = trace_to_csv(run_episode(cfg.scenario, cfg.vehicle, o));
  const std::string b = trace_to_csv(run_episode(cfg.scenario, cfg.vehicle, o));
  o.table.reset();
  const std::string d = trace_to_csv(run_episode(cfg.scenario, cfg.vehicle, o));
  c.expect(a == b && a == d, "trace re-run differs");
  c.note << fmt("determinism ok (%.0f bytes)", static_cast<double>(a.size()));
}

void criterion7(Check& c) {
  invariants_solver(c);
  invariants_barrier(c);
  invariants_blend(c);
  invariants_actuators(c);
  invariants_determinism(c);
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;
  std::function<void(Check&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "two-step planner anchor", 1.0, criterion1},
      {2, "scenario suite collision-free", 30.0, criterion2},
      {3, "extreme case on the fallback alone", 5.0, criterion3},
      {4, "numerical oracles", 0.0, criterion4},
      {5, "speed loop double-pole response", 0.0, criterion5},
      {6, "y_max ordering by speed", 0.0, criterion6},
      {7, "invariant suite", 0.0, criterion7},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  if (argc > 1 && (only < 1 || only > static_cast<int>(all.size()))) {
    std::fprintf(stderr, "usage: %s [criterion 1-%zu]\n", argv[0], all.size());
    return 2;
  }
  int failed = 0;
  for (const auto& cr : all) {
    if (only && cr.id != only) continue;
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.time_limit > 0.0) c.expect(secs < cr.time_limit, fmt("runtime %.2f s over %.0f s", secs, cr.time_limit));
    std::printf("criterion %d %s: %s (%.2f s) %s\n", cr.id, cr.name, c.ok ? "PASS" : "FAIL", secs, c.note.str().c_str());
    if (!c.ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
