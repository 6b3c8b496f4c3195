#include "evasion/mpc_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "evasion/errors.hpp"
#include "evasion/vehicle_model.hpp"

namespace evasion {
namespace {

constexpr double kExponentClamp = 30.0;
constexpr double kMinPlannerSpeed = 1e-3;

std::vector<double> flatten(const HorizonInputs& inputs, std::size_t n_vars) {
  std::vector<double> x(n_vars);
  for (std::size_t i = 0; i < n_vars / 2; ++i) {
    x[2 * i] = std::clamp(inputs[i].a_X, -1.0, 1.0);
    x[2 * i + 1] = std::clamp(inputs[i].a_Y, -1.0, 1.0);
  }
  return x;
}

HorizonInputs expand(std::span<const double> x, int horizon) {
  HorizonInputs out(static_cast<std::size_t>(horizon));
  const bool tied = x.size() == 2;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t k = tied ? 0 : i;
    out[i] = {x[2 * k], x[2 * k + 1]};
  }
  return out;
}

}  // namespace

double safety_barrier(double x_ego, double v_X, const Obstacle& obstacle, double mu, double g) {
  const double eps = 1.0 / std::sqrt(8.8 * mu * g);
  const double speed = std::max(std::abs(v_X), kMinPlannerSpeed);
  const double z = (obstacle.x_obs - x_ego - 4.0 * v_X) / (eps * speed * std::sqrt(obstacle.w));
  return obstacle.w / (1.0 + std::exp(std::clamp(z, -kExponentClamp, kExponentClamp)));
}

PlannerProblem make_planner_problem(const Scenario& scenario, const VehicleParams& params) {
  PlannerProblem p;
  p.obstacle = scenario.obstacle;
  p.v_des = scenario.v_des;
  p.weights = scenario.weights;
  p.barrier = scenario.barrier;
  p.mu = params.mu;
  p.g = params.g;
  p.t_s = params.t_s;
  p.accel_scale_x = scenario.accel_fraction * params.mu * params.g;
  p.accel_scale_y = p.accel_scale_x;
  p.horizon = scenario.N_p;
  p.dodge_direction = scenario.dodge_direction;
  return p;
}

StageCost stage_cost(const KinematicState& s, const KinematicInput& accel,
                     const PlannerProblem& problem) {
  StageCost c;
  const double y_safe = safety_barrier(s.x, s.v_X, problem.obstacle, problem.mu, problem.g);
  const double y = problem.dodge_direction * s.y;
  const double arg = problem.barrier == BarrierMode::Literal ? y_safe - y
                                                             : y - y_safe + problem.obstacle.w;
  if (arg > 0.0) {
    c.safe = -std::log(arg);
  } else {
    c.safe = kBarrierPenalty + arg * arg;
    c.barrier_violated = true;
  }
  const double v_X = std::copysign(std::max(std::abs(s.v_X), kMinPlannerSpeed), s.v_X);
  c.stable = std::abs(s.v_Y / v_X);
  c.brake = std::abs(s.v_X - problem.v_des);
  c.steer = std::abs(accel.a_Y);
  return c;
}

KinematicInput denormalize(const KinematicInput& u, const PlannerProblem& problem) {
  return {u.a_X * problem.accel_scale_x, u.a_Y * problem.accel_scale_y};
}

std::vector<KinematicState> rollout(const KinematicState& s0, std::span<const KinematicInput> inputs,
                                    const PlannerProblem& problem) {
  std::vector<KinematicState> out;
  out.reserve(inputs.size());
  KinematicState s = s0;
  for (const auto& u : inputs) {
    s = kinematic_step(s, denormalize(u, problem), problem.t_s);
    out.push_back(s);
  }
  return out;
}

double total_cost(const KinematicState& s0, std::span<const KinematicInput> inputs,
                  const PlannerProblem& problem) {
  const auto& eta = problem.weights.eta;
  double J = 0.0;
  KinematicState s = s0;
  for (const auto& u : inputs) {
    const KinematicInput a = denormalize(u, problem);
    s = kinematic_step(s, a, problem.t_s);
    const StageCost c = stage_cost(s, a, problem);
    J += eta[0] * c.safe + eta[1] * c.stable + eta[2] * c.brake + eta[3] * c.steer;
  }
  return J;
}

HorizonInputs cost_gradient(const KinematicState& s0, std::span<const KinematicInput> inputs,
                            const PlannerProblem& problem) {
  const int horizon = static_cast<int>(inputs.size());
  std::vector<double> x = flatten(HorizonInputs(inputs.begin(), inputs.end()), 2 * inputs.size());
  // Unclamped copy: the gradient is taken at the given point even if it sits on a bound.
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    x[2 * i] = inputs[i].a_X;
    x[2 * i + 1] = inputs[i].a_Y;
  }
  std::vector<double> grad(x.size());
  central_difference_gradient(
      [&](std::span<const double> v) { return total_cost(s0, expand(v, horizon), problem); }, x,
      grad);
  HorizonInputs out(inputs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {grad[2 * i], grad[2 * i + 1]};
  return out;
}

KinematicInput PlannerSolution::first_acceleration(const PlannerProblem& problem) const {
  if (inputs.empty()) return {};
  return denormalize(inputs.front(), problem);
}

PlannerSolution evaluate_inputs(const KinematicState& s0, const PlannerProblem& problem,
                                HorizonInputs inputs, SolveStatus status) {
  PlannerSolution sol;
  sol.inputs = std::move(inputs);
  sol.predicted_states = rollout(s0, sol.inputs, problem);
  sol.stage_costs.reserve(sol.inputs.size());
  for (std::size_t i = 0; i < sol.inputs.size(); ++i)
    sol.stage_costs.push_back(
        stage_cost(sol.predicted_states[i], denormalize(sol.inputs[i], problem), problem));
  sol.cost = total_cost(s0, sol.inputs, problem);
  sol.status = status;
  return sol;
}

PlannerSolution plan(const KinematicState& s0, const PlannerProblem& problem,
                     const std::optional<HorizonInputs>& initial_guess, const Budget& budget,
                     const PlanOptions& options) {
  if (problem.horizon < 1) throw Error("prediction horizon must be at least one step");
  if (s0.v_X < kLowSpeedGuard) throw LowSpeedDomain("planner called below 0.5 m/s");
  const auto start = std::chrono::steady_clock::now();

  const std::size_t n_vars = options.tied_inputs ? 2 : 2 * static_cast<std::size_t>(problem.horizon);
  HorizonInputs guess(static_cast<std::size_t>(problem.horizon));
  if (initial_guess) {
    for (std::size_t i = 0; i < guess.size() && i < initial_guess->size(); ++i)
      guess[i] = (*initial_guess)[i];
  }
  const std::vector<double> x0 = flatten(guess, n_vars);
  const std::vector<double> lower(n_vars, -1.0);
  const std::vector<double> upper(n_vars, 1.0);

  const SolveResult r = minimize_box(
      [&](std::span<const double> x) { return total_cost(s0, expand(x, problem.horizon), problem); },
      {}, x0, lower, upper, budget);

  PlannerSolution sol = evaluate_inputs(s0, problem, expand(r.x_star, problem.horizon), r.status);
  sol.cost = r.f_star;
  sol.iterations = r.iterations;
  sol.evaluations = r.evaluations;
  sol.solve_walltime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

HorizonInputs shift_inputs(const HorizonInputs& inputs) {
  if (inputs.empty()) return {};
  HorizonInputs out(inputs.begin() + 1, inputs.end());
  out.push_back({});
  return out;
}

}  // namespace evasion
