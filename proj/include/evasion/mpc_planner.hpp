#pragma once

#include <optional>
#include <span>
#include <vector>

#include "evasion/nlp_solver.hpp"
#include "evasion/types.hpp"

namespace evasion {

/// Penalty floor substituted when a state leaves the barrier's log domain.
inline constexpr double kBarrierPenalty = 1e6;

/// Sigmoid lateral reference: rises from 0 to w with its midpoint 4 v_X ahead of the obstacle.
/// Steepness 1 / (eps sqrt(w v_X^2)) with eps = 1 / sqrt(8.8 mu g). The exponent is clamped
/// at +-30, which keeps the value strictly inside (0, w).
double safety_barrier(double x_ego, double v_X, const Obstacle& obstacle, double mu, double g);

/// Everything the horizon cost needs, detached from the scenario file.
struct PlannerProblem {
  Obstacle obstacle{};
  double v_des = 5.0;
  CostWeights weights{};
  BarrierMode barrier = BarrierMode::Repaired;
  double mu = 0.9;
  double g = 9.81;
  double t_s = 0.2;
  /// Physical acceleration represented by a normalized input of 1 (m/s^2).
  double accel_scale_x = 1.7658;
  double accel_scale_y = 1.7658;
  int horizon = 10;
  int dodge_direction = 1;
};

PlannerProblem make_planner_problem(const Scenario& scenario, const VehicleParams& params);

struct StageCost {
  double safe = 0.0;
  double stable = 0.0;
  double brake = 0.0;
  double steer = 0.0;
  /// The state fell outside the barrier's log domain and `safe` holds the penalty.
  bool barrier_violated = false;
};

/// Stage terms for a predicted state and the physical acceleration that produced it.
StageCost stage_cost(const KinematicState& s, const KinematicInput& accel,
                     const PlannerProblem& problem);

using HorizonInputs = std::vector<KinematicInput>;

/// Physical acceleration for a normalized input.
KinematicInput denormalize(const KinematicInput& u, const PlannerProblem& problem);

/// Predicted states s(k+1..k+N) for normalized inputs.
std::vector<KinematicState> rollout(const KinematicState& s0, std::span<const KinematicInput> inputs,
                                    const PlannerProblem& problem);

/// Weighted sum of stage costs over the rollout. Always finite.
double total_cost(const KinematicState& s0, std::span<const KinematicInput> inputs,
                  const PlannerProblem& problem);

/// Central-difference gradient of total_cost with respect to the normalized inputs.
HorizonInputs cost_gradient(const KinematicState& s0, std::span<const KinematicInput> inputs,
                            const PlannerProblem& problem);

struct PlannerSolution {
  HorizonInputs inputs;
  std::vector<KinematicState> predicted_states;
  double cost = 0.0;
  std::vector<StageCost> stage_costs;
  SolveStatus status = SolveStatus::NoImprovement;
  int iterations = 0;
  int evaluations = 0;
  double solve_walltime = 0.0;

  /// First-step acceleration in m/s^2.
  KinematicInput first_acceleration(const PlannerProblem& problem) const;
};

struct PlanOptions {
  /// Optimize one input repeated over the horizon (two decision variables).
  bool tied_inputs = false;
};

/// Budgeted receding-horizon solve over normalized inputs in [-1, 1].
/// Without a guess the optimizer starts from zero inputs.
PlannerSolution plan(const KinematicState& s0, const PlannerProblem& problem,
                     const std::optional<HorizonInputs>& initial_guess, const Budget& budget,
                     const PlanOptions& options = {});

/// Drops the applied first input and pads with zero.
HorizonInputs shift_inputs(const HorizonInputs& inputs);

/// Evaluates a given input sequence as a solution record (no optimization).
PlannerSolution evaluate_inputs(const KinematicState& s0, const PlannerProblem& problem,
                                HorizonInputs inputs, SolveStatus status);

}  // namespace evasion
