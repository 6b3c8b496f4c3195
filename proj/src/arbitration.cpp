#include "evasion/arbitration.hpp"

#include <algorithm>
#include <cmath>

#include "evasion/errors.hpp"
#include "evasion/vehicle_model.hpp"

namespace evasion {

const char* to_string(BlendReason reason) {
  switch (reason) {
    case BlendReason::MpcOk: return "mpc_ok";
    case BlendReason::MpcNearLimit: return "mpc_near_limit";
    case BlendReason::MpcTimeout: return "mpc_timeout";
    case BlendReason::MpcDegraded: return "mpc_degraded";
  }
  return "?";
}

BlendDecision blend_weight(const PlannerSolution& mpc, const BlendConfig& config) {
  if (mpc.status == SolveStatus::NoImprovement || mpc.inputs.empty())
    return {1.0, BlendReason::MpcTimeout};
  const double u_Y = std::abs(mpc.inputs.front().a_Y);
  const double lambda = std::clamp((u_Y - config.threshold) / config.width, 0.0, 1.0);
  if (lambda > 0.0) return {lambda, BlendReason::MpcNearLimit};
  if (mpc.status == SolveStatus::BudgetExhausted) return {0.0, BlendReason::MpcDegraded};
  return {0.0, BlendReason::MpcOk};
}

KinematicInput blend_refs(const KinematicInput& mpc, const KinematicInput& msf, double lambda) {
  if (lambda == 0.0) return mpc;
  if (lambda == 1.0) return msf;
  return {(1.0 - lambda) * mpc.a_X + lambda * msf.a_X, (1.0 - lambda) * mpc.a_Y + lambda * msf.a_Y};
}

ControlReference fbl_extract(const KinematicInput& a_ref, const DynamicState& s,
                             const VehicleParams& p) {
  const SlipAngles alpha = slip_angles(s, p);
  const Vec2 a = rotate_global_to_local(a_ref.a_X, a_ref.a_Y, s.theta);
  // a.y is the lateral acceleration in the body frame, dv_y/dt + gamma v_x.
  const double F_yf_req = p.m * a.y - lateral_tire_force(alpha.rear, rear_tire(p));
  const TireInverse inv = inverse_lateral_tire_force(F_yf_req, front_tire(p));

  ControlReference ref;
  const double delta = inv.alpha + s.sideslip() + p.l_f * s.gamma / s.v_x;
  ref.delta_ref = std::clamp(delta, -p.delta_max, p.delta_max);
  ref.saturated = inv.saturated || std::abs(delta) > p.delta_max;
  ref.v_x_ref = std::max(0.0, s.v_x + (a.x + s.gamma * s.v_y) * p.t_s);
  return ref;
}

}  // namespace evasion
