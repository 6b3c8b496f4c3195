#include "evasion/motion_control.hpp"

#include <algorithm>
#include <cmath>

#include "evasion/errors.hpp"

namespace evasion {

double equivalent_inertia(const VehicleParams& p) {
  return p.J_wr + p.r * p.r * (p.m / 2.0) * (1.0 - p.lambda_n);
}

SpeedControllerState make_speed_controller(const VehicleParams& p, double pole) {
  if (!(pole > 0.0)) throw Error("speed loop pole must be positive");
  const double J = equivalent_inertia(p);
  SpeedControllerState ctl;
  ctl.K_p = 2.0 * pole * J / p.r;
  ctl.K_i = pole * pole * J / p.r;
  ctl.T_max = p.T_max;
  return ctl;
}

double pi_speed_step(SpeedControllerState& ctl, double v_ref, double v_meas, double dt) {
  if (!(dt > 0.0)) throw Error("controller step must be positive");
  const double e = v_ref - v_meas;
  const double I_max = ctl.T_max / ctl.K_i;
  const double I_next = std::clamp(ctl.integrator + e * dt, -I_max, I_max);
  const double u = ctl.K_p * e + ctl.K_i * I_next;
  const bool winding = std::abs(u) > ctl.T_max && (u > 0) == (e > 0);
  if (!winding) ctl.integrator = I_next;
  return std::clamp(ctl.K_p * e + ctl.K_i * ctl.integrator, -ctl.T_max, ctl.T_max);
}

ReferenceShaper::ReferenceShaper(double time_constant, double initial)
    : tau_(time_constant), value_(initial) {
  if (!(time_constant > 0.0)) throw Error("prefilter time constant must be positive");
}

double ReferenceShaper::step(double target, double dt) {
  value_ += (target - value_) * (1.0 - std::exp(-dt / tau_));
  return value_;
}

WheelTorques torque_distribution(double T_total, const VehicleParams& p) {
  const double half = std::clamp(T_total, -2.0 * p.T_max, 2.0 * p.T_max) / 2.0;
  return {half, half};
}

double eps_step(double delta_ref, double delta, double dt, const VehicleParams& p) {
  if (!(dt > 0.0)) throw Error("steering step must be positive");
  const double rate = std::clamp(p.K_eps * (delta_ref - delta), -p.delta_rate_max, p.delta_rate_max);
  return std::clamp(delta + rate * dt, -p.delta_max, p.delta_max);
}

}  // namespace evasion
