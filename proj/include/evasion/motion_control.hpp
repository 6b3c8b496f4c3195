#pragma once

#include "evasion/types.hpp"

namespace evasion {

/// J_wr + r^2 (m/2) (1 - lambda_n): one rear wheel carrying half the car.
double equivalent_inertia(const VehicleParams& params);

/// PI speed loop acting on the speed error in m/s. Output is one wheel's torque.
struct SpeedControllerState {
  double K_p = 0.0;
  double K_i = 0.0;
  double T_max = 0.0;
  /// Integrated speed error (m).
  double integrator = 0.0;
};

/// Gains placing a double closed-loop pole at -pole rad/s on the nominal wheel plant
/// v' = r T / J_eq.
SpeedControllerState make_speed_controller(const VehicleParams& params, double pole = 1.0);

/// Returns the saturated wheel torque. Integration pauses while the output is saturated
/// in the direction of the error, and the integrator is kept within T_max / K_i.
double pi_speed_step(SpeedControllerState& ctl, double v_ref, double v_meas, double dt);

/// First-order prefilter on the speed reference. With time constant K_p / K_i it cancels the
/// controller zero, leaving the pure double-pole response.
class ReferenceShaper {
 public:
  ReferenceShaper(double time_constant, double initial);
  double step(double target, double dt);
  double value() const { return value_; }
  void reset(double value) { value_ = value; }

 private:
  double tau_;
  double value_;
};

struct WheelTorques {
  double rear_left = 0.0;
  double rear_right = 0.0;
};

/// Equal split of the total drive torque, each wheel within +-T_max.
WheelTorques torque_distribution(double T_total, const VehicleParams& params);

/// Rate-limited proportional steering servo.
double eps_step(double delta_ref, double delta, double dt, const VehicleParams& params);

}  // namespace evasion
