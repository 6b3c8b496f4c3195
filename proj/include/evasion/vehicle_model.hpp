#pragma once

#include "evasion/types.hpp"

namespace evasion {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Global velocity to body frame (inverse rotation by theta).
Vec2 rotate_global_to_local(double v_X, double v_Y, double theta);
/// Body frame to global (forward rotation by theta).
Vec2 rotate_local_to_global(double v_x, double v_y, double theta);

/// Exact double-integrator update of the planner's point-mass model.
KinematicState kinematic_step(const KinematicState& s, const KinematicInput& u, double dt);

struct SlipAngles {
  double front;
  double rear;
};

/// Throws LowSpeedDomain when v_x is below kLowSpeedGuard.
SlipAngles slip_angles(const DynamicState& state, const VehicleParams& params);

/// Lateral Pacejka curve F_y = mu F_z sin(C atan(B alpha)).
struct TireCurve {
  double C;
  double B;
  double mu;
  double F_z;

  /// Slip angle of the force peak; the curve is monotone on [-peak_slip, peak_slip].
  double peak_slip() const;
  double peak_force() const { return mu * F_z; }
};

TireCurve front_tire(const VehicleParams& params);
TireCurve rear_tire(const VehicleParams& params);

double lateral_tire_force(double alpha, const TireCurve& tire);

struct TireInverse {
  double alpha;
  /// Request exceeded the peak force; alpha is the peak slip with the request's sign.
  bool saturated;
};

/// Inverse on the pre-peak monotone branch.
TireInverse inverse_lateral_tire_force(double F_y_req, const TireCurve& tire);

/// Time derivative of the body-frame velocity states, (v_x, v_y, gamma).
struct BodyRates {
  double dv_x;
  double dv_y;
  double dgamma;
};

BodyRates body_rates(const DynamicState& state, double delta, double F_xf, double F_xr,
                     const VehicleParams& params);

/// One fixed RK4 step of pose and body velocities with the steering held at delta_cmd.
/// Throws LowSpeedDomain when the entry state is below the guard speed.
DynamicState dynamic_step(const DynamicState& state, double delta_cmd, double F_xf, double F_xr,
                          const VehicleParams& params, double dt);

}  // namespace evasion
