#include "evasion/vehicle_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "evasion/errors.hpp"

namespace evasion {
namespace {

void require_speed(double v_x) {
  if (!(v_x >= kLowSpeedGuard))
    throw LowSpeedDomain("v_x = " + std::to_string(v_x) + " m/s is below the low-speed guard");
}

// Full state derivative without the guard check; RK4 stages may dip marginally.
struct Derivative {
  double x, y, theta, v_x, v_y, gamma;
};

Derivative derivative(const DynamicState& s, double delta, double F_xf, double F_xr,
                      const VehicleParams& p, const TireCurve& front, const TireCurve& rear) {
  const double beta = std::atan(s.v_y / s.v_x);
  const double alpha_f = delta - beta - p.l_f * s.gamma / s.v_x;
  const double alpha_r = p.l_r * s.gamma / s.v_x - beta;
  const double F_yf = lateral_tire_force(alpha_f, front);
  const double F_yr = lateral_tire_force(alpha_r, rear);
  const Vec2 v = rotate_local_to_global(s.v_x, s.v_y, s.theta);
  return {v.x,
          v.y,
          s.gamma,
          (F_xf + F_xr) / p.m + s.v_y * s.gamma,
          (F_yf + F_yr) / p.m - s.v_x * s.gamma,
          (F_yf * p.l_f - F_yr * p.l_r) / p.I_zz};
}

DynamicState advance(const DynamicState& s, const Derivative& d, double h) {
  DynamicState out = s;
  out.x += h * d.x;
  out.y += h * d.y;
  out.theta += h * d.theta;
  out.v_x += h * d.v_x;
  out.v_y += h * d.v_y;
  out.gamma += h * d.gamma;
  return out;
}

}  // namespace

Vec2 rotate_global_to_local(double v_X, double v_Y, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {v_X * c + v_Y * s, -v_X * s + v_Y * c};
}

Vec2 rotate_local_to_global(double v_x, double v_y, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {v_x * c - v_y * s, v_x * s + v_y * c};
}

KinematicState kinematic_step(const KinematicState& s, const KinematicInput& u, double dt) {
  const double half_dt2 = 0.5 * dt * dt;
  return {s.x + s.v_X * dt + u.a_X * half_dt2, s.y + s.v_Y * dt + u.a_Y * half_dt2,
          s.v_X + u.a_X * dt, s.v_Y + u.a_Y * dt};
}

SlipAngles slip_angles(const DynamicState& s, const VehicleParams& p) {
  require_speed(s.v_x);
  const double beta = s.sideslip();
  return {s.delta - beta - p.l_f * s.gamma / s.v_x, p.l_r * s.gamma / s.v_x - beta};
}

double TireCurve::peak_slip() const { return std::tan(std::numbers::pi / (2.0 * C)) / B; }

TireCurve front_tire(const VehicleParams& p) {
  return {p.C_y, p.B_y, p.mu, static_normal_loads(p).front};
}

TireCurve rear_tire(const VehicleParams& p) {
  return {p.C_y, p.B_y, p.mu, static_normal_loads(p).rear};
}

double lateral_tire_force(double alpha, const TireCurve& t) {
  return t.mu * t.F_z * std::sin(t.C * std::atan(t.B * alpha));
}

TireInverse inverse_lateral_tire_force(double F_y_req, const TireCurve& t) {
  const double ratio = F_y_req / t.peak_force();
  if (std::abs(ratio) >= 1.0) return {std::copysign(t.peak_slip(), ratio), std::abs(ratio) > 1.0};
  return {std::tan(std::asin(ratio) / t.C) / t.B, false};
}

BodyRates body_rates(const DynamicState& s, double delta, double F_xf, double F_xr,
                     const VehicleParams& p) {
  require_speed(s.v_x);
  const auto d = derivative(s, delta, F_xf, F_xr, p, front_tire(p), rear_tire(p));
  return {d.v_x, d.v_y, d.gamma};
}

DynamicState dynamic_step(const DynamicState& s, double delta_cmd, double F_xf, double F_xr,
                          const VehicleParams& p, double dt) {
  require_speed(s.v_x);
  const TireCurve front = front_tire(p);
  const TireCurve rear = rear_tire(p);
  DynamicState s0 = s;
  s0.delta = delta_cmd;

  const auto k1 = derivative(s0, delta_cmd, F_xf, F_xr, p, front, rear);
  const auto k2 = derivative(advance(s0, k1, 0.5 * dt), delta_cmd, F_xf, F_xr, p, front, rear);
  const auto k3 = derivative(advance(s0, k2, 0.5 * dt), delta_cmd, F_xf, F_xr, p, front, rear);
  const auto k4 = derivative(advance(s0, k3, dt), delta_cmd, F_xf, F_xr, p, front, rear);

  const double w = dt / 6.0;
  DynamicState out = s0;
  out.x += w * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  out.y += w * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
  out.theta += w * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
  out.v_x += w * (k1.v_x + 2 * k2.v_x + 2 * k3.v_x + k4.v_x);
  out.v_y += w * (k1.v_y + 2 * k2.v_y + 2 * k3.v_y + k4.v_y);
  out.gamma += w * (k1.gamma + 2 * k2.gamma + 2 * k3.gamma + k4.gamma);
  return out;
}

}  // namespace evasion
