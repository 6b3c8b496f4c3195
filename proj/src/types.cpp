#include "evasion/types.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "evasion/errors.hpp"

namespace evasion {
namespace {

void require(bool ok, const char* key, const char* rule) {
  if (!ok) throw ConfigError(std::string(key) + " " + rule);
}

}  // namespace

void VehicleParams::validate() const {
  require(m > 0, "m", "must be positive");
  require(I_zz > 0, "I_zz", "must be positive");
  require(J_wr > 0, "J_wr", "must be positive");
  require(r > 0, "r", "must be positive");
  require(l_f > 0, "l_f", "must be positive");
  require(l_r > 0, "l_r", "must be positive");
  require(T_max > 0, "T_max", "must be positive");
  require(delta_max > 0 && delta_max < std::numbers::pi / 2, "delta_max", "must lie in (0, pi/2)");
  require(delta_rate_max > 0, "delta_rate_max", "must be positive");
  require(C_y > 1, "C_y", "must exceed 1");
  require(B_y > 0, "B_y", "must be positive");
  require(C_x > 0, "C_x", "must be positive");
  require(B_x > 0, "B_x", "must be positive");
  require(mu > 0 && mu <= 1.5, "mu", "must lie in (0, 1.5]");
  require(g > 0, "g", "must be positive");
  require(lambda_n >= 0 && lambda_n < 1, "lambda_n", "must lie in [0, 1)");
  require(t_s > 0, "t_s", "must be positive");
  require(K_eps > 0, "K_eps", "must be positive");
}

NormalLoads static_normal_loads(const VehicleParams& p) {
  const double weight = p.m * p.g;
  const double L = p.wheelbase();
  return {weight * p.l_r / L, weight * p.l_f / L};
}

double DynamicState::sideslip() const { return std::atan(v_y / v_x); }

bool CostWeights::is_normalized(double tol) const {
  for (double e : eta)
    if (e < 0.0 || e > 1.0) return false;
  return std::abs(sum() - 1.0) <= tol;
}

CostWeights CostWeights::normalized() const {
  const double s = sum();
  if (!(s > 0.0)) throw ConfigError("weights must have a positive sum");
  CostWeights out;
  for (std::size_t i = 0; i < eta.size(); ++i) out.eta[i] = eta[i] / s;
  return out;
}

const char* to_string(BarrierMode mode) {
  return mode == BarrierMode::Literal ? "literal" : "repaired";
}

BarrierMode barrier_mode_from_string(const char* text) {
  if (std::strcmp(text, "literal") == 0) return BarrierMode::Literal;
  if (std::strcmp(text, "repaired") == 0) return BarrierMode::Repaired;
  throw ConfigError(std::string("barrier must be 'literal' or 'repaired', got '") + text + "'");
}

void Scenario::validate() const {
  require(v_des > 0, "v_des", "must be positive");
  require(v0 >= kLowSpeedGuard, "v0", "must be at least the low-speed guard (0.5 m/s)");
  require(obstacle.w > 0, "w", "must be positive");
  require(std::isfinite(obstacle.x_obs), "x_obs", "must be finite");
  require(detection_distance > 0, "detection_distance", "must be positive");
  for (int i = 0; i < 4; ++i) {
    static const char* keys[] = {"eta_1", "eta_2", "eta_3", "eta_4"};
    require(weights.eta[i] >= 0 && weights.eta[i] <= 1, keys[i], "must lie in [0, 1]");
  }
  require(weights.is_normalized(), "weights", "must sum to 1");
  require(N_p >= 1, "N_p", "must be at least 1");
  require(accel_fraction > 0, "accel_fraction", "must be positive");
  require(nu >= 0, "nu", "must be non-negative");
  require(dodge_direction == 1 || dodge_direction == -1, "dodge_direction", "must be 1 or -1");
  require(zone_depth > 0, "zone_depth", "must be positive");
  require(blend_threshold >= 0 && blend_threshold < 1, "blend_threshold", "must lie in [0, 1)");
  require(blend_width > 0, "blend_width", "must be positive");
  require(sim_duration > 0, "sim_duration", "must be positive");
  require(control_dt > 0, "control_dt", "must be positive");
  require(planner_dt >= control_dt, "planner_dt", "must be at least control_dt");
  const double ratio = planner_dt / control_dt;
  require(std::abs(ratio - std::round(ratio)) < 1e-9, "planner_dt", "must be a multiple of control_dt");
  require(sensor_latency >= 0, "sensor_latency", "must be non-negative");
  require(gps_period >= 0, "gps_period", "must be non-negative");
  require(approach_time >= 0, "approach_time", "must be non-negative");
}

}  // namespace evasion
