#pragma once

#include <array>

namespace evasion {

/// Below this longitudinal speed (m/s) the dynamic model refuses to evaluate.
inline constexpr double kLowSpeedGuard = 0.5;

/// Physical constants of the rear-driven single-track test vehicle. SI units throughout.
struct VehicleParams {
  double m = 925.0;             // mass (kg)
  double I_zz = 617.0;          // yaw inertia (kg m^2)
  double J_wr = 1.24;           // rear wheel inertia (kg m^2)
  double r = 0.301;             // wheel radius (m)
  double l_f = 0.99;            // CoG to front axle (m)
  double l_r = 0.71;            // CoG to rear axle (m)
  double T_max = 200.0;         // per-motor torque limit (N m)
  double delta_max = 0.3;       // steering limit (rad)
  double delta_rate_max = 0.6;  // steering rate limit (rad/s)
  double C_y = 1.4057;
  double B_y = 7.1138;
  double C_x = 1.5;  // stored, unused by the rigid-wheel drive map
  double B_x = 8.0;
  double mu = 0.9;
  double g = 9.81;
  double lambda_n = 0.05;  // nominal slip ratio for the speed-loop design
  double t_s = 0.2;        // planning sample time (s)
  double K_eps = 10.0;     // steering servo gain (1/s)

  double wheelbase() const { return l_f + l_r; }

  /// Throws ConfigError naming the first offending key.
  void validate() const;

  bool operator==(const VehicleParams&) const = default;
};

struct NormalLoads {
  double front;
  double rear;
};

/// Static axle load split; front + rear == m g.
NormalLoads static_normal_loads(const VehicleParams& params);

/// Global-frame point-mass state used by the planner.
struct KinematicState {
  double x = 0.0;
  double y = 0.0;
  double v_X = 0.0;
  double v_Y = 0.0;

  bool operator==(const KinematicState&) const = default;
};

/// Global accelerations. Physical (m/s^2) or normalized to [-1, 1] depending on context.
struct KinematicInput {
  double a_X = 0.0;
  double a_Y = 0.0;

  bool operator==(const KinematicInput&) const = default;
};

struct DynamicState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v_x = 0.0;
  double v_y = 0.0;
  double gamma = 0.0;
  double delta = 0.0;

  double sideslip() const;
  bool operator==(const DynamicState&) const = default;
};

/// Danger zone: leading edge at x_obs, lateral extent w either side of y = 0.
struct Obstacle {
  double x_obs = 25.0;
  double w = 4.0;

  bool operator==(const Obstacle&) const = default;
};

struct CostWeights {
  std::array<double, 4> eta{0.25, 0.25, 0.25, 0.25};

  double sum() const { return eta[0] + eta[1] + eta[2] + eta[3]; }
  bool is_normalized(double tol = 1e-9) const;
  CostWeights normalized() const;

  bool operator==(const CostWeights&) const = default;
};

enum class BarrierMode { Literal, Repaired };

const char* to_string(BarrierMode mode);
BarrierMode barrier_mode_from_string(const char* text);

struct Scenario {
  double v_des = 5.0;
  double v0 = 5.0;
  Obstacle obstacle{};
  double detection_distance = 25.0;
  CostWeights weights{};
  int N_p = 10;
  BarrierMode barrier = BarrierMode::Repaired;
  /// Planner inputs in [-1, 1] are scaled by accel_fraction * mu * g.
  double accel_fraction = 0.2;
  /// When positive, the obstacle width is derived as nu * y_max(tau, v0).
  double nu = 0.0;
  int dodge_direction = 1;
  double zone_depth = 2.0;
  double blend_threshold = 0.8;
  double blend_width = 0.2;

  double sim_duration = 16.0;
  double control_dt = 0.01;
  double planner_dt = 0.2;
  double sensor_latency = 0.0;
  /// Position fix period; 0 means every control tick.
  double gps_period = 0.0;
  /// Cruise time at v0 before the obstacle becomes visible.
  double approach_time = 2.0;

  void validate() const;

  bool operator==(const Scenario&) const = default;
};

/// Latched perception output.
struct Detection {
  bool active = false;
  double tau = 0.0;
  double nu = 0.0;
  double t_detect = 0.0;
};

}  // namespace evasion
