#include "evasion/msf_planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evasion/errors.hpp"
#include "evasion/vehicle_model.hpp"

namespace evasion {
namespace {

struct LateralState {
  double y = 0.0;
  double theta = 0.0;
  double v_y = 0.0;
  double gamma = 0.0;
};

class MaxSteerIntegrator {
 public:
  MaxSteerIntegrator(double v_x, const VehicleParams& p)
      : v_(v_x), p_(p), front_(front_tire(p)), rear_(rear_tire(p)) {}

  double ramp_end() const { return p_.delta_max / p_.delta_rate_max; }

  // Advances from t0 to t1 in n equal RK4 steps, tracking the running maximum of y.
  void integrate(double t0, double t1, int n, LateralState& s, double& y_env) const {
    const double h = (t1 - t0) / n;
    for (int i = 0; i < n; ++i) {
      const double t = t0 + i * h;
      const auto k1 = rates(t, s);
      const auto k2 = rates(t + 0.5 * h, shifted(s, k1, 0.5 * h));
      const auto k3 = rates(t + 0.5 * h, shifted(s, k2, 0.5 * h));
      const auto k4 = rates(t + h, shifted(s, k3, h));
      s.y += h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
      s.theta += h / 6 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
      s.v_y += h / 6 * (k1.v_y + 2 * k2.v_y + 2 * k3.v_y + k4.v_y);
      s.gamma += h / 6 * (k1.gamma + 2 * k2.gamma + 2 * k3.gamma + k4.gamma);
      y_env = std::max(y_env, s.y);
    }
  }

 private:
  static LateralState shifted(const LateralState& s, const LateralState& d, double h) {
    return {s.y + h * d.y, s.theta + h * d.theta, s.v_y + h * d.v_y, s.gamma + h * d.gamma};
  }

  LateralState rates(double t, const LateralState& s) const {
    const double delta = std::min(p_.delta_rate_max * t, p_.delta_max);
    const double beta = std::atan(s.v_y / v_);
    const double F_yf = lateral_tire_force(delta - beta - p_.l_f * s.gamma / v_, front_);
    const double F_yr = lateral_tire_force(p_.l_r * s.gamma / v_ - beta, rear_);
    return {v_ * std::sin(s.theta) + s.v_y * std::cos(s.theta), s.gamma,
            (F_yf + F_yr) / p_.m - v_ * s.gamma, (F_yf * p_.l_f - F_yr * p_.l_r) / p_.I_zz};
  }

  double v_;
  VehicleParams p_;
  TireCurve front_;
  TireCurve rear_;
};

// Largest course angle (rad, as a sine) the return aims for.
constexpr double kReturnCourse = 0.3;

int substeps(double length, double step) {
  return std::max(1, static_cast<int>(std::ceil(length / step - 1e-9)));
}

std::size_t bracket(const std::vector<double>& grid, double x) {
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  std::size_t i = static_cast<std::size_t>(it - grid.begin());
  if (i == 0) return 0;
  return std::min(i - 1, grid.size() - 2);
}

bool ascending(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

std::vector<MaxSteerSample> max_steer_profile(double v_x, std::span<const double> times,
                                              const VehicleParams& params, double step) {
  if (!(v_x >= kLowSpeedGuard))
    throw LowSpeedDomain("maximum-steering maneuver needs v_x >= 0.5 m/s, got " +
                         std::to_string(v_x));
  const MaxSteerIntegrator integrator(v_x, params);
  const double kink = integrator.ramp_end();

  std::vector<MaxSteerSample> out;
  out.reserve(times.size());
  LateralState s;
  double y_env = 0.0;
  double t = 0.0;
  for (double target : times) {
    if (target < t) throw Error("maneuver sample times must be ascending and non-negative");
    if (t < kink && kink < target) {
      integrator.integrate(t, kink, substeps(kink - t, step), s, y_env);
      t = kink;
    }
    if (target > t) integrator.integrate(t, target, substeps(target - t, step), s, y_env);
    t = target;
    out.push_back({t, s.y, y_env});
  }
  return out;
}

std::vector<MaxSteerSample> max_steer_trajectory(double v_x, double t_end,
                                                 const VehicleParams& params, double sample_dt,
                                                 double step) {
  if (!(t_end > 0.0) || !(sample_dt > 0.0)) throw Error("t_end and sample_dt must be positive");
  std::vector<double> times;
  const auto n = static_cast<std::size_t>(std::floor(t_end / sample_dt + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) times.push_back(static_cast<double>(i) * sample_dt);
  if (t_end - times.back() > 1e-9) times.push_back(t_end);
  return max_steer_profile(v_x, times, params, step);
}

YMaxTable::YMaxTable(std::vector<double> v_grid, std::vector<double> t_grid,
                     std::vector<double> values)
    : v_grid_(std::move(v_grid)), t_grid_(std::move(t_grid)), values_(std::move(values)) {
  if (v_grid_.size() < 2 || t_grid_.size() < 2) throw Error("y_max grids need two nodes each");
  if (!ascending(v_grid_) || !ascending(t_grid_)) throw Error("y_max grids must be ascending");
  if (values_.size() != v_grid_.size() * t_grid_.size())
    throw Error("y_max table size does not match its grids");
}

bool YMaxTable::covers(double t, double v) const {
  return t >= t_grid_.front() && t <= t_grid_.back() && v >= v_grid_.front() &&
         v <= v_grid_.back();
}

double YMaxTable::lookup(double t, double v) const {
  if (!covers(t, v))
    throw OutOfTable("y_max query (t = " + std::to_string(t) + " s, v = " + std::to_string(v) +
                     " m/s) lies outside the table");
  const std::size_t i = bracket(t_grid_, t);
  const std::size_t j = bracket(v_grid_, v);
  const double ft = (t - t_grid_[i]) / (t_grid_[i + 1] - t_grid_[i]);
  const double fv = (v - v_grid_[j]) / (v_grid_[j + 1] - v_grid_[j]);
  const double a = node(i, j) + fv * (node(i, j + 1) - node(i, j));
  const double b = node(i + 1, j) + fv * (node(i + 1, j + 1) - node(i + 1, j));
  return a + ft * (b - a);
}

YMaxTable build_ymax_table(std::vector<double> v_grid, std::vector<double> t_grid,
                           const VehicleParams& params) {
  if (v_grid.empty() || t_grid.empty() || !ascending(v_grid) || !ascending(t_grid))
    throw Error("y_max grids must be non-empty and ascending");
  if (v_grid.front() < kLowSpeedGuard) throw Error("y_max speed grid starts below 0.5 m/s");
  if (t_grid.front() < 0.0) throw Error("y_max time grid starts before 0");

  std::vector<double> values(v_grid.size() * t_grid.size());
  for (std::size_t j = 0; j < v_grid.size(); ++j) {
    const auto profile = max_steer_profile(v_grid[j], t_grid, params);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      values[i * v_grid.size() + j] = profile[i].y_max;
  }
  return YMaxTable(std::move(v_grid), std::move(t_grid), std::move(values));
}

YMaxTable build_default_ymax_table(const VehicleParams& params) {
  std::vector<double> v_grid;
  for (int i = 0; i <= 16; ++i) v_grid.push_back(1.0 + 0.5 * i);
  std::vector<double> t_grid;
  for (int i = 0; i <= 120; ++i) t_grid.push_back(0.05 * i);
  return build_ymax_table(std::move(v_grid), std::move(t_grid), params);
}

double lateral_steering_index(double w, double tau, double v_x, const YMaxTable& table) {
  if (!(tau > 0.0)) throw Error("time to collision must be positive");
  const double reach = table.lookup(tau, v_x);
  if (!(reach > 0.0)) throw OutOfTable("y_max vanishes at the queried point");
  return w / reach;
}

const char* to_string(MsfPhase phase) {
  switch (phase) {
    case MsfPhase::Dodge: return "dodge";
    case MsfPhase::Hold: return "hold";
    case MsfPhase::Return: return "return";
    case MsfPhase::Inactive: return "inactive";
  }
  return "?";
}

KinematicInput max_steer_acceleration(const DynamicState& state, double delta,
                                      const VehicleParams& params) {
  const BodyRates rates = body_rates(state, delta, 0.0, 0.0, params);
  // Body speed is frozen, so only the rotation of the velocity vector contributes along x.
  const Vec2 a = rotate_local_to_global(-state.gamma * state.v_y,
                                        rates.dv_y + state.gamma * state.v_x, state.theta);
  return {a.x, a.y};
}

MsfPlanner::MsfPlanner(const VehicleParams& params, const Obstacle& obstacle, MsfConfig config)
    : params_(params), obstacle_(obstacle), config_(config) {}

double MsfPlanner::lateral_cap(double v_x) const {
  return std::min(params_.mu * params_.g,
                  v_x * v_x * std::tan(params_.delta_max) / params_.wheelbase());
}

MsfReference MsfPlanner::update(const DynamicState& s, const Detection& detection, double t) {
  if (!started_) {
    if (!detection.active) return {0.0, 0.0, MsfPhase::Inactive};
    started_ = true;
    phase_ = MsfPhase::Dodge;
    t_start_ = detection.t_detect;
  }
  if (s.v_x < kLowSpeedGuard) throw LowSpeedDomain("evasive reference requested below 0.5 m/s");

  const double dir = config_.direction;
  const double lateral = dir * s.y;
  const double pass_line = obstacle_.x_obs + std::max(obstacle_.w, config_.zone_depth);

  if (phase_ == MsfPhase::Dodge && lateral >= obstacle_.w) phase_ = MsfPhase::Hold;
  if ((phase_ == MsfPhase::Dodge || phase_ == MsfPhase::Hold) && s.x > pass_line)
    phase_ = MsfPhase::Return;

  const Vec2 v_global = rotate_local_to_global(s.v_x, s.v_y, s.theta);
  if (phase_ == MsfPhase::Return && std::abs(s.y) < config_.settle_position &&
      std::abs(v_global.y) < config_.settle_velocity)
    phase_ = MsfPhase::Inactive;

  const double cap = lateral_cap(s.v_x);
  double a_Y = 0.0;
  switch (phase_) {
    case MsfPhase::Dodge: {
      const double clock = t - t_start_ + config_.steer_lead;
      const double delta = dir * std::min(params_.delta_rate_max * clock, params_.delta_max);
      const KinematicInput a = max_steer_acceleration(s, delta, params_);
      return {a.a_X, a.a_Y, phase_};
    }
    case MsfPhase::Hold:
      a_Y = -config_.hold_gain * v_global.y;
      break;
    case MsfPhase::Return: {
      // Critically damped PD near the lane, with the approach speed capped so the car can
      // still stop within the lateral acceleration limit.
      const double w0 = config_.return_frequency;
      const double dist = std::abs(s.y);
      const double v_limit = std::min({0.5 * w0 * dist, std::sqrt(cap * dist),
                                       kReturnCourse * std::hypot(v_global.x, v_global.y)});
      const double v_target = -std::copysign(v_limit, s.y);
      a_Y = 2.0 * w0 * (v_target - v_global.y);
      break;
    }
    case MsfPhase::Inactive:
      return {0.0, 0.0, phase_};
  }
  const KinematicInput a = course_acceleration(s, a_Y, cap);
  return {a.a_X, a.a_Y, phase_};
}

KinematicInput course_acceleration(const DynamicState& s, double a_Y_desired, double cap) {
  constexpr double kMinCourseCos = 0.2;
  const Vec2 v = rotate_local_to_global(s.v_x, s.v_y, s.theta);
  const double course_cos = std::max(v.x / std::hypot(v.x, v.y), kMinCourseCos);
  const double a_lateral = std::clamp(a_Y_desired / course_cos, -cap, cap);
  const Vec2 a = rotate_local_to_global(-s.gamma * s.v_y, a_lateral, s.theta);
  return {a.x, a.y};
}

}  // namespace evasion
