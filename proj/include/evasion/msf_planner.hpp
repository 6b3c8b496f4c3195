#pragma once

#include <span>
#include <vector>

#include "evasion/types.hpp"

namespace evasion {

/// One sample of the maximum-steering maneuver: constant v_x, steering ramped at the rate
/// limit up to delta_max, from straight running.
struct MaxSteerSample {
  double t;
  /// Lateral position at t.
  double y;
  /// Largest lateral position reached on [0, t]. The maneuver eventually circles back,
  /// so this envelope is what "achievable displacement by time t" means.
  double y_max;
};

/// Internal RK4 step (s). Output times and the end of the steering ramp are always step
/// boundaries.
inline constexpr double kMaxSteerStep = 0.005;

std::vector<MaxSteerSample> max_steer_profile(double v_x, std::span<const double> times,
                                              const VehicleParams& params,
                                              double step = kMaxSteerStep);

/// Samples at 0, sample_dt, 2 sample_dt, ..., t_end.
std::vector<MaxSteerSample> max_steer_trajectory(double v_x, double t_end,
                                                 const VehicleParams& params,
                                                 double sample_dt = 0.05,
                                                 double step = kMaxSteerStep);

/// y_max(t, v) on a rectangular grid with bilinear interpolation. Immutable.
class YMaxTable {
 public:
  YMaxTable(std::vector<double> v_grid, std::vector<double> t_grid,
            std::vector<double> values);

  const std::vector<double>& v_grid() const { return v_grid_; }
  const std::vector<double>& t_grid() const { return t_grid_; }
  double node(std::size_t t_index, std::size_t v_index) const {
    return values_[t_index * v_grid_.size() + v_index];
  }

  bool covers(double t, double v) const;
  /// Throws OutOfTable outside the grid.
  double lookup(double t, double v) const;

 private:
  std::vector<double> v_grid_;
  std::vector<double> t_grid_;
  std::vector<double> values_;  // row-major in t
};

YMaxTable build_ymax_table(std::vector<double> v_grid, std::vector<double> t_grid,
                           const VehicleParams& params);

/// v in [1, 9] m/s step 0.5, t in [0, 6] s step 0.05.
YMaxTable build_default_ymax_table(const VehicleParams& params);

/// nu = w / y_max(tau, v_x). Values above one mean steering alone cannot clear in time.
double lateral_steering_index(double w, double tau, double v_x, const YMaxTable& table);

enum class MsfPhase { Dodge, Hold, Return, Inactive };

const char* to_string(MsfPhase phase);

struct MsfReference {
  double a_X = 0.0;
  double a_Y = 0.0;
  MsfPhase phase = MsfPhase::Inactive;
};

/// Global accelerations of the maximum-steering dynamics at `state` with steering `delta`
/// and the longitudinal body speed held constant.
KinematicInput max_steer_acceleration(const DynamicState& state, double delta,
                                      const VehicleParams& params);

/// Global acceleration that realizes a desired lateral (global Y) acceleration through the
/// body-frame lateral acceleration a_Y / cos(course), capped at `cap`, with the body speed held.
/// The course cosine is floored so the request keeps its sign when the car points far off axis.
KinematicInput course_acceleration(const DynamicState& state, double a_Y_desired, double cap);

struct MsfConfig {
  int direction = 1;
  /// The dodge steering target runs this far ahead of the maneuver clock (s).
  double steer_lead = 0.22;
  double zone_depth = 2.0;
  /// Lateral velocity damping while holding the dodged position (1/s).
  double hold_gain = 2.0;
  /// Natural frequency of the critically damped return to the lane (rad/s).
  double return_frequency = 0.8;
  double settle_position = 0.1;
  double settle_velocity = 0.1;
};

/// Human-like evasive reference. Phases only move forward within an episode.
class MsfPlanner {
 public:
  MsfPlanner(const VehicleParams& params, const Obstacle& obstacle, MsfConfig config = {});

  /// `state` carries the planner's view of the pose (possibly delayed).
  MsfReference update(const DynamicState& state, const Detection& detection, double t);

  MsfPhase phase() const { return started_ ? phase_ : MsfPhase::Inactive; }
  bool started() const { return started_; }

 private:
  double lateral_cap(double v_x) const;

  VehicleParams params_;
  Obstacle obstacle_;
  MsfConfig config_;
  MsfPhase phase_ = MsfPhase::Dodge;
  bool started_ = false;
  double t_start_ = 0.0;
};

}  // namespace evasion
