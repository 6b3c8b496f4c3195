#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "evasion/arbitration.hpp"
#include "evasion/mpc_planner.hpp"
#include "evasion/msf_planner.hpp"
#include "evasion/nlp_solver.hpp"
#include "evasion/types.hpp"

namespace evasion {

/// Approach speeds below this are floored when computing the time to collision (m/s).
inline constexpr double kClosingSpeedFloor = 0.1;

/// Scripted perception: triggers once the gap drops to the detection distance and latches
/// the (tau, nu) labels of that moment.
class ObstacleDetector {
 public:
  ObstacleDetector(const Scenario& scenario, std::shared_ptr<const YMaxTable> table);

  /// Throws OutOfTable when the latched nu cannot be looked up.
  Detection detect(const DynamicState& state, double t);
  const Detection& latched() const { return latched_; }

 private:
  Scenario scenario_;
  std::shared_ptr<const YMaxTable> table_;
  Detection latched_{};
  bool triggered_ = false;
};

/// Replaces a positive `nu` by the obstacle half-width it implies at the nominal detection
/// point (gap = detection_distance, speed v0).
Scenario resolve_scenario(const Scenario& scenario, const YMaxTable& table);

struct EpisodeOptions {
  std::optional<BarrierMode> barrier;
  std::optional<double> sensor_latency;
  std::optional<double> gps_period;
  /// Every plan call gets a zero iteration budget and so reports no improvement.
  bool force_plan_failure = false;
  /// Skip the optimizer entirely; the MSF reference drives the car.
  bool force_msf_only = false;
  /// Hand the car to the MSF reference whenever the planner's prediction enters the zone.
  bool zone_guard = true;
  /// Lateral margin (m) added to the zone for that check.
  double guard_margin = 0.5;
  Budget budget{};
  MsfConfig msf{};
  BlendConfig blend{};
  /// Shared across concurrent episodes; built on demand when empty.
  std::shared_ptr<const YMaxTable> table;
};

struct TraceRow {
  double t = 0.0;
  DynamicState state{};
  double delta_mpc = 0.0;
  double delta_ref = 0.0;
  double vx_ref = 0.0;
  double T_rl = 0.0;
  double T_rr = 0.0;
  double lambda = 1.0;
  /// Unweighted horizon sums of the last planner solution.
  StageCost cost{};
  std::string status;
};

struct EpisodeTrace {
  std::vector<TraceRow> rows;
  Scenario scenario{};
  Detection detection{};
  bool aborted = false;
  std::string abort_reason;
  int plan_calls = 0;
  int plan_failures = 0;
};

EpisodeTrace run_episode(const Scenario& scenario, const VehicleParams& params,
                         const EpisodeOptions& options = {});

struct ClearanceReport {
  /// min(|y| - w) while the CoG is level with the danger zone; +inf if never level.
  double min_lateral_clearance = 0.0;
  bool collided = false;
  double max_speed = 0.0;
  bool return_settled = false;
  bool reached = false;
  double peak_steer = 0.0;
  /// Largest excursion past the lane center, opposite to the dodge, after the zone.
  double return_overshoot = 0.0;
};

ClearanceReport min_clearance(const EpisodeTrace& trace, const Obstacle& obstacle,
                              double zone_depth, double front_margin = 0.0);
ClearanceReport min_clearance(const EpisodeTrace& trace);

std::string trace_csv_header();
std::string trace_to_csv(const EpisodeTrace& trace);
/// Throws Error naming the path and the cause.
void write_trace(const EpisodeTrace& trace, const std::filesystem::path& path);

}  // namespace evasion
