#pragma once

#include "evasion/mpc_planner.hpp"
#include "evasion/types.hpp"

namespace evasion {

enum class BlendReason { MpcOk, MpcNearLimit, MpcTimeout, MpcDegraded };

const char* to_string(BlendReason reason);

struct BlendConfig {
  /// |u_Y| of the first planned step where the MSF share starts to grow.
  double threshold = 0.8;
  /// Ramp width above the threshold; the MSF share reaches one at threshold + width.
  double width = 0.2;
};

struct BlendDecision {
  /// MSF share in [0, 1].
  double lambda = 1.0;
  BlendReason reason = BlendReason::MpcTimeout;
};

BlendDecision blend_weight(const PlannerSolution& mpc, const BlendConfig& config = {});

/// Componentwise (1 - lambda) mpc + lambda msf.
KinematicInput blend_refs(const KinematicInput& mpc, const KinematicInput& msf, double lambda);

struct ControlReference {
  double delta_ref = 0.0;
  double v_x_ref = 0.0;
  /// The front tire could not deliver the request or delta_ref hit its limit.
  bool saturated = false;
};

/// Inverts the lateral single-track dynamics for a global acceleration request.
/// Throws LowSpeedDomain below the guard speed.
ControlReference fbl_extract(const KinematicInput& a_ref, const DynamicState& state,
                             const VehicleParams& params);

}  // namespace evasion
