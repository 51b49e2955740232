#pragma once

#include <optional>
#include <vector>

#include "vical/core.hpp"
#include "vical/ingest.hpp"

namespace vical {

// Estimate the fixed transforms T_MI (markers -> IMU) and T_WG (world ->
// grid) from synchronized pairs (T_WM_i, T_IG_i), minimizing
//   sum_i || log_SE3( T_WG^-1 * T_WM_i * T_MI * T_IG_i ) ||^2
// by Gauss-Newton on SE(3) x SE(3). Rotation (rad) and translation (m) parts
// are weighted equally in natural units.
struct HandEyeProblem {
  std::vector<PosePair> pairs;
  std::optional<RigidMotion> initial_T_MI;
  std::optional<RigidMotion> initial_T_WG;
};

struct HandEyeSolution {
  RigidMotion T_MI;
  RigidMotion T_WG;
  double rms_residual = 0.0;  // RMS of the 6-vector log norms
  int iterations = 0;
  bool converged = false;
};

struct HandEyeParams {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double min_axis_span_deg = 15.0;  // required spread of relative-rotation axes
  double min_rotation_deg = 0.5;    // relative rotations below this are noise
};

// Throws degenerate when fewer than 3 pairs or the relative-rotation axes
// span less than min_axis_span_deg. A run that exhausts max_iterations
// returns the best iterate with converged = false.
HandEyeSolution solve_handeye(const HandEyeProblem& problem,
                              const HandEyeParams& params = {});

// T_WI = T_WM * T_MI per sample; timestamps preserved; child frame becomes I.
Trajectory convert_mocap_to_gt(const Trajectory& mocap_wm,
                               const RigidMotion& T_MI);

}  // namespace vical
