#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vical/core.hpp"

namespace vical {

// Contiguous ground-truth runs, split wherever the inter-sample gap exceeds
// the threshold (ground truth is typically available only at the start and
// end of a sequence). Half-open index ranges into the trajectory.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<Segment> split_segments(const Trajectory& gt,
                                    double gap_threshold_s = 0.5);

// Estimate poses paired with ground truth interpolated to the estimate
// timestamps. A pair is kept when the timestamp falls inside a ground-truth
// segment and the bracketing samples are within max_gap_s.
struct AssociatedPair {
  Timestamp t = 0;
  RigidMotion gt;
  RigidMotion est;
  int segment = 0;
};
struct AssociatedTrack {
  std::vector<AssociatedPair> pairs;
  int segment_count = 0;
};
AssociatedTrack associate(const Trajectory& gt, const Trajectory& est,
                          double max_gap_s = 0.05,
                          double gap_threshold_s = 0.5);

// Closed-form rigid alignment (centroid subtraction, cross-covariance SVD
// with reflection guard, no scale) minimizing  sum_i || T p_i - p_hat_i ||^2.
// Throws degenerate for coincident or collinear geometry.
RigidMotion align_se3(std::span<const Eigen::Vector3d> p,
                      std::span<const Eigen::Vector3d> p_hat);

// RMS position error after optimal SE(3) alignment over all pairs.
double ate(const AssociatedTrack& track);

// ATE per segment, each with its own alignment.
std::vector<double> per_segment_ate(const AssociatedTrack& track);

// Relative pose error over delta-second intervals, within segments:
//   E_i = (rel_est_i)^-1 (rel_gt_i),  rel taken between t_i and t_i + delta.
// Translational part: RMS |trans(E_i)|. Rotational part: RMS rotation angle
// of E_i in degrees. The partner pose is the nearest sample to t_i + delta
// within 10% of delta. Throws empty_range when no interval pairs exist.
struct RpeResult {
  double trans_m = 0.0;
  double rot_deg = 0.0;
  std::size_t intervals = 0;
};
RpeResult rpe(const AssociatedTrack& track, double delta_s);

// Diverged iff the ATE restricted to the last segment (with its own
// alignment) exceeds threshold_m (strict). With a single full-coverage
// segment, the end segment is the final end_window_s seconds.
bool classify_divergence(const AssociatedTrack& track, double threshold_m = 2.0,
                         double end_window_s = 10.0);

// Sum of inter-sample translation norms of the ground truth.
double trajectory_length(const Trajectory& gt);

struct EvalParams {
  double delta_s = 1.0;
  double max_gap_s = 0.05;
  double gap_threshold_s = 0.5;
  double divergence_threshold_m = 2.0;
  double end_window_s = 10.0;
};

struct EvalReport {
  double ate_m = 0.0;
  double rpe_trans_m = 0.0;
  double rpe_rot_deg = 0.0;
  std::size_t rpe_intervals = 0;
  std::vector<double> segment_ate_m;
  bool diverged = false;
  double length_m = 0.0;
  std::size_t associated_pairs = 0;
  int segments = 0;
};
EvalReport evaluate_trajectories(const Trajectory& gt, const Trajectory& est,
                                 const EvalParams& params = {});

}  // namespace vical
