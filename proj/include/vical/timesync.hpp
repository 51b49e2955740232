#pragma once

#include <cstdint>
#include <vector>

#include "vical/core.hpp"

namespace vical {

// Offset convention throughout: a MoCap timestamp reads offset_ns more than
// the IMU clock at the same instant (t_mocap = t_imu + offset). Subtracting
// the offset from MoCap timestamps synchronizes them with IMU time.

// Windowed median on each position component; orientations untouched.
// Windows shrink symmetrically near the edges, so a monotone ramp passes
// through unchanged. Throws bad_window unless window is odd and >= 3.
Trajectory median_filter_positions(const Trajectory& traj, int window);

// Outlier rejection for smooth consumers (differentiation): a position is
// replaced by the windowed median only when it deviates from it by more
// than threshold_m. Unlike the plain median this keeps inlier samples
// bit-exact, so curvature survives second differences.
Trajectory deglitch_positions(const Trajectory& traj, int window = 5,
                              double threshold_m = 0.05);

// Arrival-time initialization: difference of first timestamps.
Timestamp coarse_align(const std::vector<ImuSample>& imu,
                       const Trajectory& mocap);

struct OffsetEstimate {
  double offset_ns = 0.0;  // fractional after parabola refinement
  std::vector<std::pair<Timestamp, double>> cost_curve;
  bool refined = false;
};

// cost(d) = mean over MoCap rate timestamps t_m in the overlap of
// (|w_imu|(t_m - d) - |w_mocap|(t_m))^2, IMU magnitudes linearly
// interpolated. Interpolating the noisy MoCap series instead would modulate
// its noise variance with d and bias the minimum by a sizable fraction of
// the MoCap sample interval. Every candidate offset must leave >= 1 s of
// overlap (no_overlap otherwise); a flat MoCap signal (peak below
// min_peak_rate) is no_signal.
OffsetEstimate grid_search_offset(const ScalarSeries& imu_mag,
                                  const ScalarSeries& mocap_mag,
                                  Timestamp center_ns, Timestamp half_window_ns,
                                  Timestamp step_ns = 100'000);

// Vertex abscissa of the parabola through the three points around the
// discrete minimum; never moves the estimate by more than half a grid step.
// Throws boundary_minimum when argmin sits at either end of the curve.
double refine_parabola(
    const std::vector<std::pair<Timestamp, double>>& cost_curve,
    std::size_t argmin_index);

struct TimeSyncParams {
  Timestamp step_ns = 100'000;              // 100 us grid
  Timestamp half_window_ns = 500'000'000;   // +-0.5 s around the coarse guess
  int median_window = 5;
  double min_peak_rate = 0.05;              // rad/s, below this: no_signal
  int max_widenings = 3;                    // on boundary_minimum, window *= 2
};

struct TimeAlignResult {
  OffsetEstimate estimate;
  // Aligned-rate comparison series (for plotting): IMU gyro magnitudes and
  // MoCap magnitudes with timestamps shifted onto the IMU clock.
  ScalarSeries imu_rate;
  ScalarSeries mocap_rate_aligned;
};

// Full pipeline: median filter -> central-difference MoCap rates -> coarse
// alignment -> grid search -> parabola refinement.
TimeAlignResult time_align(const std::vector<ImuSample>& imu,
                           const Trajectory& mocap,
                           const TimeSyncParams& params = {});

}  // namespace vical
