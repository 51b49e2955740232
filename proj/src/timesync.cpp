#include "vical/timesync.hpp"

#include <algorithm>
#include <cmath>

namespace vical {

namespace {

double median_inplace(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  }
  return m;
}

// Linear interpolation of a scalar series with monotonically increasing
// queries; keeps a running bracket index so a full sweep is O(N + M).
class SeriesInterpolator {
 public:
  explicit SeriesInterpolator(const ScalarSeries& s) : s_(s) {}

  void reset() { k_ = 0; }

  bool covers(Timestamp t) const {
    return !s_.t.empty() && t >= s_.t.front() && t <= s_.t.back();
  }

  double at(Timestamp t) {
    while (k_ + 1 < s_.t.size() && s_.t[k_ + 1] < t) ++k_;
    if (s_.t[k_] == t || k_ + 1 == s_.t.size()) return s_.v[k_];
    const double u = static_cast<double>(t - s_.t[k_]) /
                     static_cast<double>(s_.t[k_ + 1] - s_.t[k_]);
    return (1.0 - u) * s_.v[k_] + u * s_.v[k_ + 1];
  }

 private:
  const ScalarSeries& s_;
  std::size_t k_ = 0;
};

}  // namespace

Trajectory median_filter_positions(const Trajectory& traj, int window) {
  if (window < 3 || window % 2 == 0) {
    fail(ErrorCode::bad_window,
         "median window must be odd and >= 3, got " + std::to_string(window));
  }
  Trajectory out = traj;
  const std::size_t n = traj.size();
  const std::size_t half = static_cast<std::size_t>(window) / 2;
  std::vector<double> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    // Shrink symmetrically near the edges so the window stays centered.
    const std::size_t h = std::min({half, i, n - 1 - i});
    if (h == 0) continue;
    for (int c = 0; c < 3; ++c) {
      scratch.clear();
      for (std::size_t j = i - h; j <= i + h; ++j) {
        scratch.push_back(traj.samples[j].pose.translation[c]);
      }
      out.samples[i].pose.translation[c] = median_inplace(scratch);
    }
  }
  return out;
}

Trajectory deglitch_positions(const Trajectory& traj, int window,
                              double threshold_m) {
  if (threshold_m <= 0.0) {
    fail(ErrorCode::invalid_argument, "threshold must be positive");
  }
  const Trajectory medians = median_filter_positions(traj, window);
  Trajectory out = traj;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double med = medians.samples[i].pose.translation[c];
      if (std::abs(traj.samples[i].pose.translation[c] - med) > threshold_m) {
        out.samples[i].pose.translation[c] = med;
      }
    }
  }
  return out;
}

Timestamp coarse_align(const std::vector<ImuSample>& imu,
                       const Trajectory& mocap) {
  if (imu.empty() || mocap.empty()) {
    fail(ErrorCode::empty_input, "cannot align empty streams");
  }
  return mocap.first_time() - imu.front().t;
}

OffsetEstimate grid_search_offset(const ScalarSeries& imu_mag,
                                  const ScalarSeries& mocap_mag,
                                  Timestamp center_ns, Timestamp half_window_ns,
                                  Timestamp step_ns) {
  if (step_ns <= 0 || half_window_ns < step_ns) {
    fail(ErrorCode::invalid_argument, "bad grid geometry");
  }
  if (imu_mag.size() < 2 || mocap_mag.size() < 2) {
    fail(ErrorCode::empty_input, "rate series too short");
  }
  const double peak = *std::max_element(mocap_mag.v.begin(), mocap_mag.v.end());
  if (peak < 0.05) {
    fail(ErrorCode::no_signal,
         "peak MoCap angular rate " + std::to_string(peak) +
             " rad/s is below 0.05, no rotational excitation");
  }

  constexpr Timestamp kMinOverlapNs = 1'000'000'000;
  OffsetEstimate est;
  std::size_t argmin = 0;
  for (Timestamp delta = center_ns - half_window_ns;
       delta <= center_ns + half_window_ns; delta += step_ns) {
    // A MoCap sample stamped t_m happened at IMU time t_m - delta. The
    // noisy MoCap magnitudes enter at their own sample points; only the
    // denser (and in practice far less noisy) IMU series is interpolated,
    // so the residual noise variance does not depend on delta.
    const Timestamp lo = std::max(imu_mag.t.front() + delta, mocap_mag.t.front());
    const Timestamp hi = std::min(imu_mag.t.back() + delta, mocap_mag.t.back());
    if (hi - lo < kMinOverlapNs) {
      fail(ErrorCode::no_overlap,
           "streams overlap less than 1 s at candidate offset " +
               std::to_string(delta) + " ns");
    }
    SeriesInterpolator imu(imu_mag);
    double sum = 0.0;
    std::size_t count = 0;
    auto it = std::lower_bound(mocap_mag.t.begin(), mocap_mag.t.end(), lo);
    for (std::size_t i = static_cast<std::size_t>(it - mocap_mag.t.begin());
         i < mocap_mag.size() && mocap_mag.t[i] <= hi; ++i) {
      const double d = imu.at(mocap_mag.t[i] - delta) - mocap_mag.v[i];
      sum += d * d;
      ++count;
    }
    const double cost = sum / static_cast<double>(count);
    if (!est.cost_curve.empty() && cost < est.cost_curve[argmin].second) {
      argmin = est.cost_curve.size();
    }
    est.cost_curve.emplace_back(delta, cost);
  }
  est.offset_ns = static_cast<double>(est.cost_curve[argmin].first);
  est.refined = false;
  return est;
}

double refine_parabola(
    const std::vector<std::pair<Timestamp, double>>& cost_curve,
    std::size_t argmin_index) {
  if (cost_curve.size() < 3) {
    fail(ErrorCode::insufficient_data, "cost curve needs at least 3 points");
  }
  if (argmin_index == 0 || argmin_index + 1 >= cost_curve.size()) {
    fail(ErrorCode::boundary_minimum,
         "discrete minimum at the window boundary; widen the search window");
  }
  const auto& [x0, c0] = cost_curve[argmin_index - 1];
  const auto& [x1, c1] = cost_curve[argmin_index];
  const auto& [x2, c2] = cost_curve[argmin_index + 1];
  const double denom = c0 - 2.0 * c1 + c2;
  if (denom <= 0.0) {
    // flat or inverted triple: keep the grid minimum
    return static_cast<double>(x1);
  }
  const double step = 0.5 * static_cast<double>(x2 - x0);
  return static_cast<double>(x1) + 0.5 * step * (c0 - c2) / denom;
}

namespace {

// Central differences on the orientation act on the true rate like a
// boxcar average over [t - dt, t + dt] (gain sinc(w dt)). Running the gyro
// vectors through the same window before taking magnitudes matches the two
// transfer functions; otherwise the residual shape mismatch biases the
// cost minimum by several microseconds on fast motion.
std::vector<Eigen::Vector3d> boxcar_vectors(const std::vector<ImuSample>& imu,
                                            Timestamp half_width_ns) {
  const std::size_t n = imu.size();
  std::vector<Eigen::Vector3d> out(n);
  // prefix trapezoid integrals of the piecewise-linear gyro signal
  std::vector<Eigen::Vector3d> prefix(n, Eigen::Vector3d::Zero());
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = to_seconds(imu[i].t - imu[i - 1].t);
    prefix[i] = prefix[i - 1] + 0.5 * dt * (imu[i].gyro + imu[i - 1].gyro);
  }
  auto integral_to = [&](Timestamp t, std::size_t hint) {
    // integral of the interpolant from imu.front().t to t (t inside span)
    std::size_t k = hint;
    while (k + 1 < n && imu[k + 1].t <= t) ++k;
    while (k > 0 && imu[k].t > t) --k;
    Eigen::Vector3d v = prefix[k];
    if (k + 1 < n && t > imu[k].t) {
      const double dt = to_seconds(t - imu[k].t);
      const double u = static_cast<double>(t - imu[k].t) /
                       static_cast<double>(imu[k + 1].t - imu[k].t);
      const Eigen::Vector3d g_t =
          (1.0 - u) * imu[k].gyro + u * imu[k + 1].gyro;
      v += 0.5 * dt * (imu[k].gyro + g_t);
    }
    return v;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Timestamp lo = std::max(imu[i].t - half_width_ns, imu.front().t);
    const Timestamp hi = std::min(imu[i].t + half_width_ns, imu.back().t);
    if (hi <= lo) {
      out[i] = imu[i].gyro;
      continue;
    }
    const Eigen::Vector3d integral =
        integral_to(hi, i) - integral_to(lo, i > 0 ? i - 1 : 0);
    out[i] = integral / to_seconds(hi - lo);
  }
  return out;
}

}  // namespace

TimeAlignResult time_align(const std::vector<ImuSample>& imu,
                           const Trajectory& mocap,
                           const TimeSyncParams& params) {
  if (imu.empty() || mocap.size() < 3) {
    fail(ErrorCode::empty_input, "streams too short for time alignment");
  }

  const Trajectory filtered =
      median_filter_positions(mocap, params.median_window);

  TimeAlignResult result;
  result.mocap_rate_aligned = angular_rate_magnitudes(filtered);
  const ScalarSeries& mocap_mag = result.mocap_rate_aligned;
  if (mocap_mag.v.empty() ||
      *std::max_element(mocap_mag.v.begin(), mocap_mag.v.end()) <
          params.min_peak_rate) {
    fail(ErrorCode::no_signal,
         "peak MoCap angular rate below " +
             std::to_string(params.min_peak_rate) + " rad/s");
  }

  // median MoCap sample spacing = the central-difference half window
  Timestamp mocap_dt = 8'333'333;
  if (mocap.size() >= 2) {
    std::vector<Timestamp> gaps;
    gaps.reserve(mocap.size() - 1);
    for (std::size_t i = 1; i < mocap.size(); ++i) {
      gaps.push_back(mocap.samples[i].t - mocap.samples[i - 1].t);
    }
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    mocap_dt = gaps[gaps.size() / 2];
  }

  const auto smoothed = boxcar_vectors(imu, mocap_dt);
  result.imu_rate.t.reserve(imu.size());
  result.imu_rate.v.reserve(imu.size());
  for (std::size_t i = 0; i < imu.size(); ++i) {
    result.imu_rate.t.push_back(imu[i].t);
    result.imu_rate.v.push_back(smoothed[i].norm());
  }

  const Timestamp coarse = coarse_align(imu, mocap);
  Timestamp half_window = params.half_window_ns;
  for (int attempt = 0;; ++attempt) {
    OffsetEstimate est = grid_search_offset(result.imu_rate, mocap_mag, coarse,
                                            half_window, params.step_ns);
    const auto argmin = static_cast<std::size_t>(
        std::min_element(
            est.cost_curve.begin(), est.cost_curve.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; }) -
        est.cost_curve.begin());
    try {
      est.offset_ns = refine_parabola(est.cost_curve, argmin);
      est.refined = true;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::boundary_minimum &&
          attempt < params.max_widenings) {
        half_window *= 2;
        continue;
      }
      throw;
    }
    result.estimate = std::move(est);
    break;
  }

  // Shift the MoCap series onto the IMU clock for the comparison plot.
  const auto shift =
      static_cast<Timestamp>(std::llround(result.estimate.offset_ns));
  for (auto& t : result.mocap_rate_aligned.t) t -= shift;
  return result;
}

}  // namespace vical
