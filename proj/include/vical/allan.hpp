#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vical/core.hpp"

namespace vical {

// Overlapping Allan deviation of one scalar series as a function of the
// integration time tau = n * tau0.
struct AllanCurve {
  std::vector<double> tau;            // seconds, strictly increasing
  std::vector<double> dev;            // Allan deviation at tau
  std::vector<std::uint64_t> counts;  // averaged pairs per tau (M - 2n + 1)

  std::size_t size() const { return tau.size(); }
};

// ~points_per_decade log-spaced cluster sizes from 1 to M/3, deduplicated.
std::vector<std::size_t> default_cluster_sizes(std::size_t sample_count,
                                               int points_per_decade = 30);

// Overlapping estimator
//   sigma2(n tau0) = 1/(2 (M - 2n + 1)) * sum_k (gbar_{k+n} - gbar_k)^2
// over all M - 2n + 1 start positions, cluster means via prefix sums so each
// cluster size costs O(M). Samples are centered on their mean first (the
// estimator is translation invariant). Throws insufficient_data naming the
// offending n when M < 2n + 1.
AllanCurve allan_deviation(std::span<const double> samples, double tau0_s,
                           std::span<const std::size_t> cluster_sizes);

// Exact finite-n Allan variance of a discrete random walk with per-step
// standard deviation sigma_b_step: sigma_b_step^2 * (1/(6n) + n/3).
double allan_rw_closed_form(std::size_t n, double sigma_b_step);

// Fixed-slope fits in log-log space over curve points with tau in
// [tau_lo, tau_hi]. White noise: slope -1/2, value read at tau = 1 s.
// Bias random walk: slope +1/2, value read at tau = 3 s. Throw empty_range
// when fewer than two points fall inside the range.
double fit_white_noise(const AllanCurve& curve, double tau_lo, double tau_hi);
double fit_bias_rw(const AllanCurve& curve, double tau_lo, double tau_hi);

// Per-axis curves of one IMU channel plus their mean-over-axes curve.
struct ImuAllanCurves {
  std::array<AllanCurve, 3> axis;
  AllanCurve mean;
};

enum class ImuChannel { gyro, accel };

ImuAllanCurves compute_imu_allan(const std::vector<ImuSample>& samples,
                                 ImuChannel channel,
                                 int points_per_decade = 30);

// Mean-over-selected-axes deviation curve (Fig-4 style axis averaging).
AllanCurve average_axes(const ImuAllanCurves& curves,
                        const std::array<bool, 3>& use_axis);

// CSV: #tau_s,dev_x,dev_y,dev_z,dev_mean
void write_allan_csv(const ImuAllanCurves& curves,
                     const std::filesystem::path& path);

}  // namespace vical
