#include "vical/allan.hpp"

#include <algorithm>
#include <cmath>

#include "vical/ingest.hpp"

namespace vical {

std::vector<std::size_t> default_cluster_sizes(std::size_t sample_count,
                                               int points_per_decade) {
  if (sample_count < 9) {
    fail(ErrorCode::insufficient_data,
         "need at least 9 samples for an Allan curve");
  }
  if (points_per_decade < 1) {
    fail(ErrorCode::invalid_argument, "points_per_decade must be >= 1");
  }
  const std::size_t n_max = sample_count / 3;
  std::vector<std::size_t> out;
  for (int i = 0;; ++i) {
    const double v =
        std::pow(10.0, static_cast<double>(i) / points_per_decade);
    const auto n = static_cast<std::size_t>(std::llround(v));
    if (n > n_max) break;
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

AllanCurve allan_deviation(std::span<const double> samples, double tau0_s,
                           std::span<const std::size_t> cluster_sizes) {
  if (tau0_s <= 0.0) fail(ErrorCode::invalid_argument, "tau0 must be positive");
  const std::size_t m = samples.size();
  if (m < 3) fail(ErrorCode::insufficient_data, "need at least 3 samples");

  std::vector<std::size_t> sizes(cluster_sizes.begin(), cluster_sizes.end());
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  if (sizes.empty()) fail(ErrorCode::invalid_argument, "no cluster sizes");
  for (std::size_t n : sizes) {
    if (n == 0) fail(ErrorCode::invalid_argument, "cluster size 0");
    if (m < 2 * n + 1) {
      fail(ErrorCode::insufficient_data,
           "cluster size n=" + std::to_string(n) + " needs at least " +
               std::to_string(2 * n + 1) + " samples, have " +
               std::to_string(m));
    }
  }

  // Center on the mean before prefix-summing: the estimator is translation
  // invariant and a large offset (gravity on an accelerometer axis) would
  // otherwise eat the mantissa of the running sums.
  double mean = 0.0, comp = 0.0;
  for (double x : samples) {
    const double y = x - comp;
    const double t = mean + y;
    comp = (t - mean) - y;
    mean = t;
  }
  mean /= static_cast<double>(m);

  std::vector<double> prefix(m + 1);
  prefix[0] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    prefix[i + 1] = prefix[i] + (samples[i] - mean);
  }

  AllanCurve curve;
  curve.tau.reserve(sizes.size());
  curve.dev.reserve(sizes.size());
  curve.counts.reserve(sizes.size());
  for (std::size_t n : sizes) {
    const double inv_n = 1.0 / static_cast<double>(n);
    const std::size_t pairs = m - 2 * n + 1;
    double sum = 0.0;
    for (std::size_t k = 0; k < pairs; ++k) {
      const double a = (prefix[k + n] - prefix[k]) * inv_n;
      const double b = (prefix[k + 2 * n] - prefix[k + n]) * inv_n;
      const double d = b - a;
      sum += d * d;
    }
    const double variance = sum / (2.0 * static_cast<double>(pairs));
    curve.tau.push_back(static_cast<double>(n) * tau0_s);
    curve.dev.push_back(std::sqrt(variance));
    curve.counts.push_back(pairs);
  }
  return curve;
}

double allan_rw_closed_form(std::size_t n, double sigma_b_step) {
  if (n == 0) fail(ErrorCode::invalid_argument, "n must be >= 1");
  const double nd = static_cast<double>(n);
  return sigma_b_step * sigma_b_step * (1.0 / (6.0 * nd) + nd / 3.0);
}

namespace {

// Offset of a fixed-slope line in log-log space, least squares over the
// curve points inside [tau_lo, tau_hi].
double fit_fixed_slope(const AllanCurve& curve, double tau_lo, double tau_hi,
                       double slope) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.tau[i] < tau_lo || curve.tau[i] > tau_hi) continue;
    if (curve.dev[i] <= 0.0) continue;
    sum += std::log(curve.dev[i]) - slope * std::log(curve.tau[i]);
    ++count;
  }
  if (count < 2) {
    fail(ErrorCode::empty_range,
         "fewer than 2 positive curve points inside tau range [" +
             format_double(tau_lo) + ", " + format_double(tau_hi) + "]");
  }
  return sum / static_cast<double>(count);
}

}  // namespace

double fit_white_noise(const AllanCurve& curve, double tau_lo, double tau_hi) {
  // line value at tau = 1 s
  return std::exp(fit_fixed_slope(curve, tau_lo, tau_hi, -0.5));
}

double fit_bias_rw(const AllanCurve& curve, double tau_lo, double tau_hi) {
  // line value at tau = 3 s: sigma_b = sigma_A(3 s)
  const double offset = fit_fixed_slope(curve, tau_lo, tau_hi, 0.5);
  return std::exp(offset) * std::sqrt(3.0);
}

ImuAllanCurves compute_imu_allan(const std::vector<ImuSample>& samples,
                                 ImuChannel channel, int points_per_decade) {
  if (samples.size() < 9) {
    fail(ErrorCode::insufficient_data,
         "need at least 9 samples for an Allan curve");
  }
  const double tau0 =
      to_seconds(samples.back().t - samples.front().t) /
      static_cast<double>(samples.size() - 1);
  const auto sizes = default_cluster_sizes(samples.size(), points_per_decade);

  ImuAllanCurves out;
  std::vector<double> series(samples.size());
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      series[i] = channel == ImuChannel::gyro ? samples[i].gyro[axis]
                                              : samples[i].accel[axis];
    }
    out.axis[axis] = allan_deviation(series, tau0, sizes);
  }
  out.mean = average_axes(out, {true, true, true});
  return out;
}

AllanCurve average_axes(const ImuAllanCurves& curves,
                        const std::array<bool, 3>& use_axis) {
  int used = 0;
  for (bool b : use_axis) used += b ? 1 : 0;
  if (used == 0) fail(ErrorCode::invalid_argument, "no axes selected");
  AllanCurve out;
  out.tau = curves.axis[0].tau;
  out.counts = curves.axis[0].counts;
  out.dev.assign(out.tau.size(), 0.0);
  for (int a = 0; a < 3; ++a) {
    if (!use_axis[a]) continue;
    for (std::size_t i = 0; i < out.dev.size(); ++i) {
      out.dev[i] += curves.axis[a].dev[i];
    }
  }
  for (double& d : out.dev) d /= used;
  return out;
}

void write_allan_csv(const ImuAllanCurves& curves,
                     const std::filesystem::path& path) {
  std::string out = "#tau_s,dev_x,dev_y,dev_z,dev_mean\n";
  for (std::size_t i = 0; i < curves.mean.size(); ++i) {
    out += format_double(curves.mean.tau[i]);
    for (int a = 0; a < 3; ++a) {
      out += ',';
      out += format_double(curves.axis[a].dev[i]);
    }
    out += ',';
    out += format_double(curves.mean.dev[i]);
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace vical
