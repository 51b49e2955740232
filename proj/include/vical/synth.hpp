#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "vical/core.hpp"
#include "vical/imucal.hpp"
#include "vical/ingest.hpp"
#include "vical/photometric.hpp"

namespace vical {

// Deterministic per-channel Gaussian streams: each consumer draws from its
// own generator seeded with splitmix64(seed, channel), so adding samples to
// one stream never perturbs another. Normals come from Box-Muller over
// mt19937_64, which is bit-reproducible for a fixed build.
enum class NoiseChannel : std::uint32_t {
  gyro_white = 0,
  gyro_walk = 1,
  accel_white = 2,
  accel_walk = 3,
  mocap_rotation = 4,
  mocap_translation = 5,
  glitch = 6,
  texture = 7,
  pairs = 8,
};

std::uint64_t substream_seed(std::uint64_t seed, NoiseChannel channel);

class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, NoiseChannel channel);

  double next();              // standard normal
  Eigen::Vector3d next_vec3();
  double uniform();           // (0, 1)
  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Per-axis C-infinity motion: x(t) = rate * t + sum_h amp * sin(2 pi f t + phase).
struct Harmonic {
  double amp = 0.0;
  double freq_hz = 0.0;
  double phase = 0.0;
};
struct AxisMotion {
  double rate = 0.0;  // linear term; m/s for translation, rad/s for rotation
  std::vector<Harmonic> harmonics;

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
};

struct RigConfig {
  double duration_s = 60.0;
  double imu_rate_hz = 200.0;
  double mocap_rate_hz = 120.0;
  double cam_rate_hz = 20.0;
  std::uint64_t seed = 1;

  std::array<AxisMotion, 3> translation;  // meters
  std::array<AxisMotion, 3> rotation;     // rotation-vector components, rad

  RigidMotion T_MI;
  RigidMotion T_WG;
  ImuIntrinsics intrinsics;
  Eigen::Vector3d gravity{0.0, 0.0, -9.80665};

  // Continuous-time densities (unit/sqrt(Hz) and unit/s/sqrt(Hz)); converted
  // to per-sample values with sigma_w/sqrt(tau0) and sigma_b*sqrt(tau0).
  NoiseDensities gyro_noise;
  NoiseDensities accel_noise;

  std::int64_t mocap_offset_ns = 0;   // MoCap clock = IMU clock + offset
  double mocap_start_delay_s = 0.0;   // MoCap recording starts this late
  double mocap_rot_noise_deg = 0.0;
  double mocap_trans_noise_m = 0.0;
  double glitch_rate = 0.0;           // per-sample probability of a spike
  double glitch_magnitude_m = 1.0;
  // Keep-intervals of ground-truth/MoCap coverage in seconds; empty = full.
  std::vector<std::pair<double, double>> mocap_coverage;

  double pairs_rot_noise_deg = 0.0;   // noise on the hand-eye observations
  double pairs_trans_noise_m = 0.0;

  ExposureModel exposure{0.01, 1e-4, 0.02};
  double lux_min = 20.0;
  double lux_max = 20000.0;

  int vignette_views = 10;
  int vignette_image_size = 48;
  double vignette_r2 = 0.4;   // V = 1 - r2 * r^2 - r4 * r^4, r in [0,1]
  double vignette_r4 = 0.25;
};

// Rich 6-DoF default motion suitable for hand-eye and intrinsics closed
// loops.
RigConfig default_rig_config(std::uint64_t seed = 1);

// Rapid calibration-style shaking (fast rotations on all axes). Time-offset
// estimation against noisy MoCap needs the high angular-rate derivatives;
// gentle motion leaves the offset statistically unresolvable at the 10 us
// level.
RigConfig calib_motion_config(std::uint64_t seed = 1);

RigConfig parse_rig_config(std::string_view text);
RigConfig load_rig_config(const std::filesystem::path& path);
void write_rig_config(const RigConfig& config,
                      const std::filesystem::path& path);

// Analytic ground truth: pose, derivatives, body rate and specific force in
// closed form at any t in [0, duration].
class GroundTruthBundle {
 public:
  explicit GroundTruthBundle(RigConfig config);

  const RigConfig& config() const { return config_; }

  Eigen::Vector3d position(double t) const;
  Eigen::Vector3d velocity(double t) const;
  Eigen::Vector3d acceleration(double t) const;
  Eigen::Vector3d rotvec(double t) const;
  Eigen::Quaterniond orientation(double t) const;  // R_WI
  RigidMotion pose_wi(double t) const;
  Eigen::Vector3d omega_body(double t) const;
  Eigen::Vector3d specific_force(double t) const;  // R^T (p_ddot - g)

 private:
  RigConfig config_;
};

GroundTruthBundle make_trajectory(const RigConfig& config);

// Clean analytic signals at the IMU rate, corrupted with white noise and a
// random-walk bias, then pushed through the inverse intrinsics model to
// produce raw measurements.
std::vector<ImuSample> sample_imu(const GroundTruthBundle& bundle);

// T_WM = T_WI * T_MI^-1 at the MoCap rate, timestamps shifted by the
// injected offset, pose noise and optional isolated position glitches
// applied, coverage windows respected.
Trajectory sample_mocap(const GroundTruthBundle& bundle);

// True T_WI at MoCap sample times on the IMU clock (coverage applied).
Trajectory ground_truth_trajectory(const GroundTruthBundle& bundle);

// Exact (T_WM, T_IG = T_WI^-1 * T_WG) observations at the camera rate.
std::vector<PosePair> sample_pairs(const GroundTruthBundle& bundle);

// Auto-exposure log: lux sweep across the configured range, exposure
// clamp(k/L, t_min, t_max), at the camera rate.
std::vector<ExposureRecord> sample_exposures(const GroundTruthBundle& bundle);

// Writes imu.csv, mocap.csv, gt.csv, pairs.csv, exposures.csv, truth.txt
// (all injected parameters, calib.txt dialect) and vignette/ (views.csv,
// view_NNN.pgm, vignette_true.pgm). Deterministic per config.
DatasetDir emit_dataset(const GroundTruthBundle& bundle,
                        const std::filesystem::path& out_dir);

// The vignette ground truth used by emit_dataset.
ImageF synthetic_vignette(int size, double r2, double r4);

}  // namespace vical
