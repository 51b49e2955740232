#include "vical/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace vical {

std::uint64_t substream_seed(std::uint64_t seed, NoiseChannel channel) {
  // splitmix64 over seed + channel index; decorrelates the per-channel
  // generator states even for adjacent seeds.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL *
                               (static_cast<std::uint64_t>(channel) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GaussianStream::GaussianStream(std::uint64_t seed, NoiseChannel channel)
    : engine_(substream_seed(seed, channel)) {}

double GaussianStream::uniform() {
  // strictly inside (0, 1)
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Eigen::Vector3d GaussianStream::next_vec3() {
  const double x = next();
  const double y = next();
  const double z = next();
  return {x, y, z};
}

double AxisMotion::value(double t) const {
  double v = rate * t;
  for (const auto& h : harmonics) {
    v += h.amp * std::sin(2.0 * std::numbers::pi * h.freq_hz * t + h.phase);
  }
  return v;
}

double AxisMotion::d1(double t) const {
  double v = rate;
  for (const auto& h : harmonics) {
    const double w = 2.0 * std::numbers::pi * h.freq_hz;
    v += h.amp * w * std::cos(w * t + h.phase);
  }
  return v;
}

double AxisMotion::d2(double t) const {
  double v = 0.0;
  for (const auto& h : harmonics) {
    const double w = 2.0 * std::numbers::pi * h.freq_hz;
    v -= h.amp * w * w * std::sin(w * t + h.phase);
  }
  return v;
}

RigConfig default_rig_config(std::uint64_t seed) {
  RigConfig c;
  c.seed = seed;
  c.translation[0].harmonics = {{0.8, 0.23, 0.0}, {0.3, 0.61, 1.1}, {0.1, 1.31, 0.4}};
  c.translation[1].harmonics = {{0.7, 0.31, 0.7}, {0.25, 0.53, 2.0}, {0.12, 1.13, 2.6}};
  c.translation[2].harmonics = {{0.4, 0.19, 1.9}, {0.2, 0.47, 0.3}, {0.08, 0.97, 1.5}};
  c.rotation[0].harmonics = {{0.5, 0.29, 0.2}, {0.2, 0.73, 1.3}};
  c.rotation[1].harmonics = {{0.45, 0.37, 1.0}, {0.22, 0.67, 2.2}};
  c.rotation[2].harmonics = {{0.6, 0.21, 2.4}, {0.18, 0.83, 0.9}};

  c.T_MI.rotation = so3_exp(Eigen::Vector3d(0.15, -0.28, 0.42));
  c.T_MI.translation = {0.035, -0.05, 0.09};
  c.T_MI.canonicalize();
  c.T_WG.rotation = so3_exp(Eigen::Vector3d(1.35, 0.1, -0.2));
  c.T_WG.translation = {2.4, 1.1, 0.8};
  c.T_WG.canonicalize();
  return c;
}

RigConfig calib_motion_config(std::uint64_t seed) {
  RigConfig c = default_rig_config(seed);
  c.translation[0].harmonics = {{0.35, 0.8, 0.0}, {0.1, 2.1, 1.2}};
  c.translation[1].harmonics = {{0.3, 1.1, 0.8}, {0.12, 1.9, 2.1}};
  c.translation[2].harmonics = {{0.25, 0.9, 1.7}, {0.08, 2.3, 0.5}};
  c.rotation[0].harmonics = {{0.9, 2.1, 0.3}, {0.45, 3.3, 1.6}};
  c.rotation[1].harmonics = {{0.85, 2.5, 1.1}, {0.4, 3.7, 2.4}};
  c.rotation[2].harmonics = {{1.0, 1.9, 2.0}, {0.5, 3.1, 0.7}};
  return c;
}

GroundTruthBundle::GroundTruthBundle(RigConfig config)
    : config_(std::move(config)) {
  if (config_.duration_s <= 0.0 || config_.imu_rate_hz <= 0.0 ||
      config_.mocap_rate_hz <= 0.0 || config_.cam_rate_hz <= 0.0) {
    fail(ErrorCode::invalid_argument, "rates and duration must be positive");
  }
  config_.intrinsics.validate();
}

GroundTruthBundle make_trajectory(const RigConfig& config) {
  return GroundTruthBundle(config);
}

Eigen::Vector3d GroundTruthBundle::position(double t) const {
  return {config_.translation[0].value(t), config_.translation[1].value(t),
          config_.translation[2].value(t)};
}

Eigen::Vector3d GroundTruthBundle::velocity(double t) const {
  return {config_.translation[0].d1(t), config_.translation[1].d1(t),
          config_.translation[2].d1(t)};
}

Eigen::Vector3d GroundTruthBundle::acceleration(double t) const {
  return {config_.translation[0].d2(t), config_.translation[1].d2(t),
          config_.translation[2].d2(t)};
}

Eigen::Vector3d GroundTruthBundle::rotvec(double t) const {
  return {config_.rotation[0].value(t), config_.rotation[1].value(t),
          config_.rotation[2].value(t)};
}

Eigen::Quaterniond GroundTruthBundle::orientation(double t) const {
  return so3_exp(rotvec(t));
}

RigidMotion GroundTruthBundle::pose_wi(double t) const {
  RigidMotion m;
  m.rotation = orientation(t);
  m.translation = position(t);
  return m;
}

Eigen::Vector3d GroundTruthBundle::omega_body(double t) const {
  const Eigen::Vector3d theta = rotvec(t);
  const Eigen::Vector3d theta_dot{config_.rotation[0].d1(t),
                                  config_.rotation[1].d1(t),
                                  config_.rotation[2].d1(t)};
  return so3_right_jacobian(theta) * theta_dot;
}

Eigen::Vector3d GroundTruthBundle::specific_force(double t) const {
  return orientation(t).conjugate() * (acceleration(t) - config_.gravity);
}

namespace {

Timestamp grid_time_ns(std::size_t i, double rate_hz) {
  return static_cast<Timestamp>(
      std::llround(static_cast<double>(i) * 1e9 / rate_hz));
}

std::size_t grid_count(double duration_s, double rate_hz) {
  return static_cast<std::size_t>(std::floor(duration_s * rate_hz)) + 1;
}

bool covered(const RigConfig& c, double t) {
  if (c.mocap_coverage.empty()) return true;
  for (const auto& [lo, hi] : c.mocap_coverage) {
    if (t >= lo && t <= hi) return true;
  }
  return false;
}

}  // namespace

std::vector<ImuSample> sample_imu(const GroundTruthBundle& bundle) {
  const RigConfig& c = bundle.config();
  const double tau0 = 1.0 / c.imu_rate_hz;
  const double gyro_white_sd = c.gyro_noise.sigma_w / std::sqrt(tau0);
  const double gyro_walk_sd = c.gyro_noise.sigma_b * std::sqrt(tau0);
  const double accel_white_sd = c.accel_noise.sigma_w / std::sqrt(tau0);
  const double accel_walk_sd = c.accel_noise.sigma_b * std::sqrt(tau0);

  GaussianStream gw(c.seed, NoiseChannel::gyro_white);
  GaussianStream gb(c.seed, NoiseChannel::gyro_walk);
  GaussianStream aw(c.seed, NoiseChannel::accel_white);
  GaussianStream ab(c.seed, NoiseChannel::accel_walk);

  const Eigen::Matrix3d mg_inv = c.intrinsics.M_g.inverse();
  const Eigen::Matrix3d ma_inv = c.intrinsics.M_a.inverse();

  const std::size_t n = grid_count(c.duration_s, c.imu_rate_hz);
  std::vector<ImuSample> out;
  out.reserve(n);
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * tau0;
    if (t > c.duration_s) break;
    Eigen::Vector3d gyro = bundle.omega_body(t);
    Eigen::Vector3d accel = bundle.specific_force(t);
    if (gyro_walk_sd > 0.0) gyro_bias += gyro_walk_sd * gb.next_vec3();
    if (accel_walk_sd > 0.0) accel_bias += accel_walk_sd * ab.next_vec3();
    gyro += gyro_bias;
    accel += accel_bias;
    if (gyro_white_sd > 0.0) gyro += gyro_white_sd * gw.next_vec3();
    if (accel_white_sd > 0.0) accel += accel_white_sd * aw.next_vec3();

    ImuSample s;
    s.t = grid_time_ns(i, c.imu_rate_hz);
    // raw measurements through the inverse intrinsics model
    s.gyro = mg_inv * (gyro + c.intrinsics.b_g);
    s.accel = ma_inv * (accel + c.intrinsics.b_a);
    s.temp_c = 23.0;
    out.push_back(s);
  }
  return out;
}

Trajectory sample_mocap(const GroundTruthBundle& bundle) {
  const RigConfig& c = bundle.config();
  GaussianStream rot_noise(c.seed, NoiseChannel::mocap_rotation);
  GaussianStream trans_noise(c.seed, NoiseChannel::mocap_translation);
  GaussianStream glitch(c.seed, NoiseChannel::glitch);
  const double rot_sd = c.mocap_rot_noise_deg * std::numbers::pi / 180.0;
  const RigidMotion t_im = c.T_MI.inverse();

  Trajectory out;
  out.parent = Frame::W;
  out.child = Frame::M;
  const std::size_t n = grid_count(c.duration_s, c.mocap_rate_hz);
  long last_glitch = -1000;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / c.mocap_rate_hz;
    if (t > c.duration_s) break;
    if (t < c.mocap_start_delay_s || !covered(c, t)) continue;
    PoseSample s;
    s.t = grid_time_ns(i, c.mocap_rate_hz) + c.mocap_offset_ns;
    s.pose = compose(bundle.pose_wi(t), t_im);
    if (rot_sd > 0.0) {
      s.pose.rotation = s.pose.rotation * so3_exp(rot_sd * rot_noise.next_vec3());
    }
    if (c.mocap_trans_noise_m > 0.0) {
      s.pose.translation += c.mocap_trans_noise_m * trans_noise.next_vec3();
    }
    if (c.glitch_rate > 0.0 && glitch.uniform() < c.glitch_rate &&
        static_cast<long>(i) - last_glitch > 5) {
      const int axis = static_cast<int>(glitch.raw() % 3);
      s.pose.translation[axis] += c.glitch_magnitude_m;
      last_glitch = static_cast<long>(i);
    }
    s.pose.canonicalize();
    out.samples.push_back(s);
  }
  return out;
}

Trajectory ground_truth_trajectory(const GroundTruthBundle& bundle) {
  const RigConfig& c = bundle.config();
  Trajectory out;
  out.parent = Frame::W;
  out.child = Frame::I;
  const std::size_t n = grid_count(c.duration_s, c.mocap_rate_hz);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / c.mocap_rate_hz;
    if (t > c.duration_s) break;
    if (t < c.mocap_start_delay_s || !covered(c, t)) continue;
    PoseSample s;
    s.t = grid_time_ns(i, c.mocap_rate_hz);
    s.pose = bundle.pose_wi(t);
    s.pose.canonicalize();
    out.samples.push_back(s);
  }
  return out;
}

std::vector<PosePair> sample_pairs(const GroundTruthBundle& bundle) {
  const RigConfig& c = bundle.config();
  GaussianStream noise(c.seed, NoiseChannel::pairs);
  const double rot_sd = c.pairs_rot_noise_deg * std::numbers::pi / 180.0;
  const RigidMotion t_im = c.T_MI.inverse();

  std::vector<PosePair> out;
  const std::size_t n = grid_count(c.duration_s, c.cam_rate_hz);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / c.cam_rate_hz;
    if (t > c.duration_s) break;
    PosePair p;
    p.t = grid_time_ns(i, c.cam_rate_hz);
    const RigidMotion wi = bundle.pose_wi(t);
    p.T_WM = compose(wi, t_im);
    p.T_IG = compose(wi.inverse(), c.T_WG);
    if (rot_sd > 0.0) {
      p.T_WM.rotation = p.T_WM.rotation * so3_exp(rot_sd * noise.next_vec3());
      p.T_WM.translation += c.pairs_trans_noise_m * noise.next_vec3();
      p.T_WM.canonicalize();
    }
    out.push_back(p);
  }
  return out;
}

std::vector<ExposureRecord> sample_exposures(const GroundTruthBundle& bundle) {
  const RigConfig& c = bundle.config();
  if (c.lux_min <= 0.0 || c.lux_max <= c.lux_min) {
    fail(ErrorCode::invalid_argument, "need 0 < lux_min < lux_max");
  }
  std::vector<ExposureRecord> out;
  const std::size_t n = grid_count(c.duration_s, c.cam_rate_hz);
  const double log_lo = std::log(c.lux_min);
  const double log_hi = std::log(c.lux_max);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / c.cam_rate_hz;
    if (t > c.duration_s) break;
    // log-space sweep across the full illuminance range so both exposure
    // clamps are exercised
    const double u =
        0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * t / c.duration_s -
                              0.5 * std::numbers::pi));
    const double lux = std::exp(log_lo + u * (log_hi - log_lo));
    ExposureRecord r;
    r.t = grid_time_ns(i, c.cam_rate_hz);
    r.exposure_ns =
        static_cast<std::int64_t>(std::llround(c.exposure.predict(lux) * 1e9));
    r.lux = lux;
    out.push_back(r);
  }
  return out;
}

ImageF synthetic_vignette(int size, double r2, double r4) {
  ImageF v(size, size, 1.0);
  const double cx = 0.5 * (size - 1);
  const double cy = 0.5 * (size - 1);
  const double rmax = std::hypot(cx, cy);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double r = std::hypot(x - cx, y - cy) / rmax;
      v.at(x, y) = 1.0 - r2 * r * r - r4 * r * r * r * r;
    }
  }
  // max value exactly 1 (for even sizes no pixel sits at the center)
  const double vmax = *std::max_element(v.pix.begin(), v.pix.end());
  for (double& p : v.pix) p /= vmax;
  return v;
}

DatasetDir emit_dataset(const GroundTruthBundle& bundle,
                        const std::filesystem::path& out_dir) {
  const RigConfig& c = bundle.config();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + out_dir.string());

  DatasetDir ds{out_dir};
  write_imu(sample_imu(bundle), ds.imu_csv());
  write_mocap(sample_mocap(bundle), ds.mocap_csv());
  write_mocap(ground_truth_trajectory(bundle), ds.gt_csv());
  write_pairs(sample_pairs(bundle), ds.pairs_csv());
  write_exposures(sample_exposures(bundle), ds.exposures_csv());

  // All injected parameters, in the calib.txt dialect, for closed-loop
  // comparison against the recovered calibration.
  CalibrationFile truth;
  truth.intrinsics = c.intrinsics;
  truth.cam_imu_shift_ns = 0;
  truth.mocap_imu_shift_ns = c.mocap_offset_ns;
  truth.T_MI = c.T_MI;
  truth.T_WG = c.T_WG;
  truth.accel_noise = c.accel_noise;
  truth.gyro_noise = c.gyro_noise;
  truth.exposure = c.exposure;
  write_calibration(truth, ds.truth_txt());

  // Vignette calibration views: a flat random texture observed through the
  // true vignette under shifting windows and varying exposures.
  if (c.vignette_views > 0) {
    std::filesystem::create_directories(ds.vignette_dir(), ec);
    if (ec) fail(ErrorCode::io, "cannot create " + ds.vignette_dir().string());

    const int img = c.vignette_image_size;
    const int margin = 8;
    GaussianStream tex_rng(c.seed, NoiseChannel::texture);
    // wall irradiance scaled so the rendered 16-bit images span most of
    // their range; storing near-black views would quantize away the signal
    ImageF texture(img + margin, img + margin);
    for (double& p : texture.pix) p = 20.0 + 85.0 * tex_rng.uniform();
    const ImageF vignette = synthetic_vignette(img, c.vignette_r2, c.vignette_r4);
    write_pgm16(vignette, ds.vignette_dir() / "vignette_true.pgm");

    std::string views_csv = "#view,exposure_ns,offset_x,offset_y\n";
    // corners first so the window union always covers the texture
    const int corner[4][2] = {{0, 0}, {margin, 0}, {0, margin}, {margin, margin}};
    for (int i = 0; i < c.vignette_views; ++i) {
      ViewGeometry g;
      g.exposure_s = 2e-3 * (1.0 + 0.37 * i);
      if (i < 4) {
        g.offset_x = corner[i][0];
        g.offset_y = corner[i][1];
      } else {
        g.offset_x = static_cast<int>(tex_rng.raw() % (margin + 1));
        g.offset_y = static_cast<int>(tex_rng.raw() % (margin + 1));
      }
      const ImageF view = render_view(texture, vignette, g);
      char name[32];
      std::snprintf(name, sizeof(name), "view_%03d.pgm", i);
      write_pgm16(view, ds.vignette_dir() / name);
      views_csv += format_int(i);
      views_csv += ',';
      views_csv += format_int(
          static_cast<std::int64_t>(std::llround(g.exposure_s * 1e9)));
      views_csv += ',';
      views_csv += format_int(g.offset_x);
      views_csv += ',';
      views_csv += format_int(g.offset_y);
      views_csv += '\n';
    }
    write_file(ds.vignette_dir() / "views.csv", views_csv);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// rig config I/O

namespace {

void load_axis(const IniFile& ini, std::string_view key, AxisMotion& axis) {
  const auto amp = ini.maybe_doubles("trajectory", std::string(key) + "_amp");
  const auto freq = ini.maybe_doubles("trajectory", std::string(key) + "_freq");
  const auto phase =
      ini.maybe_doubles("trajectory", std::string(key) + "_phase");
  const auto rate = ini.maybe_doubles("trajectory", std::string(key) + "_rate");
  if (rate) {
    if (rate->size() != 1) {
      fail(ErrorCode::parse, std::string(key) + "_rate: expected one value");
    }
    axis.rate = (*rate)[0];
  }
  if (!amp && !freq && !phase) return;
  if (!amp || !freq || !phase || amp->size() != freq->size() ||
      amp->size() != phase->size()) {
    fail(ErrorCode::parse,
         std::string(key) + ": amp/freq/phase lists must have equal length");
  }
  axis.harmonics.clear();
  for (std::size_t i = 0; i < amp->size(); ++i) {
    axis.harmonics.push_back({(*amp)[i], (*freq)[i], (*phase)[i]});
  }
}

std::string axis_values(const std::vector<Harmonic>& hs, int which) {
  std::string out;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (i > 0) out += ' ';
    const double v =
        which == 0 ? hs[i].amp : (which == 1 ? hs[i].freq_hz : hs[i].phase);
    out += format_double(v);
  }
  return out;
}

}  // namespace

RigConfig parse_rig_config(std::string_view text) {
  const IniFile ini = IniFile::parse(text);
  RigConfig c;  // defaults, overridden per present key
  c.translation = {};
  c.rotation = {};

  auto opt_double = [&](std::string_view sec, std::string_view key,
                        double& dst) {
    if (const auto v = ini.maybe_doubles(sec, key)) {
      if (v->size() != 1) {
        fail(ErrorCode::parse, "[" + std::string(sec) + "] " +
                                   std::string(key) + ": expected one value");
      }
      dst = (*v)[0];
    }
  };

  opt_double("sim", "duration_s", c.duration_s);
  opt_double("sim", "imu_rate_hz", c.imu_rate_hz);
  opt_double("sim", "mocap_rate_hz", c.mocap_rate_hz);
  opt_double("sim", "cam_rate_hz", c.cam_rate_hz);
  if (ini.find("sim") != nullptr && ini.find("sim")->find("seed") != nullptr) {
    c.seed = static_cast<std::uint64_t>(ini.get_int("sim", "seed"));
  }
  if (c.duration_s <= 0.0 || c.imu_rate_hz <= 0.0 || c.mocap_rate_hz <= 0.0 ||
      c.cam_rate_hz <= 0.0) {
    fail(ErrorCode::parse, "rates and duration must be positive");
  }

  const char* axis_keys[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    load_axis(ini, std::string("trans_") + axis_keys[a], c.translation[a]);
    load_axis(ini, std::string("rot_") + axis_keys[a], c.rotation[a]);
  }

  auto opt_pose = [&](std::string_view sec, RigidMotion& dst) {
    if (const auto v = ini.maybe_doubles(sec, "pose")) {
      if (v->size() != 7) {
        fail(ErrorCode::parse, "[" + std::string(sec) + "] pose: expected 7 values");
      }
      dst.translation = {(*v)[0], (*v)[1], (*v)[2]};
      dst.rotation = Eigen::Quaterniond((*v)[3], (*v)[4], (*v)[5], (*v)[6]);
      if (std::abs(dst.rotation.norm() - 1.0) > 1e-2) {
        fail(ErrorCode::norm, "[" + std::string(sec) + "] pose: bad quaternion");
      }
      dst.canonicalize();
    }
  };
  opt_pose("T_MI", c.T_MI);
  opt_pose("T_WG", c.T_WG);

  if (const auto v = ini.maybe_doubles("M_a", "m")) {
    if (v->size() != 9) fail(ErrorCode::parse, "[M_a] m: expected 9 values");
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) c.intrinsics.M_a(r, col) = (*v)[3 * r + col];
  }
  if (const auto v = ini.maybe_doubles("M_g", "m")) {
    if (v->size() != 9) fail(ErrorCode::parse, "[M_g] m: expected 9 values");
    for (int r = 0; r < 3; ++r)
      for (int col = 0; col < 3; ++col) c.intrinsics.M_g(r, col) = (*v)[3 * r + col];
  }
  if (const auto v = ini.maybe_doubles("b_a", "v")) {
    if (v->size() != 3) fail(ErrorCode::parse, "[b_a] v: expected 3 values");
    c.intrinsics.b_a = {(*v)[0], (*v)[1], (*v)[2]};
  }
  if (const auto v = ini.maybe_doubles("b_g", "v")) {
    if (v->size() != 3) fail(ErrorCode::parse, "[b_g] v: expected 3 values");
    c.intrinsics.b_g = {(*v)[0], (*v)[1], (*v)[2]};
  }
  try {
    c.intrinsics.validate();
  } catch (const Error& e) {
    fail(ErrorCode::parse, std::string("invalid intrinsics: ") + e.what());
  }

  opt_double("noise", "gyro_sigma_w", c.gyro_noise.sigma_w);
  opt_double("noise", "gyro_sigma_b", c.gyro_noise.sigma_b);
  opt_double("noise", "accel_sigma_w", c.accel_noise.sigma_w);
  opt_double("noise", "accel_sigma_b", c.accel_noise.sigma_b);

  if (ini.find("mocap") != nullptr &&
      ini.find("mocap")->find("offset_ns") != nullptr) {
    c.mocap_offset_ns = ini.get_int("mocap", "offset_ns");
  }
  opt_double("mocap", "start_delay_s", c.mocap_start_delay_s);
  opt_double("mocap", "rot_noise_deg", c.mocap_rot_noise_deg);
  opt_double("mocap", "trans_noise_m", c.mocap_trans_noise_m);
  opt_double("mocap", "glitch_rate", c.glitch_rate);
  opt_double("mocap", "glitch_magnitude_m", c.glitch_magnitude_m);
  if (const auto v = ini.maybe_doubles("mocap", "coverage")) {
    if (v->size() % 2 != 0) {
      fail(ErrorCode::parse, "[mocap] coverage: expected pairs of seconds");
    }
    for (std::size_t i = 0; i < v->size(); i += 2) {
      if ((*v)[i] >= (*v)[i + 1]) {
        fail(ErrorCode::parse, "[mocap] coverage: empty interval");
      }
      c.mocap_coverage.emplace_back((*v)[i], (*v)[i + 1]);
    }
  }

  opt_double("pairs", "rot_noise_deg", c.pairs_rot_noise_deg);
  opt_double("pairs", "trans_noise_m", c.pairs_trans_noise_m);

  opt_double("exposure", "k_lux_s", c.exposure.k_lux_s);
  opt_double("exposure", "t_min_s", c.exposure.t_min_s);
  opt_double("exposure", "t_max_s", c.exposure.t_max_s);
  opt_double("exposure", "lux_min", c.lux_min);
  opt_double("exposure", "lux_max", c.lux_max);
  if (c.exposure.k_lux_s <= 0.0 || c.exposure.t_min_s <= 0.0 ||
      c.exposure.t_min_s >= c.exposure.t_max_s) {
    fail(ErrorCode::parse, "[exposure] requires k > 0 and 0 < t_min < t_max");
  }

  if (ini.find("vignette") != nullptr) {
    const auto* sec = ini.find("vignette");
    if (sec->find("views") != nullptr) {
      c.vignette_views = static_cast<int>(ini.get_int("vignette", "views"));
    }
    if (sec->find("image_size") != nullptr) {
      c.vignette_image_size =
          static_cast<int>(ini.get_int("vignette", "image_size"));
    }
    opt_double("vignette", "r2", c.vignette_r2);
    opt_double("vignette", "r4", c.vignette_r4);
    if (c.vignette_views < 0 || c.vignette_image_size < 4 ||
        c.vignette_image_size > 2048) {
      fail(ErrorCode::parse, "[vignette] bad views/image_size");
    }
    if (1.0 - c.vignette_r2 - c.vignette_r4 < 0.02) {
      fail(ErrorCode::parse, "[vignette] corner attenuation too strong");
    }
  }

  if (const auto v = ini.maybe_doubles("gravity", "g")) {
    if (v->size() != 3) fail(ErrorCode::parse, "[gravity] g: expected 3 values");
    c.gravity = {(*v)[0], (*v)[1], (*v)[2]};
  }
  return c;
}

RigConfig load_rig_config(const std::filesystem::path& path) {
  return parse_rig_config(read_file(path));
}

void write_rig_config(const RigConfig& c, const std::filesystem::path& path) {
  IniFile ini;
  ini.set("sim", "duration_s", format_double(c.duration_s));
  ini.set("sim", "imu_rate_hz", format_double(c.imu_rate_hz));
  ini.set("sim", "mocap_rate_hz", format_double(c.mocap_rate_hz));
  ini.set("sim", "cam_rate_hz", format_double(c.cam_rate_hz));
  ini.set("sim", "seed", format_int(static_cast<std::int64_t>(c.seed)));

  const char* axis_keys[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    for (const auto& [key, axis] :
         {std::pair{std::string("trans_") + axis_keys[a], &c.translation[a]},
          std::pair{std::string("rot_") + axis_keys[a], &c.rotation[a]}}) {
      if (!axis->harmonics.empty()) {
        ini.set("trajectory", key + "_amp", axis_values(axis->harmonics, 0));
        ini.set("trajectory", key + "_freq", axis_values(axis->harmonics, 1));
        ini.set("trajectory", key + "_phase", axis_values(axis->harmonics, 2));
      }
      if (axis->rate != 0.0) {
        ini.set("trajectory", key + "_rate", format_double(axis->rate));
      }
    }
  }

  auto pose_values = [](const RigidMotion& p) {
    std::string out = format_double(p.translation.x());
    for (double v : {p.translation.y(), p.translation.z(), p.rotation.w(),
                     p.rotation.x(), p.rotation.y(), p.rotation.z()}) {
      out += ' ';
      out += format_double(v);
    }
    return out;
  };
  ini.set("T_MI", "pose", pose_values(c.T_MI));
  ini.set("T_WG", "pose", pose_values(c.T_WG));

  auto matrix_values = [](const Eigen::Matrix3d& m) {
    std::string out;
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) {
        if (r + col > 0) out += ' ';
        out += format_double(m(r, col));
      }
    }
    return out;
  };
  ini.set("M_a", "m", matrix_values(c.intrinsics.M_a));
  ini.set("M_g", "m", matrix_values(c.intrinsics.M_g));
  ini.set("b_a", "v",
          format_double(c.intrinsics.b_a.x()) + " " +
              format_double(c.intrinsics.b_a.y()) + " " +
              format_double(c.intrinsics.b_a.z()));
  ini.set("b_g", "v",
          format_double(c.intrinsics.b_g.x()) + " " +
              format_double(c.intrinsics.b_g.y()) + " " +
              format_double(c.intrinsics.b_g.z()));

  ini.set("noise", "gyro_sigma_w", format_double(c.gyro_noise.sigma_w));
  ini.set("noise", "gyro_sigma_b", format_double(c.gyro_noise.sigma_b));
  ini.set("noise", "accel_sigma_w", format_double(c.accel_noise.sigma_w));
  ini.set("noise", "accel_sigma_b", format_double(c.accel_noise.sigma_b));

  ini.set("mocap", "offset_ns", format_int(c.mocap_offset_ns));
  ini.set("mocap", "start_delay_s", format_double(c.mocap_start_delay_s));
  ini.set("mocap", "rot_noise_deg", format_double(c.mocap_rot_noise_deg));
  ini.set("mocap", "trans_noise_m", format_double(c.mocap_trans_noise_m));
  ini.set("mocap", "glitch_rate", format_double(c.glitch_rate));
  ini.set("mocap", "glitch_magnitude_m", format_double(c.glitch_magnitude_m));
  if (!c.mocap_coverage.empty()) {
    std::string cov;
    for (const auto& [lo, hi] : c.mocap_coverage) {
      if (!cov.empty()) cov += ' ';
      cov += format_double(lo);
      cov += ' ';
      cov += format_double(hi);
    }
    ini.set("mocap", "coverage", cov);
  }

  ini.set("pairs", "rot_noise_deg", format_double(c.pairs_rot_noise_deg));
  ini.set("pairs", "trans_noise_m", format_double(c.pairs_trans_noise_m));

  ini.set("exposure", "k_lux_s", format_double(c.exposure.k_lux_s));
  ini.set("exposure", "t_min_s", format_double(c.exposure.t_min_s));
  ini.set("exposure", "t_max_s", format_double(c.exposure.t_max_s));
  ini.set("exposure", "lux_min", format_double(c.lux_min));
  ini.set("exposure", "lux_max", format_double(c.lux_max));

  ini.set("vignette", "views", format_int(c.vignette_views));
  ini.set("vignette", "image_size", format_int(c.vignette_image_size));
  ini.set("vignette", "r2", format_double(c.vignette_r2));
  ini.set("vignette", "r4", format_double(c.vignette_r4));

  ini.set("gravity", "g",
          format_double(c.gravity.x()) + " " + format_double(c.gravity.y()) +
              " " + format_double(c.gravity.z()));
  ini.save(path);
}

}  // namespace vical
