// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. The CLI binary under test is argv[1].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vical/allan.hpp"
#include "vical/core.hpp"
#include "vical/handeye.hpp"
#include "vical/imucal.hpp"
#include "vical/ingest.hpp"
#include "vical/photometric.hpp"
#include "vical/synth.hpp"
#include "vical/timesync.hpp"
#include "vical/trajeval.hpp"

namespace fs = std::filesystem;
using namespace vical;

namespace {

std::string g_cli;
fs::path g_work;

struct CheckFailure {
  std::string what;
};

void expect(bool ok, const std::string& what) {
  if (!ok) throw CheckFailure{what};
}

void expect_near(double got, double want, double tol, const std::string& what) {
  if (!(std::abs(got - want) <= tol)) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s: got %.12g, want %.12g +- %.3g",
                  what.c_str(), got, want, tol);
    throw CheckFailure{buf};
  }
}

void expect_rel(double got, double want, double rel, const std::string& what) {
  expect_near(got, want, rel * std::abs(want), what);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Runs the CLI, captures stdout+stderr and returns the exit code.
int run_cli_raw(const std::string& args, std::string& output) {
  const std::string cmd = g_cli + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  expect(pipe != nullptr, "popen failed");
  output.clear();
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    output.append(buf, n);
  }
  const int rc = ::pclose(pipe);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Runs the CLI, captures stdout, fails on nonzero exit.
std::string run_cli(const std::string& args) {
  std::string output;
  const int rc = run_cli_raw(args, output);
  expect(rc == 0, "CLI exited with " + std::to_string(rc) + ": " + args +
                      "\n--- output ---\n" + output);
  return output;
}

std::string kv(const std::string& output, const std::string& key) {
  const std::string needle = key + "=";
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
  }
  throw CheckFailure{"CLI output is missing '" + key + "='"};
}

// --------------------------------------------------------------------------

void criterion_allan_white_noise() {
  const auto t0 = std::chrono::steady_clock::now();
  const double sigma_w = 8.0e-5;  // rad/s/sqrt(Hz), fitted gyro value
  const double tau0 = 1.0 / 200.0;
  const double per_sample_sd = sigma_w / std::sqrt(tau0);

  std::mt19937_64 rng(618);
  std::normal_distribution<double> d(0.0, per_sample_sd);
  std::vector<double> series(10'000'000);
  for (auto& x : series) x = d(rng);

  const auto sizes = default_cluster_sizes(series.size());
  const AllanCurve curve = allan_deviation(series, tau0, sizes);
  const double fitted = fit_white_noise(curve, 0.02, 1.0);
  expect_rel(fitted, sigma_w, 0.05, "sigma_w over tau in [0.02, 1] s");

  const double elapsed = seconds_since(t0);
  expect(elapsed < 30.0,
         "runtime " + std::to_string(elapsed) + " s exceeds 30 s");
}

void criterion_allan_random_walk() {
  const double step_sd = 2.0e-6;
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> d(0.0, step_sd);
  std::vector<double> series(10'000'000);
  double acc = 0.0;
  for (auto& x : series) {
    acc += d(rng);
    x = acc;
  }
  const double tau0 = 1.0 / 200.0;

  // exact finite-n formula against the overlapping estimator
  const std::size_t ns[] = {1, 10, 100};
  const AllanCurve spot = allan_deviation(series, tau0, ns);
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = allan_rw_closed_form(ns[i], step_sd);
    const double measured = spot.dev[i] * spot.dev[i];
    expect_rel(measured, exact, 0.03,
               "estimator vs closed form at n=" + std::to_string(ns[i]));
  }

  // +1/2 log-log slope at large tau
  const auto sizes = default_cluster_sizes(series.size());
  const AllanCurve curve = allan_deviation(series, tau0, sizes);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.tau[i] < 0.5 || curve.tau[i] > 50.0) continue;
    const double x = std::log(curve.tau[i]);
    const double y = std::log(curve.dev[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  expect_near(slope, 0.5, 0.05, "random-walk log-log slope");
}

void criterion_time_sync() {
  const struct {
    std::int64_t offset_ns;
    double start_delay_s;
  } cases[] = {{-250'000'000, 0.2}, {0, 0.0}, {12'345'600, 0.0}};
  for (const auto& tc : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    RigConfig config = calib_motion_config(21);
    config.duration_s = 60.0;
    config.mocap_rot_noise_deg = 0.1;
    config.mocap_offset_ns = tc.offset_ns;
    config.mocap_start_delay_s = tc.start_delay_s;
    const GroundTruthBundle bundle = make_trajectory(config);
    const TimeAlignResult result =
        time_align(sample_imu(bundle), sample_mocap(bundle));
    expect_near(result.estimate.offset_ns,
                static_cast<double>(tc.offset_ns), 10'000.0,
                "offset " + std::to_string(tc.offset_ns) + " ns");
    const double elapsed = seconds_since(t0);
    expect(elapsed < 5.0,
           "runtime " + std::to_string(elapsed) + " s exceeds 5 s per case");
  }
}

void criterion_hand_eye() {
  std::mt19937_64 rng(31415);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_pose = [&](double trans) {
    RigidMotion m;
    Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
    q.normalize();
    m.rotation = q;
    m.translation = trans * Eigen::Vector3d(uni(rng), uni(rng), uni(rng));
    m.canonicalize();
    return m;
  };
  auto make_pairs = [&](const RigidMotion& t_mi, const RigidMotion& t_wg,
                        std::size_t count, std::uint64_t seed,
                        double rot_deg, double trans_m) {
    RigConfig c = default_rig_config(seed);
    c.T_MI = t_mi;
    c.T_WG = t_wg;
    c.duration_s = static_cast<double>(count) / c.cam_rate_hz + 1.0;
    c.pairs_rot_noise_deg = rot_deg;
    c.pairs_trans_noise_m = trans_m;
    auto pairs = sample_pairs(make_trajectory(c));
    pairs.resize(count);
    return pairs;
  };

  // noiseless, 20 pairs
  for (int trial = 0; trial < 3; ++trial) {
    const RigidMotion t_mi = random_pose(0.15);
    const RigidMotion t_wg = random_pose(1.2);
    const HandEyeSolution sol = solve_handeye(
        {make_pairs(t_mi, t_wg, 20, 600 + trial, 0.0, 0.0), {}, {}});
    expect(rotation_angle(sol.T_MI.rotation, t_mi.rotation) < 1e-9,
           "noiseless T_MI rotation");
    expect((sol.T_MI.translation - t_mi.translation).norm() < 1e-9,
           "noiseless T_MI translation");
    expect(rotation_angle(sol.T_WG.rotation, t_wg.rotation) < 1e-9,
           "noiseless T_WG rotation");
    expect((sol.T_WG.translation - t_wg.translation).norm() < 1e-9,
           "noiseless T_WG translation");
  }

  // 0.2 deg / 1 mm observation noise, 200 pairs, 20 seeded trials
  double worst_rot = 0.0, worst_trans = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const RigidMotion t_mi = random_pose(0.15);
    const RigidMotion t_wg = random_pose(1.2);
    const HandEyeSolution sol = solve_handeye(
        {make_pairs(t_mi, t_wg, 200, 700 + trial, 0.2, 1e-3), {}, {}});
    worst_rot = std::max(
        worst_rot, rotation_angle(sol.T_MI.rotation, t_mi.rotation));
    worst_trans = std::max(worst_trans,
                           (sol.T_MI.translation - t_mi.translation).norm());
  }
  expect(worst_rot < 0.1 * std::numbers::pi / 180.0,
         "noisy T_MI rotation worst " + std::to_string(worst_rot) + " rad");
  expect(worst_trans < 2e-3,
         "noisy T_MI translation worst " + std::to_string(worst_trans) + " m");
}

void criterion_imu_intrinsics() {
  std::mt19937_64 rng(141);
  std::uniform_real_distribution<double> d(-0.08, 0.08);
  RigConfig config = default_rig_config(5001);
  config.duration_s = 30.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      config.intrinsics.M_g(r, c) += d(rng);
      if (c <= r) config.intrinsics.M_a(r, c) += d(rng);
    }
    config.intrinsics.b_a[r] = 0.5 * d(rng);
    config.intrinsics.b_g[r] = 0.1 * d(rng);
  }
  const GroundTruthBundle bundle = make_trajectory(config);
  const auto raw = sample_imu(bundle);

  std::vector<Eigen::Vector3d> raw_gyro, ref_omega, raw_accel, ref_force;
  for (const auto& s : raw) {
    const double t = to_seconds(s.t);
    raw_gyro.push_back(s.gyro);
    raw_accel.push_back(s.accel);
    ref_omega.push_back(bundle.omega_body(t));
    ref_force.push_back(bundle.specific_force(t));
  }
  const GyroEstimate g = estimate_gyro_intrinsics(raw_gyro, ref_omega);
  const AccelEstimate a = estimate_accel_intrinsics(raw_accel, ref_force);
  expect((g.M_g - config.intrinsics.M_g).cwiseAbs().maxCoeff() < 1e-9,
         "M_g entries");
  expect((g.b_g - config.intrinsics.b_g).cwiseAbs().maxCoeff() < 1e-9, "b_g");
  expect((a.M_a - config.intrinsics.M_a).cwiseAbs().maxCoeff() < 1e-9,
         "M_a entries");
  expect((a.b_a - config.intrinsics.b_a).cwiseAbs().maxCoeff() < 1e-9, "b_a");
  expect(a.M_a(0, 1) == 0.0 && a.M_a(0, 2) == 0.0 && a.M_a(1, 2) == 0.0,
         "M_a upper triangle exactly zero");
}

void criterion_trajectory_metrics() {
  RigConfig config = default_rig_config(6001);
  config.duration_s = 30.0;
  const GroundTruthBundle bundle = make_trajectory(config);
  const Trajectory gt = ground_truth_trajectory(bundle);

  // ATE of a rigidly transformed copy of the ground truth
  std::mt19937_64 rng(6002);
  std::normal_distribution<double> n01(0.0, 1.0);
  RigidMotion rigid;
  rigid.rotation =
      Eigen::Quaterniond(n01(rng), n01(rng), n01(rng), n01(rng)).normalized();
  rigid.translation = {4.2, -1.7, 2.9};
  rigid.canonicalize();
  Trajectory moved = gt;
  for (auto& s : moved.samples) s.pose = compose(rigid, s.pose);
  expect(ate(associate(gt, moved)) < 1e-9, "rigid-copy ATE below 1e-9");

  // constant drift: translational RPE = |v| * delta at delta = 1 s
  const Eigen::Vector3d v(0.05, -0.02, 0.11);
  Trajectory drifted = gt;
  for (auto& s : drifted.samples) s.pose.translation += v * to_seconds(s.t);
  const RpeResult r = rpe(associate(gt, drifted), 1.0);
  expect_near(r.trans_m, v.norm(), 1e-9, "drift RPE vs |v| * delta");

  // divergence flips strictly across the 2 m end-segment threshold
  const double px[8] = {5, -5, 0, 0, 3, -3, 4, -4};
  const double py[8] = {0, 0, 5, -5, 4, -4, -3, 3};
  const double rz[8] = {1, 1, -1, -1, 1, 1, -1, -1};
  auto track_with_offset = [&](double offset) {
    AssociatedTrack track;
    track.segment_count = 2;
    for (int i = 0; i < 8; ++i) {
      AssociatedPair p;
      p.t = i * 8'333'333;
      p.gt.translation = {0.1 * px[i], 0.1 * py[i], 0.0};
      p.est = p.gt;
      p.segment = 0;
      track.pairs.push_back(p);
    }
    for (int i = 0; i < 8; ++i) {
      AssociatedPair p;
      p.t = 60'000'000'000ll + i * 8'333'333;
      p.gt.translation = {px[i], py[i], 0.0};
      p.est = p.gt;
      p.est.translation.z() += rz[i] * offset;
      p.segment = 1;
      track.pairs.push_back(p);
    }
    return track;
  };
  expect(classify_divergence(track_with_offset(2.0)) == false,
         "end-segment ATE exactly 2.0 m is not diverged (strict)");
  expect(classify_divergence(track_with_offset(2.0 + 1e-9)) == true,
         "end-segment ATE just above 2.0 m is diverged");
}

void criterion_photometric() {
  // vignette: 10 noiseless views of a random wall through a radial vignette
  const int margin = 8;
  const int img = 32;
  std::mt19937_64 rng(7001);
  std::uniform_real_distribution<double> d(0.15, 0.9);
  ImageF tex(img + margin, img + margin);
  for (double& p : tex.pix) p = d(rng);
  const ImageF truth = synthetic_vignette(img, 0.4, 0.25);

  std::vector<ViewGeometry> views;
  const int corner[4][2] = {{0, 0}, {margin, 0}, {0, margin}, {margin, margin}};
  for (int i = 0; i < 10; ++i) {
    ViewGeometry g;
    g.exposure_s = 1e-3 * (1.0 + 0.41 * i);
    g.offset_x = i < 4 ? corner[i][0] : (7 * i) % (margin + 1);
    g.offset_y = i < 4 ? corner[i][1] : (5 * i) % (margin + 1);
    views.push_back(g);
  }
  std::vector<ImageF> images;
  for (const auto& g : views) images.push_back(render_view(tex, truth, g));

  const VignetteSolution sol = estimate_vignette(images, views);
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    worst = std::max(worst, std::abs(sol.vignette.pix[i] - truth.pix[i]));
  }
  expect(worst < 1e-6, "per-pixel vignette error " + std::to_string(worst));
  for (std::size_t i = 1; i < sol.objective_history.size(); ++i) {
    expect(sol.objective_history[i] <=
               sol.objective_history[i - 1] * (1.0 + 1e-12) + 1e-18,
           "objective non-increasing at half-step " + std::to_string(i));
  }

  // exposure control fit on exact inverse-proportional data with clamps
  const double k = 0.0125;
  const double t_min = 1e-4, t_max = 5e-3;
  std::vector<std::pair<double, double>> samples;
  std::size_t clamped = 0;
  for (double lux = 0.5; lux < 400.0; lux *= 1.45) {
    double t = k / lux;
    if (t >= t_max) {
      t = t_max;
      ++clamped;
    }
    if (t <= t_min) {
      t = t_min;
      ++clamped;
    }
    samples.emplace_back(lux, t);
  }
  expect(clamped > 0, "test data exercises the clamps");
  const ExposureFit fit = fit_exposure_control(samples, t_min, t_max);
  expect_rel(fit.k_lux_s, k, 1e-9, "k from unsaturated samples");
  expect(fit.excluded == clamped, "clamped samples excluded");
}

void criterion_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path ws = g_work / "e2e";
  fs::create_directories(ws);

  // motion sequence: rich 6-DoF motion, sensor noise on, exact MoCap and
  // pairs (criteria 3 and 4 cover the noisy-observation cases)
  RigConfig motion = default_rig_config(81);
  motion.duration_s = 60.0;
  motion.mocap_offset_ns = 12'345'600;
  motion.gyro_noise = {8e-5, 2.2e-6};
  motion.accel_noise = {1.4e-3, 8.6e-5};
  std::mt19937_64 rng(82);
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      motion.intrinsics.M_g(r, c) += d(rng);
      if (c <= r) motion.intrinsics.M_a(r, c) += d(rng);
    }
    motion.intrinsics.b_a[r] = 0.3 * d(rng);
    motion.intrinsics.b_g[r] = 0.1 * d(rng);
  }
  write_rig_config(motion, ws / "motion.txt");

  // static noise log for the Allan stage: 4e6 samples, fast bias walk so
  // the +1/2 region is observable inside the log
  RigConfig still;
  still.duration_s = 20000.0;
  still.seed = 83;
  still.gyro_noise = {8e-5, 4e-5};
  still.accel_noise = {1.4e-3, 7e-4};
  still.vignette_views = 0;
  write_rig_config(still, ws / "static.txt");

  const std::string mdir = (ws / "motion_ds").string();
  const std::string sdir = (ws / "static_ds").string();
  const std::string calib_path = mdir + "/calib.txt";
  run_cli("simulate --config " + (ws / "motion.txt").string() + " --out " + mdir);
  run_cli("simulate --config " + (ws / "static.txt").string() + " --out " + sdir);

  run_cli("allan --dataset " + sdir + " --calib " + calib_path + " --out " +
          (ws / "curve.csv").string() +
          " --fit --white-lo 0.02 --white-hi 0.2 --rw-lo 20 --rw-hi 100");
  run_cli("timesync --dataset " + mdir + " --dump-cost " +
          (ws / "cost.csv").string());
  run_cli("handeye --pairs " + mdir + "/pairs.csv --calib " + calib_path);
  run_cli("imu-calib --dataset " + mdir);
  // second sync/intrinsics pass on calibrated data: the first offset is
  // biased by the axis-scaling distortion of the raw gyro magnitudes
  run_cli("timesync --dataset " + mdir);
  run_cli("imu-calib --dataset " + mdir);
  run_cli("exposure-fit --dataset " + mdir);
  run_cli("vignette --images " + mdir + "/vignette --out " +
          (ws / "vignette.pgm").string());

  // evaluate a rigidly transformed copy of the ground truth
  const Trajectory gt = load_mocap(mdir + "/gt.csv");
  Trajectory est = gt;
  RigidMotion rigid;
  rigid.rotation = so3_exp(Eigen::Vector3d(0.4, -1.1, 0.7));
  rigid.translation = {2.0, -3.0, 1.0};
  for (auto& s : est.samples) s.pose = compose(rigid, s.pose);
  write_mocap(est, ws / "est.csv");
  const std::string eval_out = run_cli("evaluate --gt " + mdir + "/gt.csv --est " +
                                       (ws / "est.csv").string());
  expect(std::stod(kv(eval_out, "ate_m")) < 1e-6, "pipeline ATE ~ 0");
  expect(kv(eval_out, "diverged") == "false", "pipeline divergence flag");

  // every recovered parameter against the injected truth
  const CalibrationFile got = load_calibration(calib_path);
  const CalibrationFile truth = load_calibration(mdir + "/truth.txt");

  expect_near(static_cast<double>(got.mocap_imu_shift_ns),
              static_cast<double>(truth.mocap_imu_shift_ns), 10'000.0,
              "MoCap-IMU offset (10 us)");
  expect(rotation_angle(got.T_MI.rotation, truth.T_MI.rotation) < 1e-9,
         "T_MI rotation (1e-9 rad)");
  expect((got.T_MI.translation - truth.T_MI.translation).norm() < 1e-9,
         "T_MI translation (1e-9 m)");
  expect(rotation_angle(got.T_WG.rotation, truth.T_WG.rotation) < 1e-9,
         "T_WG rotation (1e-9 rad)");
  expect((got.T_WG.translation - truth.T_WG.translation).norm() < 1e-9,
         "T_WG translation (1e-9 m)");

  // MoCap-differentiated references bound the intrinsics recovery
  expect((got.intrinsics.M_g - truth.intrinsics.M_g).cwiseAbs().maxCoeff() <
             2e-3,
         "M_g entries (2e-3)");
  expect((got.intrinsics.b_g - truth.intrinsics.b_g).cwiseAbs().maxCoeff() <
             2e-4,
         "b_g (2e-4 rad/s)");
  expect((got.intrinsics.M_a - truth.intrinsics.M_a).cwiseAbs().maxCoeff() <
             5e-3,
         "M_a entries (5e-3)");
  expect((got.intrinsics.b_a - truth.intrinsics.b_a).cwiseAbs().maxCoeff() <
             5e-2,
         "b_a (5e-2 m/s^2)");

  expect_rel(got.gyro_noise.sigma_w, 8e-5, 0.05, "gyro sigma_w (5%)");
  expect_rel(got.accel_noise.sigma_w, 1.4e-3, 0.05, "accel sigma_w (5%)");
  expect_rel(got.gyro_noise.sigma_b, 4e-5, 0.10, "gyro sigma_b (10%)");
  expect_rel(got.accel_noise.sigma_b, 7e-4, 0.10, "accel sigma_b (10%)");

  expect(got.exposure.has_value(), "exposure model stored");
  expect_rel(got.exposure->k_lux_s, truth.exposure->k_lux_s, 1e-5,
             "exposure k (1e-5 relative, ns-quantized log)");

  // CLI contract spot checks: self-evaluation prints a zero ATE with exit
  // code 0; a missing dataset is a data error (exit 2) naming the file
  {
    std::string out;
    expect(run_cli_raw("evaluate --gt " + mdir + "/gt.csv --est " + mdir +
                           "/gt.csv",
                       out) == 0,
           "self-evaluation exit code");
    expect(out.find("ate_m=0.000000") != std::string::npos,
           "self-evaluation prints ate_m=0.000000");
    const int rc =
        run_cli_raw("timesync --dataset " + (ws / "missing").string(), out);
    expect(rc == 2, "missing dataset exit code, got " + std::to_string(rc));
    expect(out.find("imu.csv") != std::string::npos,
           "missing-dataset message names the file");
  }

  // vignette against the stored truth, 16-bit quantization in both paths
  const ImageF vignette = load_pgm16(ws / "vignette.pgm");
  const ImageF vtruth = load_pgm16(mdir + "/vignette/vignette_true.pgm");
  double worst = 0.0;
  for (std::size_t i = 0; i < vtruth.size(); ++i) {
    worst = std::max(worst, std::abs(vignette.pix[i] - vtruth.pix[i]));
  }
  expect(worst < 5e-4,
         "vignette per-pixel error " + std::to_string(worst) + " (5e-4)");

  const double elapsed = seconds_since(t0);
  expect(elapsed < 180.0,
         "pipeline runtime " + std::to_string(elapsed) + " s exceeds 3 min");
}

void criterion_format_robustness() {
  std::mt19937_64 rng(20260809);
  const char* prefixes[] = {
      "#t_ns,gx,gy,gz,ax,ay,az,temp_c\n",
      "#t_ns,gx,gy,gz,ax,ay,az,temp_c\n100,1,2,3,4,5,6,\n",
      "#t_ns,tx,ty,tz,qw,qx,qy,qz\n",
      "#t_ns,exposure_ns,lux\n",
      "[M_a]\nm = 1 0 0 0 1 0 0 0 1\n",
      "P5\n4 4\n65535\n",
  };
  std::uniform_int_distribution<int> byte_d(0, 255);
  std::uniform_int_distribution<std::size_t> len_d(0, 200);

  std::size_t inputs = 0;
  std::size_t crashes = 0;
  auto attempt = [&](auto&& fn) {
    ++inputs;
    try {
      fn();
    } catch (const Error&) {
      // typed failure: exactly what the criterion asks for
    } catch (...) {
      ++crashes;
    }
  };
  for (int round = 0; round < 18000; ++round) {
    std::string input;
    if (round % 3 == 0) {
      input.resize(len_d(rng));
    } else {
      input = prefixes[rng() % std::size(prefixes)];
      input.resize(input.size() + len_d(rng));
    }
    for (std::size_t i = input.size() > 40 ? input.size() - 40 : 0;
         i < input.size(); ++i) {
      input[i] = static_cast<char>(byte_d(rng));
    }
    attempt([&] { parse_imu_csv(input); });
    attempt([&] { parse_mocap_csv(input); });
    attempt([&] { parse_exposures_csv(input); });
    attempt([&] { parse_pairs_csv(input); });
    attempt([&] { parse_calibration(input); });
    attempt([&] { parse_rig_config(input); });
    attempt([&] { parse_pgm16(input); });
  }
  expect(inputs >= 100'000, "at least 1e5 fuzz inputs, ran " +
                                std::to_string(inputs));
  expect(crashes == 0, std::to_string(crashes) + " untyped failures");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-vical-cli>\n");
    return 2;
  }
  g_cli = argv[1];
  g_work = fs::temp_directory_path() /
           ("vical_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_work);

  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"Allan white noise: sigma_w = 8e-5 within 5% over 1e7 samples",
       criterion_allan_white_noise},
      {"Allan random walk: closed form within 3%, slope +0.5 +- 0.05",
       criterion_allan_random_walk},
      {"Time sync: {-250 ms, 0, +12.3456 ms} within 10 us",
       criterion_time_sync},
      {"Hand-eye: noiseless 1e-9; 0.2 deg/1 mm noise within 0.1 deg/2 mm",
       criterion_hand_eye},
      {"IMU intrinsics: noiseless closed loop within 1e-9",
       criterion_imu_intrinsics},
      {"Trajectory metrics: ATE invariance, drift RPE, 2 m divergence flip",
       criterion_trajectory_metrics},
      {"Photometric: vignette < 1e-6, monotone objective, exposure k",
       criterion_photometric},
      {"End to end: CLI pipeline recovers truth.txt within tolerances",
       criterion_end_to_end},
      {"Format robustness: >= 1e5 fuzz inputs, typed errors only",
       criterion_format_robustness},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = true;
    try {
      criteria[i].second();
    } catch (const CheckFailure& f) {
      pass = false;
      detail = f.what;
    } catch (const std::exception& e) {
      pass = false;
      detail = std::string("unexpected exception: ") + e.what();
    }
    std::printf("%s  criterion %zu: %s (%.1f s)%s%s\n",
                pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                seconds_since(t0), detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }

  std::error_code ec;
  fs::remove_all(g_work, ec);
  if (failures > 0) {
    std::printf("%d of %zu criteria FAILED\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
