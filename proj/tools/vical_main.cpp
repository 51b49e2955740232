// vical command line: simulate -> allan -> timesync -> handeye -> imu-calib
// -> vignette / exposure-fit -> evaluate, each stage reading and updating a
// shared calib.txt. Talks to the library exclusively through the C API.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vical.h"

namespace {

// exits the command by throwing; main converts to the process exit code
struct CommandFailure {
  int exit_code;
};

void check(vical_status status) {
  if (status == VICAL_OK) return;
  std::fprintf(stderr, "error: %s\n", vical_last_error());
  throw CommandFailure{vical_status_class(status)};
}

void fail_usage(const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  throw CommandFailure{1};
}

void print_kv(const char* key, const std::string& value) {
  std::printf("%s=%s\n", key, value.c_str());
}

void print_kv(const char* key, double value) {
  std::printf("%s=%.12g\n", key, value);
}

void print_kv(const char* key, std::int64_t value) {
  std::printf("%s=%" PRId64 "\n", key, value);
}

std::string pose_text(const double pose[7]) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g %.9g %.9g %.9g",
                pose[0], pose[1], pose[2], pose[3], pose[4], pose[5], pose[6]);
  return buf;
}

template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, decltype([](T* p) { Free(p); })>;

using ImuHandle = Handle<vical_imu_series, vical_imu_free>;
using TrajHandle = Handle<vical_trajectory, vical_trajectory_free>;
using CalibHandle = Handle<vical_calibration, vical_calibration_free>;
using AllanHandle = Handle<vical_allan_curves, vical_allan_free>;
using OffsetHandle = Handle<vical_offset_estimate, vical_offset_free>;
using PairsHandle = Handle<vical_pose_pairs, vical_pose_pairs_free>;
using HandEyeHandle = Handle<vical_handeye_result, vical_handeye_free>;
using ImageHandle = Handle<vical_image, vical_image_free>;
using EvalHandle = Handle<vical_eval_report, vical_eval_free>;

ImuHandle load_imu(const std::string& path) {
  vical_imu_series* raw = nullptr;
  check(vical_imu_load(path.c_str(), &raw));
  return ImuHandle(raw);
}

TrajHandle load_traj(const std::string& path) {
  vical_trajectory* raw = nullptr;
  check(vical_trajectory_load(path.c_str(), &raw));
  return TrajHandle(raw);
}

CalibHandle load_calib_or_default(const std::string& path) {
  vical_calibration* raw = nullptr;
  check(vical_calibration_load_or_default(path.c_str(), &raw));
  return CalibHandle(raw);
}

unsigned parse_axis_mask(const std::string& axes) {
  unsigned mask = 0;
  for (char c : axes) {
    if (c == 'x') mask |= 1u;
    else if (c == 'y') mask |= 2u;
    else if (c == 'z') mask |= 4u;
    else fail_usage("axis list may only contain x, y, z");
  }
  if (mask == 0) fail_usage("axis list is empty");
  return mask;
}

// ---------------------------------------------------------------------------

struct GlobalOptions {
  bool verbose = false;
  std::uint64_t seed = 0;
};

void run_simulate(const GlobalOptions& global, const std::string& config,
                  const std::string& out_dir, bool write_default) {
  if (write_default) {
    check(vical_write_default_rig_config(config.c_str()));
    print_kv("config_written", config);
    return;
  }
  check(vical_simulate(config.c_str(), global.seed, out_dir.c_str()));
  print_kv("dataset", out_dir);
  if (global.verbose) {
    std::fprintf(stderr, "simulated dataset written to %s\n", out_dir.c_str());
  }
}

void run_allan(const std::string& dataset, const std::string& calib_path,
               const std::string& out_csv, bool fit,
               const std::string& channel, double white_lo, double white_hi,
               double rw_lo, double rw_hi, const std::string& white_axes,
               const std::string& rw_axes) {
  const ImuHandle imu = load_imu(dataset + "/imu.csv");
  print_kv("samples", static_cast<std::int64_t>(vical_imu_count(imu.get())));

  const bool both = channel == "both";
  CalibHandle calib = load_calib_or_default(calib_path);
  for (const char* name : {"gyro", "accel"}) {
    if (!both && channel != name) continue;
    const vical_imu_channel ch = std::string(name) == "gyro"
                                     ? VICAL_CHANNEL_GYRO
                                     : VICAL_CHANNEL_ACCEL;
    vical_allan_curves* raw = nullptr;
    check(vical_allan_compute(imu.get(), ch, &raw));
    const AllanHandle curves(raw);

    std::string path = out_csv;
    if (both) {
      const auto dot = path.rfind(".csv");
      const std::string suffix = std::string("_") + name + ".csv";
      if (dot != std::string::npos && dot + 4 == path.size()) {
        path.replace(dot, 4, suffix);
      } else {
        path += suffix;
      }
    }
    check(vical_allan_write_csv(curves.get(), path.c_str()));
    print_kv((std::string(name) + "_curve").c_str(), path);

    if (fit) {
      double sigma_w = 0.0, sigma_b = 0.0;
      check(vical_allan_fit_white_noise(curves.get(),
                                        parse_axis_mask(white_axes), white_lo,
                                        white_hi, &sigma_w));
      check(vical_allan_fit_bias_rw(curves.get(), parse_axis_mask(rw_axes),
                                    rw_lo, rw_hi, &sigma_b));
      vical_calibration_set_noise(calib.get(), ch, sigma_w, sigma_b);
      print_kv((std::string(name) + "_sigma_w").c_str(), sigma_w);
      print_kv((std::string(name) + "_sigma_b").c_str(), sigma_b);
    }
  }
  if (fit) {
    check(vical_calibration_save(calib.get(), calib_path.c_str()));
    print_kv("calib", calib_path);
  }
}

void run_timesync(const std::string& dataset, const std::string& calib_path,
                  double step_us, double window_s,
                  const std::string& dump_cost) {
  const ImuHandle raw_imu = load_imu(dataset + "/imu.csv");
  const TrajHandle mocap = load_traj(dataset + "/mocap.csv");

  // align against calibrated gyro magnitudes; with the default identity
  // intrinsics this is the raw stream, after imu-calib a second run
  // refines the offset free of axis-scaling distortion
  CalibHandle calib = load_calib_or_default(calib_path);
  vical_imu_series* calibrated = nullptr;
  check(vical_imu_apply_intrinsics(raw_imu.get(), calib.get(), &calibrated));
  const ImuHandle imu(calibrated);

  vical_offset_estimate* raw = nullptr;
  check(vical_time_align(imu.get(), mocap.get(),
                         static_cast<std::int64_t>(step_us * 1000.0),
                         static_cast<std::int64_t>(window_s * 1e9), &raw));
  const OffsetHandle est(raw);

  const double offset = vical_offset_ns(est.get());
  print_kv("offset_ns", offset);
  print_kv("offset_ms", offset * 1e-6);
  if (!dump_cost.empty()) {
    check(vical_offset_write_cost_csv(est.get(), dump_cost.c_str()));
    print_kv("cost_curve", dump_cost);
  }

  std::int64_t cam = 0, mocap_shift = 0;
  vical_calibration_get_time_shift(calib.get(), &cam, &mocap_shift);
  check(vical_calibration_set_time_shift(
      calib.get(), cam, static_cast<std::int64_t>(std::llround(offset))));
  check(vical_calibration_save(calib.get(), calib_path.c_str()));
  print_kv("calib", calib_path);
}

void run_handeye(const std::string& pairs_path, const std::string& calib_path) {
  vical_pose_pairs* raw_pairs = nullptr;
  check(vical_pose_pairs_load(pairs_path.c_str(), &raw_pairs));
  const PairsHandle pairs(raw_pairs);
  print_kv("pairs", static_cast<std::int64_t>(
                        vical_pose_pairs_count(pairs.get())));

  vical_handeye_result* raw = nullptr;
  check(vical_handeye_solve(pairs.get(), &raw));
  const HandEyeHandle result(raw);

  double t_mi[7], t_wg[7], rms = 0.0;
  int iterations = 0, converged = 0;
  vical_handeye_get(result.get(), t_mi, t_wg, &rms, &iterations, &converged);
  print_kv("t_mi", pose_text(t_mi));
  print_kv("t_wg", pose_text(t_wg));
  print_kv("rms_residual", rms);
  print_kv("iterations", static_cast<std::int64_t>(iterations));
  print_kv("converged", std::string(converged ? "true" : "false"));

  CalibHandle calib = load_calib_or_default(calib_path);
  check(vical_calibration_set_t_mi(calib.get(), t_mi));
  check(vical_calibration_set_t_wg(calib.get(), t_wg));
  check(vical_calibration_save(calib.get(), calib_path.c_str()));
  print_kv("calib", calib_path);
}

void run_imu_calib(const std::string& dataset, const std::string& calib_path) {
  const ImuHandle imu = load_imu(dataset + "/imu.csv");
  const TrajHandle mocap = load_traj(dataset + "/mocap.csv");
  CalibHandle calib = load_calib_or_default(calib_path);

  double gyro_rms = 0.0, accel_rms = 0.0;
  size_t pairs = 0;
  check(vical_estimate_imu_intrinsics(imu.get(), mocap.get(), calib.get(),
                                      &gyro_rms, &accel_rms, &pairs));
  print_kv("pairs", static_cast<std::int64_t>(pairs));
  print_kv("gyro_rms", gyro_rms);
  print_kv("accel_rms", accel_rms);
  check(vical_calibration_save(calib.get(), calib_path.c_str()));
  print_kv("calib", calib_path);
}

void run_vignette(const std::string& images_dir, const std::string& out_pgm) {
  vical_image* raw = nullptr;
  int iterations = 0, converged = 0;
  check(vical_vignette_estimate(images_dir.c_str(), &raw, &iterations,
                                &converged));
  const ImageHandle vignette(raw);
  check(vical_image_save_pgm(vignette.get(), out_pgm.c_str()));
  print_kv("vignette", out_pgm);
  print_kv("iterations", static_cast<std::int64_t>(iterations));
  print_kv("converged", std::string(converged ? "true" : "false"));
}

void run_exposure_fit(const std::string& dataset,
                      const std::string& calib_path, double t_min_s,
                      double t_max_s) {
  double k = 0.0;
  size_t used = 0, excluded = 0;
  check(vical_exposure_fit((dataset + "/exposures.csv").c_str(), t_min_s,
                           t_max_s, &k, &used, &excluded));
  print_kv("k_lux_s", k);
  print_kv("used", static_cast<std::int64_t>(used));
  print_kv("excluded_saturated", static_cast<std::int64_t>(excluded));

  CalibHandle calib = load_calib_or_default(calib_path);
  check(vical_calibration_set_exposure(calib.get(), k, t_min_s, t_max_s));
  check(vical_calibration_save(calib.get(), calib_path.c_str()));
  print_kv("calib", calib_path);
}

void run_evaluate(const std::string& gt_path, const std::string& est_path,
                  double delta_s, double max_gap_s, double seg_gap_s) {
  const TrajHandle gt = load_traj(gt_path);
  const TrajHandle est = load_traj(est_path);

  vical_eval_report* raw = nullptr;
  check(vical_evaluate(gt.get(), est.get(), delta_s, max_gap_s, seg_gap_s,
                       &raw));
  const EvalHandle report(raw);

  std::printf("ate_m=%.6f\n", vical_eval_ate(report.get()));
  double trans = 0.0, rot = 0.0;
  size_t intervals = 0;
  vical_eval_rpe(report.get(), &trans, &rot, &intervals);
  print_kv("rpe_trans_m", trans);
  print_kv("rpe_rot_deg", rot);
  print_kv("rpe_intervals", static_cast<std::int64_t>(intervals));
  print_kv("diverged", std::string(vical_eval_diverged(report.get())
                                       ? "true"
                                       : "false"));
  print_kv("length_m", vical_eval_length(report.get()));
  print_kv("segments",
           static_cast<std::int64_t>(vical_eval_segments(report.get())));
  print_kv("pairs", static_cast<std::int64_t>(vical_eval_pairs(report.get())));
  for (size_t i = 0; i < vical_eval_segment_count(report.get()); ++i) {
    char key[32];
    std::snprintf(key, sizeof(key), "segment_%zu_ate_m", i);
    print_kv(key, vical_eval_segment_ate(report.get(), i));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vical: visual-inertial calibration and evaluation toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_flag("--verbose", global.verbose, "chatty progress on stderr");
  app.add_option("--seed", global.seed,
                 "override the simulator seed (simulate only)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic rig dataset");
  std::string sim_config, sim_out = "dataset";
  bool sim_write_default = false;
  simulate->add_option("--config", sim_config, "rig config (INI)")->required();
  simulate->add_option("--out", sim_out, "output dataset directory");
  simulate->add_flag("--write-default", sim_write_default,
                     "write a default rig config to --config and exit");

  // allan
  auto* allan = app.add_subcommand("allan", "Allan deviation and noise fits");
  std::string al_dataset, al_calib, al_out = "curve.csv";
  std::string al_channel = "both", al_white_axes = "xyz", al_rw_axes = "xyz";
  bool al_fit = false;
  double al_white_lo = 0.02, al_white_hi = 1.0;
  double al_rw_lo = 1000.0, al_rw_hi = 6000.0;
  allan->add_option("--dataset", al_dataset, "dataset directory")->required();
  allan->add_option("--calib", al_calib, "calibration file (default <dataset>/calib.txt)");
  allan->add_option("--out", al_out, "curve CSV path");
  allan->add_flag("--fit", al_fit, "fit noise densities into calib.txt");
  allan->add_option("--channel", al_channel, "gyro, accel or both")
      ->check(CLI::IsMember({"gyro", "accel", "both"}));
  allan->add_option("--white-lo", al_white_lo, "white-noise fit range start [s]");
  allan->add_option("--white-hi", al_white_hi, "white-noise fit range end [s]");
  allan->add_option("--rw-lo", al_rw_lo, "random-walk fit range start [s]");
  allan->add_option("--rw-hi", al_rw_hi, "random-walk fit range end [s]");
  allan->add_option("--white-axes", al_white_axes, "axes averaged for the -1/2 fit");
  allan->add_option("--rw-axes", al_rw_axes, "axes averaged for the +1/2 fit");

  // timesync
  auto* timesync = app.add_subcommand("timesync", "MoCap-IMU time offset");
  std::string ts_dataset, ts_calib, ts_dump;
  double ts_step_us = 100.0, ts_window_s = 0.5;
  timesync->add_option("--dataset", ts_dataset, "dataset directory")->required();
  timesync->add_option("--calib", ts_calib, "calibration file (default <dataset>/calib.txt)");
  timesync->add_option("--step-us", ts_step_us, "grid step [us]");
  timesync->add_option("--window-s", ts_window_s, "half window [s]");
  timesync->add_option("--dump-cost", ts_dump, "write the cost curve CSV");

  // handeye
  auto* handeye = app.add_subcommand("handeye", "solve T_MI and T_WG");
  std::string he_pairs, he_calib = "calib.txt";
  handeye->add_option("--pairs", he_pairs, "pairs.csv")->required();
  handeye->add_option("--calib", he_calib, "calibration file");

  // imu-calib
  auto* imucal = app.add_subcommand("imu-calib", "IMU axis scaling, misalignment and biases");
  std::string ic_dataset, ic_calib;
  imucal->add_option("--dataset", ic_dataset, "dataset directory")->required();
  imucal->add_option("--calib", ic_calib, "calibration file (default <dataset>/calib.txt)");

  // vignette
  auto* vignette = app.add_subcommand("vignette", "non-parametric vignette estimate");
  std::string vg_images, vg_out = "vignette.pgm";
  vignette->add_option("--images", vg_images, "views directory")->required();
  vignette->add_option("--out", vg_out, "output 16-bit PGM");

  // exposure-fit
  auto* exposure = app.add_subcommand("exposure-fit", "illuminance to exposure-time model");
  std::string ex_dataset, ex_calib;
  double ex_tmin = 1e-4, ex_tmax = 0.02;
  exposure->add_option("--dataset", ex_dataset, "dataset directory")->required();
  exposure->add_option("--calib", ex_calib, "calibration file (default <dataset>/calib.txt)");
  exposure->add_option("--t-min-s", ex_tmin, "minimum exposure time [s]");
  exposure->add_option("--t-max-s", ex_tmax, "maximum exposure time [s]");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "ATE / RPE / divergence report");
  std::string ev_gt, ev_est;
  double ev_delta = 1.0, ev_max_gap = 0.05, ev_seg_gap = 0.5;
  evaluate->add_option("--gt", ev_gt, "ground-truth trajectory CSV")->required();
  evaluate->add_option("--est", ev_est, "estimated trajectory CSV")->required();
  evaluate->add_option("--delta-s", ev_delta, "RPE interval [s]");
  evaluate->add_option("--max-gap-s", ev_max_gap, "association gap limit [s]");
  evaluate->add_option("--seg-gap-s", ev_seg_gap, "segment split threshold [s]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage error
  }

  try {
    if (simulate->parsed()) {
      run_simulate(global, sim_config, sim_out, sim_write_default);
    } else if (allan->parsed()) {
      if (al_calib.empty()) al_calib = al_dataset + "/calib.txt";
      run_allan(al_dataset, al_calib, al_out, al_fit, al_channel, al_white_lo,
                al_white_hi, al_rw_lo, al_rw_hi, al_white_axes, al_rw_axes);
    } else if (timesync->parsed()) {
      if (ts_calib.empty()) ts_calib = ts_dataset + "/calib.txt";
      run_timesync(ts_dataset, ts_calib, ts_step_us, ts_window_s, ts_dump);
    } else if (handeye->parsed()) {
      run_handeye(he_pairs, he_calib);
    } else if (imucal->parsed()) {
      if (ic_calib.empty()) ic_calib = ic_dataset + "/calib.txt";
      run_imu_calib(ic_dataset, ic_calib);
    } else if (vignette->parsed()) {
      run_vignette(vg_images, vg_out);
    } else if (exposure->parsed()) {
      if (ex_calib.empty()) ex_calib = ex_dataset + "/calib.txt";
      run_exposure_fit(ex_dataset, ex_calib, ex_tmin, ex_tmax);
    } else if (evaluate->parsed()) {
      run_evaluate(ev_gt, ev_est, ev_delta, ev_max_gap, ev_seg_gap);
    }
  } catch (const CommandFailure& f) {
    return f.exit_code;
  }
  return 0;
}
