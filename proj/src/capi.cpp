#include "vical.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <utility>

#include "vical/allan.hpp"
#include "vical/core.hpp"
#include "vical/handeye.hpp"
#include "vical/imucal.hpp"
#include "vical/ingest.hpp"
#include "vical/photometric.hpp"
#include "vical/synth.hpp"
#include "vical/timesync.hpp"
#include "vical/trajeval.hpp"

namespace {

thread_local std::string g_last_error;

vical_status to_status(vical::ErrorCode code) {
  return static_cast<vical_status>(static_cast<int>(code));
}

// Runs fn, routes every failure into the status/last-error channel.
template <typename Fn>
vical_status wrap(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return VICAL_OK;
  } catch (const vical::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return VICAL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VICAL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return VICAL_ERR_INTERNAL;
  }
}

vical_status require(bool ok, const char* what) {
  if (ok) return VICAL_OK;
  g_last_error = what;
  return VICAL_ERR_INVALID_ARGUMENT;
}

void pose_to_array(const vical::RigidMotion& pose, double out[7]) {
  out[0] = pose.translation.x();
  out[1] = pose.translation.y();
  out[2] = pose.translation.z();
  out[3] = pose.rotation.w();
  out[4] = pose.rotation.x();
  out[5] = pose.rotation.y();
  out[6] = pose.rotation.z();
}

vical::RigidMotion pose_from_array(const double in[7]) {
  vical::RigidMotion pose;
  pose.translation = {in[0], in[1], in[2]};
  pose.rotation = Eigen::Quaterniond(in[3], in[4], in[5], in[6]);
  if (std::abs(pose.rotation.norm() - 1.0) > 1e-2) {
    vical::fail(vical::ErrorCode::norm, "pose quaternion far from unit norm");
  }
  pose.canonicalize();
  return pose;
}

std::array<bool, 3> axes_from_mask(unsigned mask) {
  if (mask == 0 || mask > 7) {
    vical::fail(vical::ErrorCode::invalid_argument,
                "axis mask must be in [1, 7]");
  }
  return {(mask & 1u) != 0, (mask & 2u) != 0, (mask & 4u) != 0};
}

}  // namespace

struct vical_imu_series {
  std::vector<vical::ImuSample> samples;
};
struct vical_trajectory {
  vical::Trajectory traj;
};
struct vical_calibration {
  vical::CalibrationFile calib;
};
struct vical_allan_curves {
  vical::ImuAllanCurves curves;
};
struct vical_offset_estimate {
  vical::OffsetEstimate estimate;
};
struct vical_pose_pairs {
  std::vector<vical::PosePair> pairs;
};
struct vical_handeye_result {
  vical::HandEyeSolution solution;
};
struct vical_image {
  vical::ImageF image;
};
struct vical_eval_report {
  vical::EvalReport report;
};

extern "C" {

int vical_status_class(vical_status status) {
  return vical::error_class(static_cast<vical::ErrorCode>(status));
}

const char* vical_last_error(void) { return g_last_error.c_str(); }

const char* vical_version(void) { return "0.1.0"; }

/* ------------------------------------------------------------------ */

vical_status vical_imu_load(const char* path, vical_imu_series** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap([&] { *out = new vical_imu_series{vical::load_imu(path)}; });
}

vical_status vical_imu_save(const vical_imu_series* imu, const char* path) {
  if (auto s = require(imu && path, "null argument")) return s;
  return wrap([&] { vical::write_imu(imu->samples, path); });
}

size_t vical_imu_count(const vical_imu_series* imu) {
  return imu ? imu->samples.size() : 0;
}

void vical_imu_sample(const vical_imu_series* imu, size_t index, int64_t* t_ns,
                      double gyro[3], double accel[3], double* temp_c) {
  if (!imu || index >= imu->samples.size()) return;
  const auto& s = imu->samples[index];
  if (t_ns) *t_ns = s.t;
  for (int i = 0; i < 3; ++i) {
    if (gyro) gyro[i] = s.gyro[i];
    if (accel) accel[i] = s.accel[i];
  }
  if (temp_c) *temp_c = s.temp_c.value_or(std::nan(""));
}

vical_status vical_imu_apply_intrinsics(const vical_imu_series* imu,
                                        const vical_calibration* calib,
                                        vical_imu_series** out) {
  if (auto s = require(imu && calib && out, "null argument")) return s;
  return wrap([&] {
    auto result = std::make_unique<vical_imu_series>();
    result->samples.reserve(imu->samples.size());
    for (const auto& sample : imu->samples) {
      result->samples.push_back(
          vical::apply_calibration(sample, calib->calib.intrinsics));
    }
    *out = result.release();
  });
}

void vical_imu_free(vical_imu_series* imu) { delete imu; }

/* ------------------------------------------------------------------ */

vical_status vical_trajectory_load(const char* path, vical_trajectory** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap([&] { *out = new vical_trajectory{vical::load_mocap(path)}; });
}

vical_status vical_trajectory_save(const vical_trajectory* traj,
                                   const char* path) {
  if (auto s = require(traj && path, "null argument")) return s;
  return wrap([&] { vical::write_mocap(traj->traj, path); });
}

size_t vical_trajectory_count(const vical_trajectory* traj) {
  return traj ? traj->traj.size() : 0;
}

void vical_trajectory_sample(const vical_trajectory* traj, size_t index,
                             int64_t* t_ns, double pose[7]) {
  if (!traj || index >= traj->traj.size()) return;
  const auto& s = traj->traj.samples[index];
  if (t_ns) *t_ns = s.t;
  if (pose) pose_to_array(s.pose, pose);
}

void vical_trajectory_free(vical_trajectory* traj) { delete traj; }

/* ------------------------------------------------------------------ */

vical_status vical_calibration_create(vical_calibration** out) {
  if (auto s = require(out != nullptr, "null argument")) return s;
  return wrap([&] { *out = new vical_calibration{}; });
}

vical_status vical_calibration_load(const char* path, vical_calibration** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap(
      [&] { *out = new vical_calibration{vical::load_calibration(path)}; });
}

vical_status vical_calibration_load_or_default(const char* path,
                                               vical_calibration** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap([&] {
    *out = new vical_calibration{vical::load_calibration_or_default(path)};
  });
}

vical_status vical_calibration_save(const vical_calibration* calib,
                                    const char* path) {
  if (auto s = require(calib && path, "null argument")) return s;
  return wrap([&] { vical::write_calibration(calib->calib, path); });
}

void vical_calibration_free(vical_calibration* calib) { delete calib; }

void vical_calibration_get_matrix(const vical_calibration* calib,
                                  vical_imu_channel channel, double m[9]) {
  if (!calib || !m) return;
  const Eigen::Matrix3d& src = channel == VICAL_CHANNEL_GYRO
                                   ? calib->calib.intrinsics.M_g
                                   : calib->calib.intrinsics.M_a;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[3 * r + c] = src(r, c);
}

vical_status vical_calibration_set_matrix(vical_calibration* calib,
                                          vical_imu_channel channel,
                                          const double m[9]) {
  if (auto s = require(calib && m, "null argument")) return s;
  return wrap([&] {
    Eigen::Matrix3d dst;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) dst(r, c) = m[3 * r + c];
    vical::ImuIntrinsics candidate = calib->calib.intrinsics;
    (channel == VICAL_CHANNEL_GYRO ? candidate.M_g : candidate.M_a) = dst;
    candidate.validate();
    calib->calib.intrinsics = candidate;
  });
}

void vical_calibration_get_bias(const vical_calibration* calib,
                                vical_imu_channel channel, double v[3]) {
  if (!calib || !v) return;
  const Eigen::Vector3d& src = channel == VICAL_CHANNEL_GYRO
                                   ? calib->calib.intrinsics.b_g
                                   : calib->calib.intrinsics.b_a;
  for (int i = 0; i < 3; ++i) v[i] = src[i];
}

void vical_calibration_set_bias(vical_calibration* calib,
                                vical_imu_channel channel, const double v[3]) {
  if (!calib || !v) return;
  Eigen::Vector3d& dst = channel == VICAL_CHANNEL_GYRO
                             ? calib->calib.intrinsics.b_g
                             : calib->calib.intrinsics.b_a;
  dst = {v[0], v[1], v[2]};
}

void vical_calibration_get_t_mi(const vical_calibration* calib,
                                double pose[7]) {
  if (calib && pose) pose_to_array(calib->calib.T_MI, pose);
}

vical_status vical_calibration_set_t_mi(vical_calibration* calib,
                                        const double pose[7]) {
  if (auto s = require(calib && pose, "null argument")) return s;
  return wrap([&] { calib->calib.T_MI = pose_from_array(pose); });
}

void vical_calibration_get_t_wg(const vical_calibration* calib,
                                double pose[7]) {
  if (calib && pose) pose_to_array(calib->calib.T_WG, pose);
}

vical_status vical_calibration_set_t_wg(vical_calibration* calib,
                                        const double pose[7]) {
  if (auto s = require(calib && pose, "null argument")) return s;
  return wrap([&] { calib->calib.T_WG = pose_from_array(pose); });
}

void vical_calibration_get_time_shift(const vical_calibration* calib,
                                      int64_t* cam_imu_ns,
                                      int64_t* mocap_imu_ns) {
  if (!calib) return;
  if (cam_imu_ns) *cam_imu_ns = calib->calib.cam_imu_shift_ns;
  if (mocap_imu_ns) *mocap_imu_ns = calib->calib.mocap_imu_shift_ns;
}

vical_status vical_calibration_set_time_shift(vical_calibration* calib,
                                              int64_t cam_imu_ns,
                                              int64_t mocap_imu_ns) {
  if (auto s = require(calib != nullptr, "null argument")) return s;
  return wrap([&] {
    if (std::abs(cam_imu_ns) >= 1'000'000'000 ||
        std::abs(mocap_imu_ns) >= 1'000'000'000) {
      vical::fail(vical::ErrorCode::out_of_range,
                  "time shift magnitude must be below 1 s");
    }
    calib->calib.cam_imu_shift_ns = cam_imu_ns;
    calib->calib.mocap_imu_shift_ns = mocap_imu_ns;
  });
}

void vical_calibration_get_noise(const vical_calibration* calib,
                                 vical_imu_channel channel, double* sigma_w,
                                 double* sigma_b) {
  if (!calib) return;
  const vical::NoiseDensities& n = channel == VICAL_CHANNEL_GYRO
                                       ? calib->calib.gyro_noise
                                       : calib->calib.accel_noise;
  if (sigma_w) *sigma_w = n.sigma_w;
  if (sigma_b) *sigma_b = n.sigma_b;
}

void vical_calibration_set_noise(vical_calibration* calib,
                                 vical_imu_channel channel, double sigma_w,
                                 double sigma_b) {
  if (!calib) return;
  vical::NoiseDensities& n = channel == VICAL_CHANNEL_GYRO
                                 ? calib->calib.gyro_noise
                                 : calib->calib.accel_noise;
  n.sigma_w = sigma_w;
  n.sigma_b = sigma_b;
}

int vical_calibration_get_exposure(const vical_calibration* calib, double* k,
                                   double* t_min_s, double* t_max_s) {
  if (!calib || !calib->calib.exposure) return 0;
  if (k) *k = calib->calib.exposure->k_lux_s;
  if (t_min_s) *t_min_s = calib->calib.exposure->t_min_s;
  if (t_max_s) *t_max_s = calib->calib.exposure->t_max_s;
  return 1;
}

vical_status vical_calibration_set_exposure(vical_calibration* calib, double k,
                                            double t_min_s, double t_max_s) {
  if (auto s = require(calib != nullptr, "null argument")) return s;
  return wrap([&] {
    if (!(k > 0.0) || !(t_min_s > 0.0) || !(t_max_s > t_min_s)) {
      vical::fail(vical::ErrorCode::invalid_argument,
                  "need k > 0 and 0 < t_min < t_max");
    }
    calib->calib.exposure = vical::ExposureModel{k, t_min_s, t_max_s};
  });
}

/* ------------------------------------------------------------------ */

vical_status vical_allan_compute(const vical_imu_series* imu,
                                 vical_imu_channel channel,
                                 vical_allan_curves** out) {
  if (auto s = require(imu && out, "null argument")) return s;
  return wrap([&] {
    *out = new vical_allan_curves{vical::compute_imu_allan(
        imu->samples, channel == VICAL_CHANNEL_GYRO
                          ? vical::ImuChannel::gyro
                          : vical::ImuChannel::accel)};
  });
}

size_t vical_allan_count(const vical_allan_curves* curves) {
  return curves ? curves->curves.mean.size() : 0;
}

void vical_allan_row(const vical_allan_curves* curves, size_t index,
                     double* tau_s, double dev_xyz[3], double* dev_mean,
                     uint64_t* pairs) {
  if (!curves || index >= curves->curves.mean.size()) return;
  if (tau_s) *tau_s = curves->curves.mean.tau[index];
  if (dev_xyz) {
    for (int a = 0; a < 3; ++a) dev_xyz[a] = curves->curves.axis[a].dev[index];
  }
  if (dev_mean) *dev_mean = curves->curves.mean.dev[index];
  if (pairs) *pairs = curves->curves.mean.counts[index];
}

vical_status vical_allan_fit_white_noise(const vical_allan_curves* curves,
                                         unsigned axis_mask, double tau_lo_s,
                                         double tau_hi_s, double* sigma_w) {
  if (auto s = require(curves && sigma_w, "null argument")) return s;
  return wrap([&] {
    const vical::AllanCurve avg =
        vical::average_axes(curves->curves, axes_from_mask(axis_mask));
    *sigma_w = vical::fit_white_noise(avg, tau_lo_s, tau_hi_s);
  });
}

vical_status vical_allan_fit_bias_rw(const vical_allan_curves* curves,
                                     unsigned axis_mask, double tau_lo_s,
                                     double tau_hi_s, double* sigma_b) {
  if (auto s = require(curves && sigma_b, "null argument")) return s;
  return wrap([&] {
    const vical::AllanCurve avg =
        vical::average_axes(curves->curves, axes_from_mask(axis_mask));
    *sigma_b = vical::fit_bias_rw(avg, tau_lo_s, tau_hi_s);
  });
}

vical_status vical_allan_write_csv(const vical_allan_curves* curves,
                                   const char* path) {
  if (auto s = require(curves && path, "null argument")) return s;
  return wrap([&] { vical::write_allan_csv(curves->curves, path); });
}

void vical_allan_free(vical_allan_curves* curves) { delete curves; }

/* ------------------------------------------------------------------ */

vical_status vical_time_align(const vical_imu_series* imu,
                              const vical_trajectory* mocap, int64_t step_ns,
                              int64_t half_window_ns,
                              vical_offset_estimate** out) {
  if (auto s = require(imu && mocap && out, "null argument")) return s;
  return wrap([&] {
    vical::TimeSyncParams params;
    if (step_ns > 0) params.step_ns = step_ns;
    if (half_window_ns > 0) params.half_window_ns = half_window_ns;
    auto result = vical::time_align(imu->samples, mocap->traj, params);
    *out = new vical_offset_estimate{std::move(result.estimate)};
  });
}

double vical_offset_ns(const vical_offset_estimate* est) {
  return est ? est->estimate.offset_ns : 0.0;
}

size_t vical_offset_cost_count(const vical_offset_estimate* est) {
  return est ? est->estimate.cost_curve.size() : 0;
}

void vical_offset_cost_row(const vical_offset_estimate* est, size_t index,
                           int64_t* offset_ns, double* cost) {
  if (!est || index >= est->estimate.cost_curve.size()) return;
  if (offset_ns) *offset_ns = est->estimate.cost_curve[index].first;
  if (cost) *cost = est->estimate.cost_curve[index].second;
}

vical_status vical_offset_write_cost_csv(const vical_offset_estimate* est,
                                         const char* path) {
  if (auto s = require(est && path, "null argument")) return s;
  return wrap([&] {
    std::string out = "#offset_ns,cost\n";
    for (const auto& [offset, cost] : est->estimate.cost_curve) {
      out += vical::format_int(offset);
      out += ',';
      out += vical::format_double(cost);
      out += '\n';
    }
    vical::write_file(path, out);
  });
}

void vical_offset_free(vical_offset_estimate* est) { delete est; }

/* ------------------------------------------------------------------ */

vical_status vical_pose_pairs_load(const char* path, vical_pose_pairs** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap([&] { *out = new vical_pose_pairs{vical::load_pairs(path)}; });
}

size_t vical_pose_pairs_count(const vical_pose_pairs* pairs) {
  return pairs ? pairs->pairs.size() : 0;
}

void vical_pose_pairs_free(vical_pose_pairs* pairs) { delete pairs; }

vical_status vical_handeye_solve(const vical_pose_pairs* pairs,
                                 vical_handeye_result** out) {
  if (auto s = require(pairs && out, "null argument")) return s;
  return wrap([&] {
    vical::HandEyeProblem problem;
    problem.pairs = pairs->pairs;
    *out = new vical_handeye_result{vical::solve_handeye(problem)};
  });
}

void vical_handeye_get(const vical_handeye_result* result, double t_mi[7],
                       double t_wg[7], double* rms_residual, int* iterations,
                       int* converged) {
  if (!result) return;
  if (t_mi) pose_to_array(result->solution.T_MI, t_mi);
  if (t_wg) pose_to_array(result->solution.T_WG, t_wg);
  if (rms_residual) *rms_residual = result->solution.rms_residual;
  if (iterations) *iterations = result->solution.iterations;
  if (converged) *converged = result->solution.converged ? 1 : 0;
}

void vical_handeye_free(vical_handeye_result* result) { delete result; }

/* ------------------------------------------------------------------ */

vical_status vical_estimate_imu_intrinsics(const vical_imu_series* imu,
                                           const vical_trajectory* mocap,
                                           vical_calibration* calib,
                                           double* gyro_rms, double* accel_rms,
                                           size_t* pairs) {
  if (auto s = require(imu && mocap && calib, "null argument")) return s;
  return wrap([&] {
    const vical::IntrinsicsEstimate est = vical::estimate_intrinsics_from_mocap(
        imu->samples, mocap->traj, calib->calib.T_MI,
        calib->calib.mocap_imu_shift_ns);
    calib->calib.intrinsics = est.intrinsics;
    if (gyro_rms) *gyro_rms = est.gyro_rms;
    if (accel_rms) *accel_rms = est.accel_rms;
    if (pairs) *pairs = est.pairs;
  });
}

/* ------------------------------------------------------------------ */

vical_status vical_image_load_pgm(const char* path, vical_image** out) {
  if (auto s = require(path && out, "null argument")) return s;
  return wrap([&] { *out = new vical_image{vical::load_pgm16(path)}; });
}

vical_status vical_image_save_pgm(const vical_image* image, const char* path) {
  if (auto s = require(image && path, "null argument")) return s;
  return wrap([&] { vical::write_pgm16(image->image, path); });
}

void vical_image_size(const vical_image* image, int* width, int* height) {
  if (!image) return;
  if (width) *width = image->image.width;
  if (height) *height = image->image.height;
}

double vical_image_pixel(const vical_image* image, int x, int y) {
  if (!image || x < 0 || y < 0 || x >= image->image.width ||
      y >= image->image.height) {
    return std::nan("");
  }
  return image->image.at(x, y);
}

void vical_image_free(vical_image* image) { delete image; }

vical_status vical_vignette_estimate(const char* images_dir,
                                     vical_image** vignette, int* iterations,
                                     int* converged) {
  if (auto s = require(images_dir && vignette, "null argument")) return s;
  return wrap([&] {
    const vical::VignetteViews views = vical::load_vignette_views(images_dir);
    vical::VignetteSolution sol =
        vical::estimate_vignette(views.images, views.views);
    if (iterations) *iterations = sol.iterations;
    if (converged) *converged = sol.converged ? 1 : 0;
    *vignette = new vical_image{std::move(sol.vignette)};
  });
}

vical_status vical_exposure_fit(const char* exposures_csv, double t_min_s,
                                double t_max_s, double* k_lux_s, size_t* used,
                                size_t* excluded) {
  if (auto s = require(exposures_csv && k_lux_s, "null argument")) return s;
  return wrap([&] {
    const auto records = vical::load_exposures(exposures_csv);
    std::vector<std::pair<double, double>> samples;
    for (const auto& r : records) {
      if (!r.lux) continue;
      samples.emplace_back(*r.lux, static_cast<double>(r.exposure_ns) * 1e-9);
    }
    const vical::ExposureFit fit =
        vical::fit_exposure_control(samples, t_min_s, t_max_s);
    *k_lux_s = fit.k_lux_s;
    if (used) *used = fit.used;
    if (excluded) *excluded = fit.excluded;
  });
}

/* ------------------------------------------------------------------ */

vical_status vical_evaluate(const vical_trajectory* gt,
                            const vical_trajectory* est, double delta_s,
                            double max_gap_s, double seg_gap_s,
                            vical_eval_report** out) {
  if (auto s = require(gt && est && out, "null argument")) return s;
  return wrap([&] {
    vical::EvalParams params;
    if (delta_s > 0) params.delta_s = delta_s;
    if (max_gap_s > 0) params.max_gap_s = max_gap_s;
    if (seg_gap_s > 0) params.gap_threshold_s = seg_gap_s;
    *out = new vical_eval_report{
        vical::evaluate_trajectories(gt->traj, est->traj, params)};
  });
}

double vical_eval_ate(const vical_eval_report* report) {
  return report ? report->report.ate_m : std::nan("");
}

void vical_eval_rpe(const vical_eval_report* report, double* trans_m,
                    double* rot_deg, size_t* intervals) {
  if (!report) return;
  if (trans_m) *trans_m = report->report.rpe_trans_m;
  if (rot_deg) *rot_deg = report->report.rpe_rot_deg;
  if (intervals) *intervals = report->report.rpe_intervals;
}

int vical_eval_diverged(const vical_eval_report* report) {
  return report && report->report.diverged ? 1 : 0;
}

double vical_eval_length(const vical_eval_report* report) {
  return report ? report->report.length_m : std::nan("");
}

size_t vical_eval_pairs(const vical_eval_report* report) {
  return report ? report->report.associated_pairs : 0;
}

int vical_eval_segments(const vical_eval_report* report) {
  return report ? report->report.segments : 0;
}

size_t vical_eval_segment_count(const vical_eval_report* report) {
  return report ? report->report.segment_ate_m.size() : 0;
}

double vical_eval_segment_ate(const vical_eval_report* report, size_t index) {
  if (!report || index >= report->report.segment_ate_m.size()) {
    return std::nan("");
  }
  return report->report.segment_ate_m[index];
}

void vical_eval_free(vical_eval_report* report) { delete report; }

/* ------------------------------------------------------------------ */

vical_status vical_simulate(const char* config_path, uint64_t seed_override,
                            const char* out_dir) {
  if (auto s = require(config_path && out_dir, "null argument")) return s;
  return wrap([&] {
    vical::RigConfig config = vical::load_rig_config(config_path);
    if (seed_override != 0) config.seed = seed_override;
    vical::emit_dataset(vical::make_trajectory(config), out_dir);
  });
}

vical_status vical_write_default_rig_config(const char* path) {
  if (auto s = require(path != nullptr, "null argument")) return s;
  return wrap([&] {
    vical::write_rig_config(vical::default_rig_config(), path);
  });
}

}  // extern "C"
