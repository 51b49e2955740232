/*
 * vical - visual-inertial calibration and evaluation toolkit, C API.
 *
 * All entry points return a vical_status; VICAL_OK (0) means success.
 * On failure, vical_last_error() returns a thread-local human-readable
 * message describing what went wrong.
 *
 * Objects are opaque handles created by the vical_*_load / compute
 * functions and released with the matching vical_*_free (all free
 * functions accept NULL). Handles are not thread-safe individually, but
 * distinct handles may be used from distinct threads freely.
 *
 * Poses are passed as double[7] in the order tx ty tz qw qx qy qz
 * (Hamilton quaternion, w first). 3x3 matrices are row-major double[9].
 */

#ifndef VICAL_H
#define VICAL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vical_status {
  VICAL_OK = 0,

  /* usage errors */
  VICAL_ERR_INVALID_ARGUMENT = 10,
  VICAL_ERR_BAD_WINDOW = 11,

  /* data errors */
  VICAL_ERR_IO = 100,
  VICAL_ERR_PARSE = 101,
  VICAL_ERR_MONOTONICITY = 102,
  VICAL_ERR_NORM = 103,
  VICAL_ERR_MISSING_SECTION = 104,
  VICAL_ERR_OUT_OF_RANGE = 105,
  VICAL_ERR_EMPTY_INPUT = 106,
  VICAL_ERR_EMPTY_RANGE = 107,
  VICAL_ERR_INSUFFICIENT_DATA = 108,
  VICAL_ERR_NO_OVERLAP = 109,
  VICAL_ERR_MISSING_CORRESPONDENCE = 110,
  VICAL_ERR_UNOBSERVED_PIXEL = 111,
  VICAL_ERR_ALL_SATURATED = 112,

  /* numerical failures */
  VICAL_ERR_NO_SIGNAL = 200,
  VICAL_ERR_BOUNDARY_MINIMUM = 201,
  VICAL_ERR_DEGENERATE = 202,
  VICAL_ERR_NO_CONVERGENCE = 203,
  VICAL_ERR_SINGULAR = 204,

  VICAL_ERR_INTERNAL = 500
} vical_status;

/* 0 = ok, 1 = usage, 2 = data, 3 = numerical. Matches the CLI exit codes. */
int vical_status_class(vical_status status);

const char* vical_last_error(void);
const char* vical_version(void);

/* ------------------------------------------------------------------ */
/* IMU series (imu.csv)                                                */

typedef struct vical_imu_series vical_imu_series;
typedef struct vical_calibration vical_calibration;

vical_status vical_imu_load(const char* path, vical_imu_series** out);
vical_status vical_imu_save(const vical_imu_series* imu, const char* path);
size_t vical_imu_count(const vical_imu_series* imu);
/* temp_c is set to NAN when the sample carries no temperature */
void vical_imu_sample(const vical_imu_series* imu, size_t index,
                      int64_t* t_ns, double gyro[3], double accel[3],
                      double* temp_c);
/* Applies the calibration's M_a, M_g, b_a, b_g (raw -> calibrated). */
vical_status vical_imu_apply_intrinsics(const vical_imu_series* imu,
                                        const vical_calibration* calib,
                                        vical_imu_series** out);
void vical_imu_free(vical_imu_series* imu);

/* ------------------------------------------------------------------ */
/* Pose trajectories (mocap.csv / gt.csv / est.csv)                    */

typedef struct vical_trajectory vical_trajectory;

vical_status vical_trajectory_load(const char* path, vical_trajectory** out);
vical_status vical_trajectory_save(const vical_trajectory* traj,
                                   const char* path);
size_t vical_trajectory_count(const vical_trajectory* traj);
void vical_trajectory_sample(const vical_trajectory* traj, size_t index,
                             int64_t* t_ns, double pose[7]);
void vical_trajectory_free(vical_trajectory* traj);

/* ------------------------------------------------------------------ */
/* Calibration file (calib.txt)                                        */

typedef enum vical_imu_channel {
  VICAL_CHANNEL_GYRO = 0,
  VICAL_CHANNEL_ACCEL = 1
} vical_imu_channel;

vical_status vical_calibration_create(vical_calibration** out);
vical_status vical_calibration_load(const char* path, vical_calibration** out);
/* loads the file when present, identity defaults otherwise */
vical_status vical_calibration_load_or_default(const char* path,
                                               vical_calibration** out);
vical_status vical_calibration_save(const vical_calibration* calib,
                                    const char* path);
void vical_calibration_free(vical_calibration* calib);

void vical_calibration_get_matrix(const vical_calibration* calib,
                                  vical_imu_channel channel, double m[9]);
vical_status vical_calibration_set_matrix(vical_calibration* calib,
                                          vical_imu_channel channel,
                                          const double m[9]);
void vical_calibration_get_bias(const vical_calibration* calib,
                                vical_imu_channel channel, double v[3]);
void vical_calibration_set_bias(vical_calibration* calib,
                                vical_imu_channel channel, const double v[3]);
void vical_calibration_get_t_mi(const vical_calibration* calib, double pose[7]);
vical_status vical_calibration_set_t_mi(vical_calibration* calib,
                                        const double pose[7]);
void vical_calibration_get_t_wg(const vical_calibration* calib, double pose[7]);
vical_status vical_calibration_set_t_wg(vical_calibration* calib,
                                        const double pose[7]);
void vical_calibration_get_time_shift(const vical_calibration* calib,
                                      int64_t* cam_imu_ns,
                                      int64_t* mocap_imu_ns);
vical_status vical_calibration_set_time_shift(vical_calibration* calib,
                                              int64_t cam_imu_ns,
                                              int64_t mocap_imu_ns);
void vical_calibration_get_noise(const vical_calibration* calib,
                                 vical_imu_channel channel, double* sigma_w,
                                 double* sigma_b);
void vical_calibration_set_noise(vical_calibration* calib,
                                 vical_imu_channel channel, double sigma_w,
                                 double sigma_b);
/* returns 0 and leaves outputs untouched when no exposure model is stored */
int vical_calibration_get_exposure(const vical_calibration* calib, double* k,
                                   double* t_min_s, double* t_max_s);
vical_status vical_calibration_set_exposure(vical_calibration* calib, double k,
                                            double t_min_s, double t_max_s);

/* ------------------------------------------------------------------ */
/* Allan deviation                                                     */

typedef struct vical_allan_curves vical_allan_curves;

vical_status vical_allan_compute(const vical_imu_series* imu,
                                 vical_imu_channel channel,
                                 vical_allan_curves** out);
size_t vical_allan_count(const vical_allan_curves* curves);
/* dev_mean is the mean over the three per-axis deviations */
void vical_allan_row(const vical_allan_curves* curves, size_t index,
                     double* tau_s, double dev_xyz[3], double* dev_mean,
                     uint64_t* pairs);
/* axis_mask: bit 0 = x, bit 1 = y, bit 2 = z; deviations of the selected
 * axes are averaged before fitting */
vical_status vical_allan_fit_white_noise(const vical_allan_curves* curves,
                                         unsigned axis_mask, double tau_lo_s,
                                         double tau_hi_s, double* sigma_w);
vical_status vical_allan_fit_bias_rw(const vical_allan_curves* curves,
                                     unsigned axis_mask, double tau_lo_s,
                                     double tau_hi_s, double* sigma_b);
vical_status vical_allan_write_csv(const vical_allan_curves* curves,
                                   const char* path);
void vical_allan_free(vical_allan_curves* curves);

/* ------------------------------------------------------------------ */
/* MoCap-IMU time alignment                                            */

typedef struct vical_offset_estimate vical_offset_estimate;

vical_status vical_time_align(const vical_imu_series* imu,
                              const vical_trajectory* mocap, int64_t step_ns,
                              int64_t half_window_ns,
                              vical_offset_estimate** out);
double vical_offset_ns(const vical_offset_estimate* est);
size_t vical_offset_cost_count(const vical_offset_estimate* est);
void vical_offset_cost_row(const vical_offset_estimate* est, size_t index,
                           int64_t* offset_ns, double* cost);
vical_status vical_offset_write_cost_csv(const vical_offset_estimate* est,
                                         const char* path);
void vical_offset_free(vical_offset_estimate* est);

/* ------------------------------------------------------------------ */
/* Hand-eye calibration                                                */

typedef struct vical_pose_pairs vical_pose_pairs;
typedef struct vical_handeye_result vical_handeye_result;

vical_status vical_pose_pairs_load(const char* path, vical_pose_pairs** out);
size_t vical_pose_pairs_count(const vical_pose_pairs* pairs);
void vical_pose_pairs_free(vical_pose_pairs* pairs);

vical_status vical_handeye_solve(const vical_pose_pairs* pairs,
                                 vical_handeye_result** out);
void vical_handeye_get(const vical_handeye_result* result, double t_mi[7],
                       double t_wg[7], double* rms_residual, int* iterations,
                       int* converged);
void vical_handeye_free(vical_handeye_result* result);

/* ------------------------------------------------------------------ */
/* IMU intrinsics from MoCap references                                */

/* Reads T_MI and the MoCap-IMU time shift from calib, estimates M_a, M_g,
 * b_a, b_g against MoCap-derived reference signals and stores them back
 * into calib. */
vical_status vical_estimate_imu_intrinsics(const vical_imu_series* imu,
                                           const vical_trajectory* mocap,
                                           vical_calibration* calib,
                                           double* gyro_rms, double* accel_rms,
                                           size_t* pairs);

/* ------------------------------------------------------------------ */
/* Photometric calibration                                             */

typedef struct vical_image vical_image;

vical_status vical_image_load_pgm(const char* path, vical_image** out);
vical_status vical_image_save_pgm(const vical_image* image, const char* path);
void vical_image_size(const vical_image* image, int* width, int* height);
double vical_image_pixel(const vical_image* image, int x, int y);
void vical_image_free(vical_image* image);

/* Runs the alternating vignette/texture estimation over a directory
 * containing views.csv (#view,exposure_ns,offset_x,offset_y) and the
 * referenced view_NNN.pgm images. */
vical_status vical_vignette_estimate(const char* images_dir,
                                     vical_image** vignette, int* iterations,
                                     int* converged);

/* Least-squares k from an exposures.csv, excluding samples clamped at
 * [t_min, t_max]. */
vical_status vical_exposure_fit(const char* exposures_csv, double t_min_s,
                                double t_max_s, double* k_lux_s, size_t* used,
                                size_t* excluded);

/* ------------------------------------------------------------------ */
/* Trajectory evaluation                                               */

typedef struct vical_eval_report vical_eval_report;

vical_status vical_evaluate(const vical_trajectory* gt,
                            const vical_trajectory* est, double delta_s,
                            double max_gap_s, double seg_gap_s,
                            vical_eval_report** out);
double vical_eval_ate(const vical_eval_report* report);
void vical_eval_rpe(const vical_eval_report* report, double* trans_m,
                    double* rot_deg, size_t* intervals);
int vical_eval_diverged(const vical_eval_report* report);
double vical_eval_length(const vical_eval_report* report);
size_t vical_eval_pairs(const vical_eval_report* report);
int vical_eval_segments(const vical_eval_report* report);
size_t vical_eval_segment_count(const vical_eval_report* report);
double vical_eval_segment_ate(const vical_eval_report* report, size_t index);
void vical_eval_free(vical_eval_report* report);

/* ------------------------------------------------------------------ */
/* Synthetic rig simulator                                             */

/* Simulates the rig described by an INI config and writes imu.csv,
 * mocap.csv, gt.csv, pairs.csv, exposures.csv, truth.txt and vignette/
 * into out_dir. seed_override replaces the config seed when nonzero. */
vical_status vical_simulate(const char* config_path, uint64_t seed_override,
                            const char* out_dir);
/* Writes a ready-to-edit default rig config. */
vical_status vical_write_default_rig_config(const char* path);

#ifdef __cplusplus
}
#endif

#endif /* VICAL_H */
