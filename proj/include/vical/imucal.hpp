#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vical/core.hpp"

namespace vical {

// Axis scaling / misalignment matrices and initial biases:
//   a_calibrated = M_a * a_raw - b_a
//   w_calibrated = M_g * w_raw - b_g
// M_g has all 9 entries free; M_a is lower triangular (6 parameters), the
// accelerometer triad defining the IMU frame.
struct ImuIntrinsics {
  Eigen::Matrix3d M_a = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d M_g = Eigen::Matrix3d::Identity();
  Eigen::Vector3d b_a{0.0, 0.0, 0.0};
  Eigen::Vector3d b_g{0.0, 0.0, 0.0};

  static ImuIntrinsics identity() { return {}; }

  // Throws: parse if M_a has nonzero entries above the diagonal or anything
  // is non-finite, singular if either matrix has condition number >= 1e6.
  void validate() const;
};

ImuSample apply_calibration(const ImuSample& raw, const ImuIntrinsics& intr);

// Inverse model, used by the simulator to manufacture raw measurements:
// apply_calibration(invert_calibration(x)) == x. Throws singular for
// ill-conditioned intrinsics.
ImuSample invert_calibration(const ImuSample& calibrated,
                             const ImuIntrinsics& intr);

// Linear least squares over paired (raw, reference) series, both sampled at
// the same instants. The gyro problem is linear in all 12 parameters.
// Throws degenerate naming the weak axis when the regressor is rank
// deficient (e.g. rotation about a single axis only).
struct GyroEstimate {
  Eigen::Matrix3d M_g;
  Eigen::Vector3d b_g;
  double rms_residual = 0.0;
};
GyroEstimate estimate_gyro_intrinsics(
    const std::vector<Eigen::Vector3d>& raw_gyro,
    const std::vector<Eigen::Vector3d>& reference_omega);

// Same, constrained lower triangular (6 + 3 parameters). The reference is
// specific force in the IMU frame, R^T (p_ddot - g).
struct AccelEstimate {
  Eigen::Matrix3d M_a;  // strictly zero above the diagonal
  Eigen::Vector3d b_a;
  double rms_residual = 0.0;
};
AccelEstimate estimate_accel_intrinsics(
    const std::vector<Eigen::Vector3d>& raw_accel,
    const std::vector<Eigen::Vector3d>& reference_specific_force);

// Reference series manufactured from MoCap ground truth: angular rates by
// central differences of orientation, specific force by second-order central
// differences of position, gravity corrected, all rotated into the IMU frame
// via T_MI. Differentiation noise at the MoCap rate is inherent to this path.
struct PairedReference {
  std::vector<Timestamp> t;  // IMU timestamps covered by the reference
  std::vector<Eigen::Vector3d> raw_gyro, ref_omega;
  std::vector<Eigen::Vector3d> raw_accel, ref_specific_force;
};
PairedReference build_mocap_reference(
    const std::vector<ImuSample>& imu, const Trajectory& mocap_wm,
    const RigidMotion& T_MI, Timestamp mocap_imu_shift_ns,
    const Eigen::Vector3d& gravity = Eigen::Vector3d(0, 0, -9.80665),
    int median_window = 5);

struct IntrinsicsEstimate {
  ImuIntrinsics intrinsics;
  double gyro_rms = 0.0;
  double accel_rms = 0.0;
  std::size_t pairs = 0;
};
IntrinsicsEstimate estimate_intrinsics_from_mocap(
    const std::vector<ImuSample>& imu, const Trajectory& mocap_wm,
    const RigidMotion& T_MI, Timestamp mocap_imu_shift_ns,
    const Eigen::Vector3d& gravity = Eigen::Vector3d(0, 0, -9.80665));

}  // namespace vical
