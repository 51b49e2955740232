#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "vical/errors.hpp"

namespace vical {

// Nanoseconds since an arbitrary per-stream epoch. int64 covers +-10 years
// at nanosecond resolution with two orders of magnitude to spare.
using Timestamp = std::int64_t;

constexpr double kNsPerSec = 1e9;

inline double to_seconds(Timestamp t) { return static_cast<double>(t) * 1e-9; }

using Vector6d = Eigen::Matrix<double, 6, 1>;

// Coordinate frames of the rig. W world (MoCap reference), M marker body,
// I IMU, C0/C1 cameras, G calibration grid.
enum class Frame { W, M, I, C0, C1, G };

std::string_view frame_name(Frame f);
Frame parse_frame(std::string_view name);

// ---------------------------------------------------------------------------
// SO(3) helpers. Quaternions are Hamilton convention, stored (w,x,y,z).

// Rotation-vector logarithm (axis * angle). Stable for small angles and for
// angles near pi: the axis comes from the quaternion vector part, never from
// the rotation-matrix trace.
Eigen::Vector3d so3_log(const Eigen::Quaterniond& q);

Eigen::Quaterniond so3_exp(const Eigen::Vector3d& rotvec);

// Right Jacobian of SO(3): for R(t) = Exp(theta(t)), the body angular rate is
// omega = Jr(theta) * theta_dot.
Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& rotvec);

// ---------------------------------------------------------------------------

// Rigid transform T_parent_child. Maps child-frame point coordinates into the
// parent frame: p_parent = rotation * p_child + translation.
struct RigidMotion {
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  static RigidMotion identity() { return {}; }

  // Renormalizes and fixes the quaternion sign (w >= 0; if w == 0, the first
  // nonzero of x,y,z is made positive) so serialization is deterministic.
  void canonicalize();

  RigidMotion inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& p) const;
};

// compose(a, b) applies b first, then a: result = a * b.
RigidMotion compose(const RigidMotion& a, const RigidMotion& b);

// 6-vector twist, translation part first, rotation part last.
Vector6d se3_log(const RigidMotion& T);
RigidMotion se3_exp(const Vector6d& twist);

// Geodesic rotation distance in radians.
double rotation_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

struct PoseSample {
  Timestamp t = 0;
  RigidMotion pose;
};

struct ImuSample {
  Timestamp t = 0;
  Eigen::Vector3d gyro{0.0, 0.0, 0.0};   // rad/s
  Eigen::Vector3d accel{0.0, 0.0, 0.0};  // m/s^2
  std::optional<double> temp_c;          // deg C; carried, unused by algorithms
};

// Time-ordered pose stream with a single (parent, child) frame pair.
struct Trajectory {
  Frame parent = Frame::W;
  Frame child = Frame::M;
  std::vector<PoseSample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  Timestamp first_time() const;
  Timestamp last_time() const;

  // Throws on duplicate/backward timestamps or non-finite entries.
  void validate() const;
};

// Piecewise interpolation: translation linear, rotation slerp on the shorter
// arc. Exact at sample timestamps. Throws out_of_range outside the span.
RigidMotion interpolate(const Trajectory& traj, Timestamp t);

// Body-frame (child-frame) angular velocity at sample i from central
// differences on the orientation:
//   omega_i = log(R_{i-1}^T R_{i+1}) / (t_{i+1} - t_{i-1}).
// Valid for 0 < i < size-1; boundary indices throw out_of_range.
Eigen::Vector3d angular_rate_central_diff(const Trajectory& traj, std::size_t i);

// Convenience: angular-rate magnitude series over all interior samples.
struct ScalarSeries {
  std::vector<Timestamp> t;
  std::vector<double> v;

  std::size_t size() const { return t.size(); }
};

ScalarSeries angular_rate_magnitudes(const Trajectory& traj);

}  // namespace vical
