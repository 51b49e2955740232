#include "vical/core.hpp"

#include <cmath>
#include <string>

namespace vical {

std::string_view frame_name(Frame f) {
  switch (f) {
    case Frame::W: return "W";
    case Frame::M: return "M";
    case Frame::I: return "I";
    case Frame::C0: return "C0";
    case Frame::C1: return "C1";
    case Frame::G: return "G";
  }
  fail(ErrorCode::internal, "unknown frame enum value");
}

Frame parse_frame(std::string_view name) {
  if (name == "W") return Frame::W;
  if (name == "M") return Frame::M;
  if (name == "I") return Frame::I;
  if (name == "C0") return Frame::C0;
  if (name == "C1") return Frame::C1;
  if (name == "G") return Frame::G;
  fail(ErrorCode::parse, "unknown frame label '" + std::string(name) + "'");
}

Eigen::Vector3d so3_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Eigen::Vector3d v = q.vec();
  const double vn = v.norm();
  const double w = q.w();
  if (vn < 1e-9) {
    // theta/vn -> 2/w * (1 - vn^2 / (3 w^2)) for small vn
    return v * (2.0 / w) * (1.0 - vn * vn / (3.0 * w * w));
  }
  const double angle = 2.0 * std::atan2(vn, w);
  return v * (angle / vn);
}

Eigen::Quaterniond so3_exp(const Eigen::Vector3d& rotvec) {
  const double theta = rotvec.norm();
  double half_sinc;  // sin(theta/2) / theta
  if (theta < 1e-8) {
    half_sinc = 0.5 - theta * theta / 48.0;
  } else {
    half_sinc = std::sin(0.5 * theta) / theta;
  }
  Eigen::Quaterniond q(std::cos(0.5 * theta), half_sinc * rotvec.x(),
                       half_sinc * rotvec.y(), half_sinc * rotvec.z());
  q.normalize();
  return q;
}

namespace {

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// V(theta) from the SE(3) exponential; V^{-1} maps translations into twists.
Eigen::Matrix3d se3_v_matrix(const Eigen::Vector3d& rotvec) {
  const double theta = rotvec.norm();
  const Eigen::Matrix3d K = skew(rotvec);
  double a, b;  // V = I + a K + b K^2
  if (theta < 1e-5) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = (1.0 - std::cos(theta)) / (theta * theta);
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Eigen::Matrix3d::Identity() + a * K + b * K * K;
}

Eigen::Matrix3d se3_v_inverse(const Eigen::Vector3d& rotvec) {
  const double theta = rotvec.norm();
  const Eigen::Matrix3d K = skew(rotvec);
  double c;  // V^{-1} = I - K/2 + c K^2
  if (theta < 1e-4) {
    c = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    // 1/theta^2 - cot(theta/2) / (2 theta); stable up to theta = pi
    const double half = 0.5 * theta;
    c = 1.0 / (theta * theta) -
        std::cos(half) / (2.0 * theta * std::sin(half));
  }
  return Eigen::Matrix3d::Identity() - 0.5 * K + c * K * K;
}

}  // namespace

Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& rotvec) {
  const double theta = rotvec.norm();
  const Eigen::Matrix3d K = skew(rotvec);
  double a, b;  // Jr = I - a K + b K^2
  if (theta < 1e-5) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0;
    b = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = (1.0 - std::cos(theta)) / (theta * theta);
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Eigen::Matrix3d::Identity() - a * K + b * K * K;
}

void RigidMotion::canonicalize() {
  // Skip the division when the norm is already unit to machine precision;
  // renormalizing would perturb the low bits and break bit-exact round trips.
  if (std::abs(rotation.squaredNorm() - 1.0) > 1e-12) rotation.normalize();
  const auto& c = rotation.coeffs();  // (x, y, z, w)
  bool flip = c[3] < 0.0;
  if (c[3] == 0.0) {
    for (int i = 0; i < 3; ++i) {
      if (c[i] != 0.0) {
        flip = c[i] < 0.0;
        break;
      }
    }
  }
  if (flip) rotation.coeffs() = -rotation.coeffs();
}

RigidMotion RigidMotion::inverse() const {
  RigidMotion out;
  out.rotation = rotation.conjugate();
  out.translation = -(out.rotation * translation);
  out.canonicalize();
  return out;
}

Eigen::Vector3d RigidMotion::apply(const Eigen::Vector3d& p) const {
  return rotation * p + translation;
}

RigidMotion compose(const RigidMotion& a, const RigidMotion& b) {
  RigidMotion out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.canonicalize();
  return out;
}

Vector6d se3_log(const RigidMotion& T) {
  const Eigen::Vector3d phi = so3_log(T.rotation);
  Vector6d tw;
  tw.head<3>() = se3_v_inverse(phi) * T.translation;
  tw.tail<3>() = phi;
  return tw;
}

RigidMotion se3_exp(const Vector6d& twist) {
  const Eigen::Vector3d phi = twist.tail<3>();
  RigidMotion T;
  T.rotation = so3_exp(phi);
  T.translation = se3_v_matrix(phi) * twist.head<3>();
  T.canonicalize();
  return T;
}

double rotation_angle(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return so3_log(a.conjugate() * b).norm();
}

Timestamp Trajectory::first_time() const {
  if (samples.empty()) fail(ErrorCode::empty_input, "trajectory is empty");
  return samples.front().t;
}

Timestamp Trajectory::last_time() const {
  if (samples.empty()) fail(ErrorCode::empty_input, "trajectory is empty");
  return samples.back().t;
}

void Trajectory::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!s.pose.translation.allFinite() ||
        !s.pose.rotation.coeffs().allFinite()) {
      fail(ErrorCode::parse,
           "non-finite pose at sample " + std::to_string(i));
    }
    if (i > 0 && samples[i - 1].t >= s.t) {
      fail(ErrorCode::monotonicity,
           "timestamps not strictly increasing: " +
               std::to_string(samples[i - 1].t) + " then " +
               std::to_string(s.t));
    }
  }
}

RigidMotion interpolate(const Trajectory& traj, Timestamp t) {
  if (traj.empty()) fail(ErrorCode::empty_input, "trajectory is empty");
  const auto& s = traj.samples;
  if (t < s.front().t || t > s.back().t) {
    fail(ErrorCode::out_of_range,
         "timestamp " + std::to_string(t) + " outside trajectory span [" +
             std::to_string(s.front().t) + ", " + std::to_string(s.back().t) +
             "]");
  }
  auto it = std::lower_bound(
      s.begin(), s.end(), t,
      [](const PoseSample& a, Timestamp v) { return a.t < v; });
  if (it->t == t) return it->pose;
  const PoseSample& hi = *it;
  const PoseSample& lo = *(it - 1);
  const double u =
      static_cast<double>(t - lo.t) / static_cast<double>(hi.t - lo.t);
  RigidMotion out;
  out.rotation = lo.pose.rotation.slerp(u, hi.pose.rotation);
  out.translation =
      (1.0 - u) * lo.pose.translation + u * hi.pose.translation;
  out.canonicalize();
  return out;
}

Eigen::Vector3d angular_rate_central_diff(const Trajectory& traj,
                                          std::size_t i) {
  const auto& s = traj.samples;
  if (i == 0 || i + 1 >= s.size()) {
    fail(ErrorCode::out_of_range,
         "central difference needs interior index, got " + std::to_string(i) +
             " of " + std::to_string(s.size()));
  }
  const Eigen::Quaterniond rel =
      s[i - 1].pose.rotation.conjugate() * s[i + 1].pose.rotation;
  const double dt = to_seconds(s[i + 1].t - s[i - 1].t);
  return so3_log(rel) / dt;
}

ScalarSeries angular_rate_magnitudes(const Trajectory& traj) {
  ScalarSeries out;
  if (traj.size() < 3) return out;
  out.t.reserve(traj.size() - 2);
  out.v.reserve(traj.size() - 2);
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    out.t.push_back(traj.samples[i].t);
    out.v.push_back(angular_rate_central_diff(traj, i).norm());
  }
  return out;
}

}  // namespace vical
