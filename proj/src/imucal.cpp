#include "vical/imucal.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "vical/timesync.hpp"

namespace vical {

namespace {

constexpr double kMaxConditionNumber = 1e6;

double condition_number(const Eigen::Matrix3d& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto& s = svd.singularValues();
  if (s(2) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(2);
}

const char* axis_name(int i) { return i == 0 ? "x" : (i == 1 ? "y" : "z"); }

// Shared check for the per-row regressors: the smallest singular value
// relative to the largest must clear the threshold, otherwise some linear
// combination of the parameters is unobservable.
void check_excitation(const Eigen::MatrixXd& regressor, int bias_column) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(regressor,
                                              Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (smax <= 0.0 || smin / smax < 1e-8) {
    const Eigen::VectorXd null_dir = svd.matrixV().col(s.size() - 1);
    int weak = 0;
    double best = -1.0;
    for (int i = 0; i < bias_column; ++i) {
      if (std::abs(null_dir(i)) > best) {
        best = std::abs(null_dir(i));
        weak = i;
      }
    }
    fail(ErrorCode::degenerate,
         std::string("insufficient excitation, weak axis ") + axis_name(weak));
  }
}

}  // namespace

void ImuIntrinsics::validate() const {
  if (!M_a.allFinite() || !M_g.allFinite() || !b_a.allFinite() ||
      !b_g.allFinite()) {
    fail(ErrorCode::parse, "intrinsics contain non-finite entries");
  }
  if (M_a(0, 1) != 0.0 || M_a(0, 2) != 0.0 || M_a(1, 2) != 0.0) {
    fail(ErrorCode::parse, "M_a must be lower triangular");
  }
  if (condition_number(M_a) >= kMaxConditionNumber) {
    fail(ErrorCode::singular, "M_a condition number >= 1e6");
  }
  if (condition_number(M_g) >= kMaxConditionNumber) {
    fail(ErrorCode::singular, "M_g condition number >= 1e6");
  }
}

ImuSample apply_calibration(const ImuSample& raw, const ImuIntrinsics& intr) {
  ImuSample out = raw;
  out.accel = intr.M_a * raw.accel - intr.b_a;
  out.gyro = intr.M_g * raw.gyro - intr.b_g;
  return out;
}

ImuSample invert_calibration(const ImuSample& calibrated,
                             const ImuIntrinsics& intr) {
  if (condition_number(intr.M_a) >= kMaxConditionNumber ||
      condition_number(intr.M_g) >= kMaxConditionNumber) {
    fail(ErrorCode::singular, "intrinsics are not invertible");
  }
  ImuSample out = calibrated;
  out.accel = intr.M_a.partialPivLu().solve(calibrated.accel + intr.b_a);
  out.gyro = intr.M_g.partialPivLu().solve(calibrated.gyro + intr.b_g);
  return out;
}

GyroEstimate estimate_gyro_intrinsics(
    const std::vector<Eigen::Vector3d>& raw_gyro,
    const std::vector<Eigen::Vector3d>& reference_omega) {
  if (raw_gyro.size() != reference_omega.size()) {
    fail(ErrorCode::invalid_argument, "series lengths differ");
  }
  const auto n = static_cast<Eigen::Index>(raw_gyro.size());
  if (n < 12) {
    fail(ErrorCode::insufficient_data,
         "need at least 12 samples, got " + std::to_string(n));
  }

  // Rows of M_g and the matching bias component separate into three
  // independent least-squares problems sharing the regressor [w_raw, -1].
  Eigen::MatrixXd A(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    A.row(i) << raw_gyro[i].transpose(), -1.0;
  }
  check_excitation(A, 3);

  GyroEstimate est;
  const auto qr = A.colPivHouseholderQr();
  double ss = 0.0;
  for (int r = 0; r < 3; ++r) {
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(i) = reference_omega[i](r);
    const Eigen::Vector4d x = qr.solve(rhs);
    est.M_g.row(r) = x.head<3>().transpose();
    est.b_g(r) = x(3);
    ss += (A * x - rhs).squaredNorm();
  }
  est.rms_residual = std::sqrt(ss / static_cast<double>(3 * n));
  return est;
}

AccelEstimate estimate_accel_intrinsics(
    const std::vector<Eigen::Vector3d>& raw_accel,
    const std::vector<Eigen::Vector3d>& reference_specific_force) {
  if (raw_accel.size() != reference_specific_force.size()) {
    fail(ErrorCode::invalid_argument, "series lengths differ");
  }
  const auto n = static_cast<Eigen::Index>(raw_accel.size());
  if (n < 12) {
    fail(ErrorCode::insufficient_data,
         "need at least 12 samples, got " + std::to_string(n));
  }

  AccelEstimate est;
  est.M_a.setZero();
  double ss = 0.0;
  // Row r uses raw components 0..r plus the bias: lower-triangular M_a.
  for (int r = 0; r < 3; ++r) {
    const int cols = r + 2;
    Eigen::MatrixXd A(n, cols);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c <= r; ++c) A(i, c) = raw_accel[i](c);
      A(i, cols - 1) = -1.0;
      rhs(i) = reference_specific_force[i](r);
    }
    check_excitation(A, cols - 1);
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(rhs);
    for (int c = 0; c <= r; ++c) est.M_a(r, c) = x(c);
    est.b_a(r) = x(cols - 1);
    ss += (A * x - rhs).squaredNorm();
  }
  est.rms_residual = std::sqrt(ss / static_cast<double>(3 * n));
  return est;
}

PairedReference build_mocap_reference(const std::vector<ImuSample>& imu,
                                      const Trajectory& mocap_wm,
                                      const RigidMotion& T_MI,
                                      Timestamp mocap_imu_shift_ns,
                                      const Eigen::Vector3d& gravity,
                                      int median_window) {
  if (imu.empty()) fail(ErrorCode::empty_input, "IMU stream is empty");
  if (mocap_wm.size() < 3) {
    fail(ErrorCode::insufficient_data, "need at least 3 MoCap poses");
  }

  // glitch rejection only: a blanket median would kink the positions at
  // every turning point and wreck the second derivatives
  const Trajectory filtered = deglitch_positions(mocap_wm, median_window);

  // W->I trajectory on the IMU clock.
  Trajectory wi;
  wi.parent = Frame::W;
  wi.child = Frame::I;
  wi.samples.reserve(filtered.size());
  for (const auto& s : filtered.samples) {
    PoseSample p;
    p.t = s.t - mocap_imu_shift_ns;
    p.pose = compose(s.pose, T_MI);
    wi.samples.push_back(p);
  }

  // Reference signals at interior MoCap samples.
  std::vector<Timestamp> rt;
  std::vector<Eigen::Vector3d> romega, rforce;
  rt.reserve(wi.size() - 2);
  for (std::size_t i = 1; i + 1 < wi.size(); ++i) {
    const auto& prev = wi.samples[i - 1];
    const auto& cur = wi.samples[i];
    const auto& next = wi.samples[i + 1];
    const double dt_prev = to_seconds(cur.t - prev.t);
    const double dt_next = to_seconds(next.t - cur.t);

    const Eigen::Vector3d omega = angular_rate_central_diff(wi, i);

    // Non-uniform 3-point second derivative of position.
    const Eigen::Vector3d v_next =
        (next.pose.translation - cur.pose.translation) / dt_next;
    const Eigen::Vector3d v_prev =
        (cur.pose.translation - prev.pose.translation) / dt_prev;
    const Eigen::Vector3d accel =
        2.0 * (v_next - v_prev) / (dt_prev + dt_next);

    rt.push_back(cur.t);
    romega.push_back(omega);
    rforce.push_back(cur.pose.rotation.conjugate() * (accel - gravity));
  }

  // Linear interpolation of both reference series onto IMU timestamps.
  PairedReference out;
  std::size_t k = 0;
  for (const auto& s : imu) {
    if (s.t < rt.front() || s.t > rt.back()) continue;
    while (k + 1 < rt.size() && rt[k + 1] < s.t) ++k;
    const std::size_t hi = (rt[k] == s.t) ? k : k + 1;
    Eigen::Vector3d omega, force;
    if (hi == k || rt[hi] == s.t) {
      omega = romega[hi];
      force = rforce[hi];
    } else {
      const double u = static_cast<double>(s.t - rt[k]) /
                       static_cast<double>(rt[hi] - rt[k]);
      omega = (1.0 - u) * romega[k] + u * romega[hi];
      force = (1.0 - u) * rforce[k] + u * rforce[hi];
    }
    out.t.push_back(s.t);
    out.raw_gyro.push_back(s.gyro);
    out.ref_omega.push_back(omega);
    out.raw_accel.push_back(s.accel);
    out.ref_specific_force.push_back(force);
  }
  if (out.t.empty()) {
    fail(ErrorCode::no_overlap, "no IMU samples inside the MoCap span");
  }
  return out;
}

IntrinsicsEstimate estimate_intrinsics_from_mocap(
    const std::vector<ImuSample>& imu, const Trajectory& mocap_wm,
    const RigidMotion& T_MI, Timestamp mocap_imu_shift_ns,
    const Eigen::Vector3d& gravity) {
  const PairedReference ref =
      build_mocap_reference(imu, mocap_wm, T_MI, mocap_imu_shift_ns, gravity);

  const GyroEstimate g = estimate_gyro_intrinsics(ref.raw_gyro, ref.ref_omega);
  const AccelEstimate a =
      estimate_accel_intrinsics(ref.raw_accel, ref.ref_specific_force);

  IntrinsicsEstimate out;
  out.intrinsics.M_g = g.M_g;
  out.intrinsics.b_g = g.b_g;
  out.intrinsics.M_a = a.M_a;
  out.intrinsics.b_a = a.b_a;
  out.intrinsics.validate();
  out.gyro_rms = g.rms_residual;
  out.accel_rms = a.rms_residual;
  out.pairs = ref.t.size();
  return out;
}

}  // namespace vical
