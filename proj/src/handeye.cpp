#include "vical/handeye.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace vical {

namespace {

// Left and right quaternion product matrices on (w, x, y, z) coefficients.
Eigen::Matrix4d quat_left(const Eigen::Quaterniond& q) {
  Eigen::Matrix4d L;
  L << q.w(), -q.x(), -q.y(), -q.z(),
       q.x(),  q.w(), -q.z(),  q.y(),
       q.y(),  q.z(),  q.w(), -q.x(),
       q.z(), -q.y(),  q.x(),  q.w();
  return L;
}

Eigen::Matrix4d quat_right(const Eigen::Quaterniond& q) {
  Eigen::Matrix4d R;
  R << q.w(), -q.x(), -q.y(), -q.z(),
       q.x(),  q.w(),  q.z(), -q.y(),
       q.y(), -q.z(),  q.w(),  q.x(),
       q.z(),  q.y(), -q.x(),  q.w();
  return R;
}

struct RelativeMotion {
  RigidMotion a;  // T_WM_j^-1 * T_WM_i  (marker stream)
  RigidMotion b;  // T_IG_j * T_IG_i^-1  (grid stream)
  double angle = 0.0;
  Eigen::Vector3d axis{0, 0, 0};
};

std::vector<RelativeMotion> relative_motions(
    const std::vector<PosePair>& pairs) {
  std::vector<RelativeMotion> rel;
  rel.reserve(pairs.size() - 1);
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    RelativeMotion r;
    r.a = compose(pairs[i + 1].T_WM.inverse(), pairs[i].T_WM);
    r.b = compose(pairs[i + 1].T_IG, pairs[i].T_IG.inverse());
    const Eigen::Vector3d rotvec = so3_log(r.a.rotation);
    r.angle = rotvec.norm();
    if (r.angle > 0.0) r.axis = rotvec / r.angle;
    rel.push_back(r);
  }
  return rel;
}

// The relative-rotation axes must span a cone: with a single axis the
// component of T_MI's rotation about it is unobservable.
void check_axis_span(const std::vector<RelativeMotion>& rel,
                     const HandEyeParams& params) {
  const double min_angle = params.min_rotation_deg * std::numbers::pi / 180.0;
  std::vector<Eigen::Vector3d> axes;
  for (const auto& r : rel) {
    if (r.angle >= min_angle) axes.push_back(r.axis);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    for (std::size_t j = i + 1; j < axes.size(); ++j) {
      const double c = std::clamp(std::abs(axes[i].dot(axes[j])), 0.0, 1.0);
      best = std::max(best, std::acos(c));
    }
  }
  const double need = params.min_axis_span_deg * std::numbers::pi / 180.0;
  if (axes.size() < 2 || best < need) {
    fail(ErrorCode::degenerate,
         "relative-rotation axes span " +
             std::to_string(best * 180.0 / std::numbers::pi) +
             " deg, need " + std::to_string(params.min_axis_span_deg));
  }
}

// Classical separable initialization: rotation from the quaternion null
// space of stacked (L(qa) - R(qb)), translation from the resulting linear
// system, T_WG from averaging the per-pair closures.
RigidMotion initial_t_mi(const std::vector<RelativeMotion>& rel,
                         const HandEyeParams& params) {
  const double min_angle = params.min_rotation_deg * std::numbers::pi / 180.0;
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  std::size_t used = 0;
  for (const auto& r : rel) {
    if (r.angle < min_angle) continue;
    const Eigen::Matrix4d m = quat_left(r.a.rotation) - quat_right(r.b.rotation);
    acc += m.transpose() * m;
    ++used;
  }
  if (used < 2) return RigidMotion::identity();

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(acc);
  const Eigen::Vector4d qv = eig.eigenvectors().col(0);  // smallest eigenvalue
  RigidMotion x;
  x.rotation = Eigen::Quaterniond(qv(0), qv(1), qv(2), qv(3));
  x.canonicalize();

  Eigen::MatrixXd A(3 * static_cast<Eigen::Index>(used), 3);
  Eigen::VectorXd rhs(3 * static_cast<Eigen::Index>(used));
  Eigen::Index row = 0;
  for (const auto& r : rel) {
    if (r.angle < min_angle) continue;
    A.middleRows<3>(row) =
        r.a.rotation.toRotationMatrix() - Eigen::Matrix3d::Identity();
    rhs.segment<3>(row) = x.rotation * r.b.translation - r.a.translation;
    row += 3;
  }
  x.translation = A.colPivHouseholderQr().solve(rhs);
  return x;
}

RigidMotion average_t_wg(const std::vector<PosePair>& pairs,
                         const RigidMotion& t_mi) {
  Eigen::Matrix4d qacc = Eigen::Matrix4d::Zero();
  Eigen::Vector3d tacc = Eigen::Vector3d::Zero();
  for (const auto& p : pairs) {
    const RigidMotion g = compose(compose(p.T_WM, t_mi), p.T_IG);
    Eigen::Quaterniond q = g.rotation;
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    const Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
    qacc += v * v.transpose();
    tacc += g.translation;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(qacc);
  const Eigen::Vector4d qv = eig.eigenvectors().col(3);  // largest eigenvalue
  RigidMotion out;
  out.rotation = Eigen::Quaterniond(qv(0), qv(1), qv(2), qv(3));
  out.translation = tacc / static_cast<double>(pairs.size());
  out.canonicalize();
  return out;
}

struct State {
  RigidMotion t_mi;
  RigidMotion t_wg;
};

void residuals(const std::vector<PosePair>& pairs, const State& s,
               Eigen::VectorXd& r) {
  const RigidMotion wg_inv = s.t_wg.inverse();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const RigidMotion closure = compose(
        compose(wg_inv, pairs[i].T_WM), compose(s.t_mi, pairs[i].T_IG));
    r.segment<6>(6 * static_cast<Eigen::Index>(i)) = se3_log(closure);
  }
}

State retract(const State& s, const Eigen::Matrix<double, 12, 1>& dx) {
  State out;
  out.t_mi = compose(s.t_mi, se3_exp(dx.head<6>()));
  out.t_wg = compose(s.t_wg, se3_exp(dx.tail<6>()));
  return out;
}

}  // namespace

HandEyeSolution solve_handeye(const HandEyeProblem& problem,
                              const HandEyeParams& params) {
  const auto& pairs = problem.pairs;
  if (pairs.size() < 3) {
    fail(ErrorCode::degenerate,
         "need at least 3 pose pairs, got " + std::to_string(pairs.size()));
  }
  const auto rel = relative_motions(pairs);
  check_axis_span(rel, params);

  State state;
  state.t_mi = problem.initial_T_MI.value_or(initial_t_mi(rel, params));
  state.t_wg = problem.initial_T_WG.value_or(average_t_wg(pairs, state.t_mi));

  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::VectorXd r(6 * n), r_pert(6 * n), r_new(6 * n);
  Eigen::MatrixXd jac(6 * n, 12);
  residuals(pairs, state, r);
  double cost = r.squaredNorm();

  HandEyeSolution sol;
  sol.converged = false;
  const double h = 1e-7;
  int it = 0;
  for (; it < params.max_iterations; ++it) {
    // central-difference Jacobian on the product manifold
    for (int k = 0; k < 12; ++k) {
      Eigen::Matrix<double, 12, 1> dx = Eigen::Matrix<double, 12, 1>::Zero();
      dx(k) = h;
      residuals(pairs, retract(state, dx), r_pert);
      jac.col(k) = r_pert;
      dx(k) = -h;
      residuals(pairs, retract(state, dx), r_pert);
      jac.col(k) = (jac.col(k) - r_pert) / (2.0 * h);
    }

    const Eigen::Matrix<double, 12, 12> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 12, 1> jtr = jac.transpose() * r;

    double lambda = 0.0;
    bool stepped = false;
    Eigen::Matrix<double, 12, 1> dx;
    for (int damping = 0; damping < 8; ++damping) {
      Eigen::Matrix<double, 12, 12> lhs = jtj;
      lhs.diagonal().array() += lambda;
      dx = lhs.ldlt().solve(-jtr);
      const State cand = retract(state, dx);
      residuals(pairs, cand, r_new);
      const double new_cost = r_new.squaredNorm();
      if (new_cost <= cost || dx.norm() < params.step_tolerance) {
        state = cand;
        r = r_new;
        cost = new_cost;
        stepped = true;
        break;
      }
      lambda = lambda == 0.0 ? 1e-8 * jtj.diagonal().maxCoeff() : lambda * 10.0;
    }
    if (!stepped) break;
    if (dx.norm() < params.step_tolerance) {
      sol.converged = true;
      ++it;
      break;
    }
  }

  sol.T_MI = state.t_mi;
  sol.T_WG = state.t_wg;
  sol.iterations = it;
  sol.rms_residual = std::sqrt(cost / static_cast<double>(pairs.size()));
  if (!std::isfinite(sol.rms_residual)) {
    fail(ErrorCode::no_convergence, "hand-eye residual is not finite");
  }
  return sol;
}

Trajectory convert_mocap_to_gt(const Trajectory& mocap_wm,
                               const RigidMotion& T_MI) {
  Trajectory out;
  out.parent = mocap_wm.parent;
  out.child = Frame::I;
  out.samples.reserve(mocap_wm.size());
  for (const auto& s : mocap_wm.samples) {
    PoseSample p;
    p.t = s.t;
    p.pose = compose(s.pose, T_MI);
    out.samples.push_back(p);
  }
  return out;
}

}  // namespace vical
