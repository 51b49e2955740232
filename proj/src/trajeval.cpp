#include "vical/trajeval.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace vical {

std::vector<Segment> split_segments(const Trajectory& gt,
                                    double gap_threshold_s) {
  if (gt.empty()) fail(ErrorCode::empty_input, "ground truth is empty");
  const auto gap_ns =
      static_cast<Timestamp>(std::llround(gap_threshold_s * kNsPerSec));
  std::vector<Segment> segments;
  std::size_t begin = 0;
  for (std::size_t i = 1; i < gt.size(); ++i) {
    if (gt.samples[i].t - gt.samples[i - 1].t > gap_ns) {
      segments.push_back({begin, i});
      begin = i;
    }
  }
  segments.push_back({begin, gt.size()});
  return segments;
}

AssociatedTrack associate(const Trajectory& gt, const Trajectory& est,
                          double max_gap_s, double gap_threshold_s) {
  if (gt.empty() || est.empty()) {
    fail(ErrorCode::empty_input, "cannot associate empty trajectories");
  }
  const auto segments = split_segments(gt, gap_threshold_s);
  const auto max_gap_ns =
      static_cast<Timestamp>(std::llround(max_gap_s * kNsPerSec));

  AssociatedTrack track;
  track.segment_count = static_cast<int>(segments.size());
  std::size_t gi = 0;
  for (const auto& e : est.samples) {
    // advance to the ground-truth interval containing e.t
    while (gi + 1 < gt.size() && gt.samples[gi + 1].t < e.t) ++gi;
    if (e.t < gt.samples.front().t || e.t > gt.samples.back().t) continue;

    int segment = -1;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      if (e.t >= gt.samples[segments[s].begin].t &&
          e.t <= gt.samples[segments[s].end - 1].t) {
        segment = static_cast<int>(s);
        break;
      }
    }
    if (segment < 0) continue;  // inside a coverage gap

    AssociatedPair pair;
    pair.t = e.t;
    pair.est = e.pose;
    pair.segment = segment;
    if (gt.samples[gi].t == e.t) {
      pair.gt = gt.samples[gi].pose;
    } else if (gi + 1 < gt.size() && gt.samples[gi + 1].t == e.t) {
      pair.gt = gt.samples[gi + 1].pose;
    } else {
      const std::size_t hi = gi + 1;
      if (e.t - gt.samples[gi].t > max_gap_ns ||
          gt.samples[hi].t - e.t > max_gap_ns) {
        continue;  // bracketing samples too far away
      }
      Trajectory local;
      local.samples = {gt.samples[gi], gt.samples[hi]};
      pair.gt = interpolate(local, e.t);
    }
    track.pairs.push_back(pair);
  }
  if (track.pairs.empty()) {
    fail(ErrorCode::no_overlap, "no estimate poses could be associated");
  }
  return track;
}

RigidMotion align_se3(std::span<const Eigen::Vector3d> p,
                      std::span<const Eigen::Vector3d> p_hat) {
  if (p.size() != p_hat.size()) {
    fail(ErrorCode::invalid_argument, "point sets differ in size");
  }
  if (p.size() < 3) {
    fail(ErrorCode::degenerate, "need at least 3 point pairs");
  }
  const double n = static_cast<double>(p.size());
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  Eigen::Vector3d c_hat = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) {
    c += p[i];
    c_hat += p_hat[i];
  }
  c /= n;
  c_hat /= n;

  Eigen::Matrix3d w = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < p.size(); ++i) {
    w += (p_hat[i] - c_hat) * (p[i] - c).transpose();
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // rank < 2 leaves a rotation about the point line unconstrained
  if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300)) {
    fail(ErrorCode::degenerate,
         "point geometry is collinear or coincident, alignment is ambiguous");
  }
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  RigidMotion out;
  out.rotation =
      Eigen::Quaterniond(svd.matrixU() * d * svd.matrixV().transpose());
  out.translation = c_hat - out.rotation * c;
  out.canonicalize();
  return out;
}

namespace {

double rms_after_alignment(const AssociatedTrack& track, std::size_t begin,
                           std::size_t end) {
  std::vector<Eigen::Vector3d> p, p_hat;
  p.reserve(end - begin);
  p_hat.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    p.push_back(track.pairs[i].est.translation);
    p_hat.push_back(track.pairs[i].gt.translation);
  }
  const RigidMotion T = align_se3(p, p_hat);
  double ss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ss += (T.apply(p[i]) - p_hat[i]).squaredNorm();
  }
  return std::sqrt(ss / static_cast<double>(p.size()));
}

}  // namespace

double ate(const AssociatedTrack& track) {
  return rms_after_alignment(track, 0, track.pairs.size());
}

std::vector<double> per_segment_ate(const AssociatedTrack& track) {
  std::vector<double> out;
  std::size_t begin = 0;
  while (begin < track.pairs.size()) {
    std::size_t end = begin;
    while (end < track.pairs.size() &&
           track.pairs[end].segment == track.pairs[begin].segment) {
      ++end;
    }
    out.push_back(rms_after_alignment(track, begin, end));
    begin = end;
  }
  return out;
}

RpeResult rpe(const AssociatedTrack& track, double delta_s) {
  if (delta_s <= 0.0) fail(ErrorCode::invalid_argument, "delta must be > 0");
  const auto delta_ns =
      static_cast<Timestamp>(std::llround(delta_s * kNsPerSec));
  const auto tol_ns = static_cast<Timestamp>(std::llround(0.1 * delta_s * kNsPerSec));

  const auto& pairs = track.pairs;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // last timestamp per segment: intervals reaching past a segment's end are
  // dropped entirely (the final delta poses of each segment carry no pair)
  std::vector<Timestamp> segment_last;
  for (const auto& p : pairs) {
    const auto seg = static_cast<std::size_t>(p.segment);
    if (seg >= segment_last.size()) segment_last.resize(seg + 1, p.t);
    segment_last[seg] = std::max(segment_last[seg], p.t);
  }

  double ss_trans = 0.0, ss_rot = 0.0;
  std::size_t count = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Timestamp target = pairs[i].t + delta_ns;
    if (target > segment_last[static_cast<std::size_t>(pairs[i].segment)]) {
      continue;
    }
    if (j < i + 1) j = i + 1;
    while (j < pairs.size() && pairs[j].t < target) ++j;
    // nearest of the bracketing samples
    std::size_t best = kNone;
    if (j < pairs.size()) best = j;
    if (j > i + 1 &&
        (best == kNone || target - pairs[j - 1].t < pairs[j].t - target)) {
      best = j - 1;
    }
    if (best == kNone || best <= i) continue;
    if (std::abs(pairs[best].t - target) > tol_ns) continue;
    if (pairs[best].segment != pairs[i].segment) continue;

    const RigidMotion rel_gt =
        compose(pairs[i].gt.inverse(), pairs[best].gt);
    const RigidMotion rel_est =
        compose(pairs[i].est.inverse(), pairs[best].est);
    const RigidMotion e = compose(rel_est.inverse(), rel_gt);
    ss_trans += e.translation.squaredNorm();
    const double ang = so3_log(e.rotation).norm();
    ss_rot += ang * ang;
    ++count;
  }
  if (count == 0) {
    fail(ErrorCode::empty_range,
         "no pose pairs at delta = " + std::to_string(delta_s) + " s");
  }
  RpeResult out;
  out.intervals = count;
  out.trans_m = std::sqrt(ss_trans / static_cast<double>(count));
  out.rot_deg = std::sqrt(ss_rot / static_cast<double>(count)) * 180.0 /
                std::numbers::pi;
  return out;
}

bool classify_divergence(const AssociatedTrack& track, double threshold_m,
                         double end_window_s) {
  if (track.pairs.empty()) fail(ErrorCode::empty_input, "empty track");
  std::size_t begin;
  if (track.segment_count >= 2) {
    const int last_seg = track.pairs.back().segment;
    begin = track.pairs.size();
    while (begin > 0 && track.pairs[begin - 1].segment == last_seg) --begin;
  } else {
    // full-coverage ground truth: end segment = final end_window_s seconds
    const Timestamp cutoff =
        track.pairs.back().t -
        static_cast<Timestamp>(std::llround(end_window_s * kNsPerSec));
    begin = track.pairs.size();
    while (begin > 0 && track.pairs[begin - 1].t >= cutoff) --begin;
  }
  const double end_ate =
      rms_after_alignment(track, begin, track.pairs.size());
  return end_ate > threshold_m;
}

double trajectory_length(const Trajectory& gt) {
  double len = 0.0;
  for (std::size_t i = 1; i < gt.size(); ++i) {
    len += (gt.samples[i].pose.translation - gt.samples[i - 1].pose.translation)
               .norm();
  }
  return len;
}

EvalReport evaluate_trajectories(const Trajectory& gt, const Trajectory& est,
                                 const EvalParams& params) {
  const AssociatedTrack track =
      associate(gt, est, params.max_gap_s, params.gap_threshold_s);
  EvalReport report;
  report.ate_m = ate(track);
  const RpeResult r = rpe(track, params.delta_s);
  report.rpe_trans_m = r.trans_m;
  report.rpe_rot_deg = r.rot_deg;
  report.rpe_intervals = r.intervals;
  report.segment_ate_m = per_segment_ate(track);
  report.diverged = classify_divergence(track, params.divergence_threshold_m,
                                        params.end_window_s);
  report.length_m = trajectory_length(gt);
  report.associated_pairs = track.pairs.size();
  report.segments = track.segment_count;
  return report;
}

}  // namespace vical
