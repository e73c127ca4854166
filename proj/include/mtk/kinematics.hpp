#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mtk/errors.hpp"
#include "mtk/motion.hpp"

namespace mtk {

// Root translation plus one local rotation per joint per frame. Joint 0's
// rotation is the root orientation.
class PoseSequence {
 public:
  PoseSequence() = default;

  PoseSequence(double fps, std::vector<Eigen::Vector3d> root_translation,
               std::vector<Eigen::Quaterniond> rotations, std::size_t num_joints)
      : fps_(fps), root_(std::move(root_translation)), rot_(std::move(rotations)), joints_(num_joints) {
    if (!(fps_ > 0.0)) throw Error(Errc::InvalidArgument, "fps must be positive");
    if (root_.empty() || joints_ == 0) throw Error(Errc::InvalidArgument, "empty pose sequence");
    if (rot_.size() != root_.size() * joints_) {
      throw Error(Errc::ShapeMismatch, "rotation count must equal frames * joints");
    }
    for (auto& q : rot_) {
      const double n = q.norm();
      if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-3) {
        throw Error(Errc::BadRotation, "joint rotation is not a unit quaternion");
      }
      q.normalize();
    }
    for (const auto& t : root_) {
      if (!t.allFinite()) throw Error(Errc::NonFinite, "non-finite root translation");
    }
  }

  double fps() const noexcept { return fps_; }
  std::size_t num_frames() const noexcept { return root_.size(); }
  std::size_t num_joints() const noexcept { return joints_; }
  const Eigen::Vector3d& root_translation(std::size_t frame) const { return root_[frame]; }
  const Eigen::Quaterniond& rotation(std::size_t frame, std::size_t joint) const {
    return rot_[frame * joints_ + joint];
  }

 private:
  double fps_ = 30.0;
  std::vector<Eigen::Vector3d> root_;
  std::vector<Eigen::Quaterniond> rot_;
  std::size_t joints_ = 0;
};

// Global joint positions. The root sits at root_translation + its rest offset;
// each child sits at its parent plus the parent's global rotation applied to
// the child's rest offset. Local rotations are carried into the output's
// rotation track.
inline MotionSequence forward_kinematics(const PoseSequence& pose, const Skeleton& skeleton) {
  const std::size_t J = skeleton.num_joints();
  if (pose.num_joints() != J) {
    throw Error(Errc::JointCountMismatch, "pose has " + std::to_string(pose.num_joints()) +
                                              " joints, skeleton has " + std::to_string(J));
  }
  const std::size_t F = pose.num_frames();
  const auto& parents = skeleton.parents();
  const auto& offsets = skeleton.offsets();

  std::vector<double> pos(F * J * 3);
  std::vector<double> rot(F * J * 4);
  std::vector<Eigen::Quaterniond> global(J);
  std::vector<Eigen::Vector3d> world(J);
  for (std::size_t t = 0; t < F; ++t) {
    global[0] = pose.rotation(t, 0);
    world[0] = pose.root_translation(t) + offsets[0];
    for (std::size_t j = 1; j < J; ++j) {
      const auto p = static_cast<std::size_t>(parents[j]);
      world[j] = world[p] + global[p] * offsets[j];
      global[j] = global[p] * pose.rotation(t, j);
    }
    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t b = t * J + j;
      pos[b * 3] = world[j].x();
      pos[b * 3 + 1] = world[j].y();
      pos[b * 3 + 2] = world[j].z();
      const auto& q = pose.rotation(t, j);
      rot[b * 4] = q.w();
      rot[b * 4 + 1] = q.x();
      rot[b * 4 + 2] = q.y();
      rot[b * 4 + 3] = q.z();
    }
  }
  return MotionSequence(F, J, pose.fps(), std::move(pos), std::move(rot));
}

// Order-k forward differences (meters per frame^k), padded to F frames by
// repeating the last valid entry.
inline JointDerivatives finite_differences(const MotionSequence& motion, int order) {
  if (order < 1 || order > 3) throw Error(Errc::InvalidArgument, "derivative order must be 1, 2 or 3");
  const std::size_t F = motion.num_frames();
  const std::size_t J = motion.num_joints();
  if (F < static_cast<std::size_t>(order) + 1) {
    throw Error(Errc::TooFewFrames, "order-" + std::to_string(order) + " differences need at least " +
                                        std::to_string(order + 1) + " frames, got " + std::to_string(F));
  }
  const std::size_t stride = J * 3;
  std::vector<double> cur(motion.positions().begin(), motion.positions().end());
  std::size_t valid = F;
  for (int k = 0; k < order; ++k) {
    for (std::size_t t = 0; t + 1 < valid; ++t) {
      for (std::size_t c = 0; c < stride; ++c) {
        cur[t * stride + c] = cur[(t + 1) * stride + c] - cur[t * stride + c];
      }
    }
    --valid;
  }
  for (std::size_t t = valid; t < F; ++t) {
    std::copy_n(cur.begin() + static_cast<std::ptrdiff_t>((valid - 1) * stride), stride,
                cur.begin() + static_cast<std::ptrdiff_t>(t * stride));
  }
  JointDerivatives out;
  out.num_frames = F;
  out.num_joints = J;
  out.values = std::move(cur);
  out.derivation.order = order;
  return out;
}

// Linear position resampling (shortest-arc slerp for rotations). Output frame
// count is round((F-1) * target / fps) + 1, at least 2; samples are spaced
// uniformly over the source time span so both endpoints are kept exactly.
inline MotionSequence resample(const MotionSequence& motion, double target_fps) {
  if (!(target_fps > 0.0) || !std::isfinite(target_fps)) {
    throw Error(Errc::InvalidArgument, "target fps must be positive");
  }
  const std::size_t F = motion.num_frames();
  if (F < 2) throw Error(Errc::TooFewFrames, "resampling needs at least 2 frames");
  if (target_fps == motion.fps()) return motion;

  const std::size_t J = motion.num_joints();
  const auto span_frames = static_cast<double>(F - 1) * target_fps / motion.fps();
  const std::size_t out_frames = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(span_frames)) + 1);

  const auto src = motion.positions();
  const auto src_rot = motion.rotations();
  std::vector<double> pos(out_frames * J * 3);
  std::vector<double> rot(motion.has_rotations() ? out_frames * J * 4 : 0);
  for (std::size_t k = 0; k < out_frames; ++k) {
    const double u = static_cast<double>(k) * static_cast<double>(F - 1) / static_cast<double>(out_frames - 1);
    auto i0 = static_cast<std::size_t>(std::floor(u));
    double frac = u - static_cast<double>(i0);
    if (i0 >= F - 1) {
      i0 = F - 1;
      frac = 0.0;
    }
    const std::size_t i1 = std::min(i0 + 1, F - 1);
    for (std::size_t c = 0; c < J * 3; ++c) {
      const double a = src[i0 * J * 3 + c];
      pos[k * J * 3 + c] = frac == 0.0 ? a : (1.0 - frac) * a + frac * src[i1 * J * 3 + c];
    }
    if (!rot.empty()) {
      for (std::size_t j = 0; j < J; ++j) {
        const double* qa = src_rot.data() + (i0 * J + j) * 4;
        const double* qb = src_rot.data() + (i1 * J + j) * 4;
        Eigen::Quaterniond q(qa[0], qa[1], qa[2], qa[3]);
        if (frac != 0.0) q = q.slerp(frac, Eigen::Quaterniond(qb[0], qb[1], qb[2], qb[3]));
        double* out = rot.data() + (k * J + j) * 4;
        out[0] = q.w();
        out[1] = q.x();
        out[2] = q.y();
        out[3] = q.z();
      }
    }
  }
  return MotionSequence(out_frames, J, target_fps, std::move(pos), std::move(rot));
}

// Joint indices used to anchor, orient and scale a clip. Defaults follow the
// 24-joint SMPL ordering (pelvis, left_hip, right_hip, ..., head = 15).
struct CanonicalizeConfig {
  std::size_t root_joint = 0;
  std::size_t left_hip = 1;
  std::size_t right_hip = 2;
  std::size_t head_joint = 15;
  double reference_height = 1.7;  // meters
  std::size_t ground_window = 10;  // frames searched for the lowest foot
  double degenerate_tolerance = 1e-6;
};

// Horizontal facing direction at a frame: up x (right_hip - left_hip).
inline Eigen::Vector3d facing_direction(const MotionSequence& motion, std::size_t frame,
                                        const CanonicalizeConfig& cfg = {}) {
  Eigen::Vector3d across = motion.position(frame, cfg.right_hip) - motion.position(frame, cfg.left_hip);
  across.y() = 0.0;
  if (across.norm() < cfg.degenerate_tolerance) {
    throw Error(Errc::DegenerateFacing, "hip axis is vertical; facing is undefined");
  }
  return Eigen::Vector3d::UnitY().cross(across).normalized();
}

// Heading of the facing direction relative to +Z, radians, positive toward +X.
inline double facing_angle(const MotionSequence& motion, std::size_t frame, const CanonicalizeConfig& cfg = {}) {
  const Eigen::Vector3d f = facing_direction(motion, frame, cfg);
  return std::atan2(f.x(), f.z());
}

// Bone-chain height on frame 0: head-to-root path length plus the longest
// root-to-foot path. Invariant to pose for rigid skeletons.
inline double body_height(const MotionSequence& motion, const Skeleton& skeleton, const CanonicalizeConfig& cfg = {}) {
  const auto& parents = skeleton.parents();
  auto chain_length = [&](std::size_t joint) {
    double len = 0.0;
    while (joint != cfg.root_joint && parents[joint] >= 0) {
      const auto p = static_cast<std::size_t>(parents[joint]);
      len += (motion.position(0, joint) - motion.position(0, p)).norm();
      joint = p;
    }
    return len;
  };
  if (skeleton.foot_joints().empty()) throw Error(Errc::NoFootJoints, "skeleton declares no foot joints");
  double leg = 0.0;
  for (std::size_t f : skeleton.foot_joints()) leg = std::max(leg, chain_length(f));
  return chain_length(cfg.head_joint) + leg;
}

// Anchor frame-0 root at the XZ origin, turn about +Y so frame 0 faces +Z,
// put the lowest foot of the first frames on y = 0, then scale uniformly to
// the reference height.
inline MotionSequence canonicalize(const MotionSequence& motion, const Skeleton& skeleton,
                                   const CanonicalizeConfig& cfg = {}) {
  const std::size_t F = motion.num_frames();
  const std::size_t J = motion.num_joints();
  if (skeleton.num_joints() != J) {
    throw Error(Errc::JointCountMismatch, "motion and skeleton joint counts differ");
  }
  for (std::size_t idx : {cfg.root_joint, cfg.left_hip, cfg.right_hip, cfg.head_joint}) {
    if (idx >= J) throw Error(Errc::InvalidArgument, "canonicalization joint index out of range");
  }
  if (skeleton.foot_joints().empty()) throw Error(Errc::NoFootJoints, "skeleton declares no foot joints");

  const double heading = facing_angle(motion, 0, cfg);
  const Eigen::Matrix3d turn = Eigen::AngleAxisd(-heading, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Quaterniond turn_q(Eigen::AngleAxisd(-heading, Eigen::Vector3d::UnitY()));
  Eigen::Vector3d anchor = motion.position(0, cfg.root_joint);
  anchor.y() = 0.0;

  std::vector<double> pos(F * J * 3);
  for (std::size_t t = 0; t < F; ++t) {
    for (std::size_t j = 0; j < J; ++j) {
      const Eigen::Vector3d p = turn * (motion.position(t, j) - anchor);
      const std::size_t b = (t * J + j) * 3;
      pos[b] = p.x();
      pos[b + 1] = p.y();
      pos[b + 2] = p.z();
    }
  }

  double floor = std::numeric_limits<double>::infinity();
  const std::size_t window = std::min(F, std::max<std::size_t>(cfg.ground_window, 1));
  for (std::size_t t = 0; t < window; ++t)
    for (std::size_t f : skeleton.foot_joints()) floor = std::min(floor, pos[(t * J + f) * 3 + 1]);
  for (std::size_t i = 1; i < pos.size(); i += 3) pos[i] -= floor;

  std::vector<double> rot(motion.rotations().begin(), motion.rotations().end());
  if (!rot.empty()) {
    for (std::size_t t = 0; t < F; ++t) {
      double* q = rot.data() + (t * J + cfg.root_joint) * 4;
      const Eigen::Quaterniond r = turn_q * Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
      q[0] = r.w();
      q[1] = r.x();
      q[2] = r.y();
      q[3] = r.z();
    }
  }

  MotionSequence placed(F, J, motion.fps(), std::move(pos), rot);
  const double height = body_height(placed, skeleton, cfg);
  if (!(height > 0.0)) throw Error(Errc::InvalidArgument, "body height is zero; cannot standardize scale");
  const double scale = cfg.reference_height / height;
  std::vector<double> scaled(placed.positions().begin(), placed.positions().end());
  for (auto& v : scaled) v *= scale;
  return MotionSequence(F, J, motion.fps(), std::move(scaled), std::move(rot));
}

}  // namespace mtk
