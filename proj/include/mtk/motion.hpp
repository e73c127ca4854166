#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mtk/errors.hpp"

namespace mtk {

// Joint positions for a clip: frames x joints x 3, meters, Y-up, ground at y = 0.
// Storage is row-major frame-by-frame then joint-by-joint. An optional rotation
// track holds one (w, x, y, z) quaternion per frame and joint.
class MotionSequence {
 public:
  MotionSequence() = default;

  MotionSequence(std::size_t num_frames, std::size_t num_joints, double fps,
                 std::vector<double> positions, std::vector<double> rotations = {})
      : frames_(num_frames),
        joints_(num_joints),
        fps_(fps),
        positions_(std::move(positions)),
        rotations_(std::move(rotations)) {
    if (frames_ < 1 || joints_ < 1) {
      throw Error(Errc::InvalidArgument, "motion needs at least one frame and one joint");
    }
    if (!(fps_ > 0.0) || !std::isfinite(fps_)) {
      throw Error(Errc::InvalidArgument, "fps must be positive and finite");
    }
    if (positions_.size() != frames_ * joints_ * 3) {
      throw Error(Errc::ShapeMismatch, "position buffer does not hold F*J*3 values");
    }
    if (!rotations_.empty() && rotations_.size() != frames_ * joints_ * 4) {
      throw Error(Errc::ShapeMismatch, "rotation buffer does not hold F*J*4 values");
    }
    for (double v : positions_) {
      if (!std::isfinite(v)) throw Error(Errc::NonFinite, "non-finite joint coordinate");
    }
    for (double v : rotations_) {
      if (!std::isfinite(v)) throw Error(Errc::NonFinite, "non-finite rotation component");
    }
  }

  // Builds a motion by sampling fn(frame, joint) -> Eigen::Vector3d.
  template <class Fn>
  static MotionSequence from_fn(std::size_t num_frames, std::size_t num_joints, double fps, Fn&& fn) {
    std::vector<double> pos(num_frames * num_joints * 3);
    for (std::size_t t = 0; t < num_frames; ++t) {
      for (std::size_t j = 0; j < num_joints; ++j) {
        const Eigen::Vector3d p = fn(t, j);
        const std::size_t base = (t * num_joints + j) * 3;
        pos[base] = p.x();
        pos[base + 1] = p.y();
        pos[base + 2] = p.z();
      }
    }
    return MotionSequence(num_frames, num_joints, fps, std::move(pos));
  }

  std::size_t num_frames() const noexcept { return frames_; }
  std::size_t num_joints() const noexcept { return joints_; }
  double fps() const noexcept { return fps_; }
  double duration_seconds() const noexcept { return static_cast<double>(frames_) / fps_; }

  std::span<const double> positions() const noexcept { return positions_; }
  bool has_rotations() const noexcept { return !rotations_.empty(); }
  std::span<const double> rotations() const noexcept { return rotations_; }

  double coord(std::size_t frame, std::size_t joint, std::size_t axis) const {
    return positions_[(frame * joints_ + joint) * 3 + axis];
  }

  Eigen::Vector3d position(std::size_t frame, std::size_t joint) const {
    const std::size_t base = (frame * joints_ + joint) * 3;
    return {positions_[base], positions_[base + 1], positions_[base + 2]};
  }

 private:
  std::size_t frames_ = 0;
  std::size_t joints_ = 0;
  double fps_ = 30.0;
  std::vector<double> positions_;
  std::vector<double> rotations_;
};

// How a derivative array was produced.
struct Derivation {
  int order = 1;
  std::string scheme = "forward";
  std::string padding = "repeat-last";
};

// Order-k forward differences of joint positions, padded to F frames.
// Units are meters per frame^k.
struct JointDerivatives {
  std::size_t num_frames = 0;
  std::size_t num_joints = 0;
  std::vector<double> values;
  Derivation derivation;

  Eigen::Vector3d at(std::size_t frame, std::size_t joint) const {
    const std::size_t base = (frame * num_joints + joint) * 3;
    return {values[base], values[base + 1], values[base + 2]};
  }
};

using JointVelocities = JointDerivatives;

// Kinematic tree. Joint 0 is the root; parents precede children.
class Skeleton {
 public:
  Skeleton() = default;

  Skeleton(std::vector<int> parents, std::vector<Eigen::Vector3d> offsets,
           std::vector<std::string> names, std::vector<std::size_t> foot_joints)
      : parents_(std::move(parents)),
        offsets_(std::move(offsets)),
        names_(std::move(names)),
        foot_joints_(std::move(foot_joints)) {
    const std::size_t n = parents_.size();
    if (n == 0) throw Error(Errc::InvalidArgument, "skeleton has no joints");
    if (offsets_.size() != n) throw Error(Errc::ShapeMismatch, "offset count differs from joint count");
    if (names_.empty()) {
      for (std::size_t j = 0; j < n; ++j) names_.push_back("joint_" + std::to_string(j));
    }
    if (names_.size() != n) throw Error(Errc::ShapeMismatch, "name count differs from joint count");
    if (parents_[0] != -1) throw Error(Errc::InvalidArgument, "joint 0 must be the root (parent -1)");
    for (std::size_t j = 1; j < n; ++j) {
      if (parents_[j] < 0 || static_cast<std::size_t>(parents_[j]) >= j) {
        throw Error(Errc::InvalidArgument,
                    "joint " + std::to_string(j) + " must have a parent with a smaller index");
      }
    }
    for (std::size_t f : foot_joints_) {
      if (f >= n) throw Error(Errc::InvalidArgument, "foot joint index out of range");
    }
    for (const auto& o : offsets_) {
      if (!o.allFinite()) throw Error(Errc::NonFinite, "non-finite rest offset");
    }
  }

  std::size_t num_joints() const noexcept { return parents_.size(); }
  const std::vector<int>& parents() const noexcept { return parents_; }
  const std::vector<Eigen::Vector3d>& offsets() const noexcept { return offsets_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::size_t>& foot_joints() const noexcept { return foot_joints_; }

  int find(const std::string& name) const {
    for (std::size_t j = 0; j < names_.size(); ++j) {
      if (names_[j] == name) return static_cast<int>(j);
    }
    return -1;
  }

  // Global rest-pose joint positions (identity rotations, root at its offset).
  std::vector<Eigen::Vector3d> rest_positions() const {
    std::vector<Eigen::Vector3d> out(num_joints());
    out[0] = offsets_[0];
    for (std::size_t j = 1; j < num_joints(); ++j) out[j] = out[parents_[j]] + offsets_[j];
    return out;
  }

 private:
  std::vector<int> parents_;
  std::vector<Eigen::Vector3d> offsets_;
  std::vector<std::string> names_;
  std::vector<std::size_t> foot_joints_;
};

}  // namespace mtk
