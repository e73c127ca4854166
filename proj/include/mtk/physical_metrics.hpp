#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mtk/errors.hpp"
#include "mtk/kinematics.hpp"
#include "mtk/motion.hpp"

namespace mtk {

struct DynamicScoreConfig {
  double w_temporal = 0.7;
  double w_spatial = 0.3;

  void validate() const {
    if (!(w_temporal >= 0.0) || !(w_spatial >= 0.0) || !(w_temporal + w_spatial > 0.0)) {
      throw Error(Errc::InvalidArgument, "dynamic score weights must be >= 0 with a positive sum");
    }
  }
};

struct DynamicScoreResult {
  double s_temporal = 0.0;
  double s_spatial = 0.0;
  double s_dynamic = 0.0;
};

// S_temporal: mean velocity norm over all F*J padded entries.
// S_spatial: mean over joints of || per-axis (max - min) || of the trajectory.
// S_dynamic = w_temporal * S_temporal + w_spatial * S_spatial.
inline DynamicScoreResult dynamic_score(const MotionSequence& motion, const JointVelocities& velocities,
                                        const DynamicScoreConfig& cfg = {}) {
  cfg.validate();
  const std::size_t F = motion.num_frames();
  const std::size_t J = motion.num_joints();
  if (velocities.num_frames != F || velocities.num_joints != J || velocities.values.size() != F * J * 3) {
    throw Error(Errc::ShapeMismatch, "velocity array does not match motion shape");
  }

  double speed_sum = 0.0;
  for (std::size_t i = 0; i < F * J; ++i) {
    const double* v = velocities.values.data() + i * 3;
    speed_sum += std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }

  double extent_sum = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    Eigen::Vector3d lo = motion.position(0, j);
    Eigen::Vector3d hi = lo;
    for (std::size_t t = 1; t < F; ++t) {
      const Eigen::Vector3d p = motion.position(t, j);
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    extent_sum += (hi - lo).norm();
  }

  DynamicScoreResult r;
  r.s_temporal = speed_sum / static_cast<double>(F * J);
  r.s_spatial = extent_sum / static_cast<double>(J);
  r.s_dynamic = cfg.w_temporal * r.s_temporal + cfg.w_spatial * r.s_spatial;
  return r;
}

inline DynamicScoreResult dynamic_score(const MotionSequence& motion, const DynamicScoreConfig& cfg = {}) {
  return dynamic_score(motion, finite_differences(motion, 1), cfg);
}

// Thresholds have no published values; these are the toolbox defaults.
struct PhysicalMetricConfig {
  double contact_height = 0.05;        // m
  double float_height = 0.05;          // m
  double accel_peak_threshold = 2.0;   // m/s^2
  std::vector<std::size_t> foot_joints;

  void validate() const {
    if (!(contact_height > 0.0) || !(float_height > 0.0) || !(accel_peak_threshold > 0.0)) {
      throw Error(Errc::InvalidArgument, "physical metric thresholds must be positive");
    }
  }
};

// Mean per frame of the summed horizontal displacement of foot joints that are
// below contact_height in that frame. Meters per frame.
inline double foot_skating(const MotionSequence& motion, const PhysicalMetricConfig& cfg) {
  cfg.validate();
  if (cfg.foot_joints.empty()) throw Error(Errc::NoFootJoints, "foot skating needs foot joints");
  for (std::size_t f : cfg.foot_joints) {
    if (f >= motion.num_joints()) throw Error(Errc::InvalidArgument, "foot joint index out of range");
  }
  const JointVelocities vel = finite_differences(motion, 1);
  const std::size_t F = motion.num_frames();
  double sum = 0.0;
  for (std::size_t t = 0; t < F; ++t) {
    for (std::size_t f : cfg.foot_joints) {
      if (motion.coord(t, f, 1) >= cfg.contact_height) continue;
      const Eigen::Vector3d v = vel.at(t, f);
      sum += std::hypot(v.x(), v.z());
    }
  }
  return sum / static_cast<double>(F);
}

// Mean over frames of how far the lowest joint dips below y = 0.
inline double ground_penetration(const MotionSequence& motion) {
  const std::size_t F = motion.num_frames();
  double sum = 0.0;
  for (std::size_t t = 0; t < F; ++t) {
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < motion.num_joints(); ++j) lowest = std::min(lowest, motion.coord(t, j, 1));
    sum += std::max(0.0, -lowest);
  }
  return sum / static_cast<double>(F);
}

// Mean over frames of how far the lowest joint sits above float_height.
inline double floating(const MotionSequence& motion, const PhysicalMetricConfig& cfg) {
  cfg.validate();
  const std::size_t F = motion.num_frames();
  double sum = 0.0;
  for (std::size_t t = 0; t < F; ++t) {
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < motion.num_joints(); ++j) lowest = std::min(lowest, motion.coord(t, j, 1));
    sum += std::max(0.0, lowest - cfg.float_height);
  }
  return sum / static_cast<double>(F);
}

// Mean third-difference norm, meters per frame^3.
inline double jerk_per_frame(const MotionSequence& motion) {
  if (motion.num_frames() < 4) throw Error(Errc::TooFewFrames, "jerk needs at least 4 frames");
  const JointDerivatives d3 = finite_differences(motion, 3);
  const std::size_t n = motion.num_frames() * motion.num_joints();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* v = d3.values.data() + i * 3;
    sum += std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  return sum / static_cast<double>(n);
}

// Mean jerk magnitude in meters per second^3.
inline double jerk(const MotionSequence& motion) {
  const double fps = motion.fps();
  return jerk_per_frame(motion) * fps * fps * fps;
}

// Frames whose largest joint acceleration exceeds the threshold, per second
// of clip duration (F / fps). Only the F-2 unpadded second differences count.
inline double acceleration_peaks(const MotionSequence& motion, const PhysicalMetricConfig& cfg) {
  cfg.validate();
  const std::size_t F = motion.num_frames();
  if (F < 3) throw Error(Errc::TooFewFrames, "acceleration peaks need at least 3 frames");
  const JointDerivatives d2 = finite_differences(motion, 2);
  const double to_si = motion.fps() * motion.fps();
  std::size_t peaks = 0;
  for (std::size_t t = 0; t + 2 < F; ++t) {
    double largest = 0.0;
    for (std::size_t j = 0; j < motion.num_joints(); ++j) largest = std::max(largest, d2.at(t, j).norm() * to_si);
    if (largest > cfg.accel_peak_threshold) ++peaks;
  }
  return static_cast<double>(peaks) / motion.duration_seconds();
}

// Every metric that the clip is long enough for, keyed by report name.
inline std::map<std::string, double> compute_clip_metrics(const MotionSequence& motion,
                                                          const PhysicalMetricConfig& physical,
                                                          const DynamicScoreConfig& dynamic = {}) {
  std::map<std::string, double> out;
  if (motion.num_frames() >= 2) {
    const DynamicScoreResult ds = dynamic_score(motion, dynamic);
    out["s_temporal"] = ds.s_temporal;
    out["s_spatial"] = ds.s_spatial;
    out["dynamic_score"] = ds.s_dynamic;
    if (!physical.foot_joints.empty()) out["foot_skating"] = foot_skating(motion, physical);
  }
  out["ground_penetration"] = ground_penetration(motion);
  out["floating"] = floating(motion, physical);
  if (motion.num_frames() >= 4) {
    out["jerk"] = jerk(motion);
    out["jerk_per_frame3"] = jerk_per_frame(motion);
  }
  if (motion.num_frames() >= 3) out["acceleration_peaks"] = acceleration_peaks(motion, physical);
  return out;
}

}  // namespace mtk
