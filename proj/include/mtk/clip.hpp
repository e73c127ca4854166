#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mtk/motion.hpp"
#include "mtk/taxonomy.hpp"

namespace mtk {

// One manifest line.
struct ClipRecord {
  std::string clip_id;
  std::string motion_file;
  double fps = 30.0;
  std::size_t num_frames = 0;
  std::vector<std::string> captions;
  std::string category;
  std::string subcategory;
  std::string atomic_action;
  std::string source;
};

struct ValidityPolicy {
  std::size_t min_frames = 30;
  std::size_t max_frames = 600;  // inclusive
  std::optional<double> required_fps = 30.0;
  double fps_tolerance = 1e-6;
  // Caption count is only enforced when set (datasets ship five per clip).
  std::optional<std::size_t> required_captions;
};

struct Violation {
  std::string rule;
  std::string detail;
};

struct ValidityReport {
  std::string clip_id;
  bool valid = true;
  std::vector<Violation> violations;
};

inline ValidityReport validate_clip(const ClipRecord& record, const MotionSequence& motion,
                                    const ValidityPolicy& policy = {},
                                    const Taxonomy* taxonomy = nullptr) {
  ValidityReport report{record.clip_id, true, {}};
  auto flag = [&](std::string rule, std::string detail) {
    report.violations.push_back({std::move(rule), std::move(detail)});
  };

  const std::size_t frames = motion.num_frames();
  if (frames < policy.min_frames) {
    flag("too_short", std::to_string(frames) + " < " + std::to_string(policy.min_frames) + " frames");
  }
  if (frames > policy.max_frames) {
    flag("too_long", std::to_string(frames) + " > " + std::to_string(policy.max_frames) + " frames");
  }
  if (policy.required_fps && std::abs(motion.fps() - *policy.required_fps) > policy.fps_tolerance) {
    flag("fps", "motion fps " + std::to_string(motion.fps()) + " != " +
                    std::to_string(*policy.required_fps));
  }
  if (record.num_frames != 0 && record.num_frames != frames) {
    flag("frame_count_mismatch", "manifest says " + std::to_string(record.num_frames) +
                                     ", motion has " + std::to_string(frames));
  }
  if (std::abs(record.fps - motion.fps()) > policy.fps_tolerance) {
    flag("fps_mismatch", "manifest fps differs from motion fps");
  }
  if (policy.required_captions && record.captions.size() != *policy.required_captions) {
    flag("caption_count", std::to_string(record.captions.size()) + " captions, expected " +
                              std::to_string(*policy.required_captions));
  }
  if (taxonomy != nullptr && !record.category.empty()) {
    try {
      taxonomy->resolve(record.category, record.subcategory, record.atomic_action);
    } catch (const Error& e) {
      flag("taxonomy", e.what());
    }
  }
  report.valid = report.violations.empty();
  return report;
}

}  // namespace mtk
