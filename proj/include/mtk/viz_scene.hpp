#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "mtk/clip.hpp"
#include "mtk/errors.hpp"
#include "mtk/motion.hpp"

namespace mtk {

inline constexpr int kSceneVersion = 1;
inline constexpr std::size_t kMaxSceneTracks = 16;

struct VizTrack {
  std::string clip_id;
  double fps = 30.0;
  std::string caption;
  std::map<std::string, double> badges;
  std::vector<std::vector<Eigen::Vector3d>> frames;  // [frame][joint]
};

struct VizScene {
  int version = kSceneVersion;
  std::vector<int> parents;
  std::vector<std::string> names;
  std::vector<VizTrack> tracks;
};

struct VizClip {
  ClipRecord record;
  MotionSequence motion;
  std::map<std::string, double> badges;
};

struct VizOptions {
  std::size_t stride = 1;
};

// 0, s, 2s, ... and always the last frame.
inline std::vector<std::size_t> decimation_indices(std::size_t num_frames, std::size_t stride) {
  if (stride == 0) throw Error(Errc::InvalidArgument, "decimation stride must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t t = 0; t < num_frames; t += stride) idx.push_back(t);
  if (num_frames > 0 && idx.back() != num_frames - 1) idx.push_back(num_frames - 1);
  return idx;
}

inline VizScene export_viz_scene(const std::vector<VizClip>& clips, const Skeleton& skeleton,
                                 const VizOptions& options = {}) {
  if (clips.size() > kMaxSceneTracks) {
    throw Error(Errc::TooManyTracks, std::to_string(clips.size()) + " tracks exceed the limit of " +
                                         std::to_string(kMaxSceneTracks));
  }
  VizScene scene;
  scene.parents = skeleton.parents();
  scene.names = skeleton.names();
  for (const auto& clip : clips) {
    if (clip.motion.num_joints() != skeleton.num_joints()) {
      throw Error(Errc::JointCountMismatch, "clip '" + clip.record.clip_id + "' has " +
                                                std::to_string(clip.motion.num_joints()) + " joints, skeleton has " +
                                                std::to_string(skeleton.num_joints()));
    }
    VizTrack track;
    track.clip_id = clip.record.clip_id;
    track.fps = clip.motion.fps() / static_cast<double>(options.stride);
    track.caption = clip.record.captions.empty() ? std::string{} : clip.record.captions.front();
    track.badges = clip.badges;
    for (std::size_t t : decimation_indices(clip.motion.num_frames(), options.stride)) {
      std::vector<Eigen::Vector3d> frame(clip.motion.num_joints());
      for (std::size_t j = 0; j < frame.size(); ++j) frame[j] = clip.motion.position(t, j);
      track.frames.push_back(std::move(frame));
    }
    scene.tracks.push_back(std::move(track));
  }
  return scene;
}

inline nlohmann::ordered_json scene_to_json(const VizScene& scene) {
  nlohmann::ordered_json j;
  j["version"] = scene.version;
  j["skeleton"] = {{"parents", scene.parents}, {"names", scene.names}};
  j["tracks"] = nlohmann::ordered_json::array();
  for (const auto& t : scene.tracks) {
    nlohmann::ordered_json tj;
    tj["clip_id"] = t.clip_id;
    tj["fps"] = t.fps;
    tj["caption"] = t.caption;
    tj["badges"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.badges) tj["badges"][k] = v;
    auto frames = nlohmann::ordered_json::array();
    for (const auto& f : t.frames) {
      auto joints = nlohmann::ordered_json::array();
      for (const auto& p : f) joints.push_back({p.x(), p.y(), p.z()});
      frames.push_back(std::move(joints));
    }
    tj["frames"] = std::move(frames);
    j["tracks"].push_back(std::move(tj));
  }
  return j;
}

// Validates a scene document the way the viewer does; SchemaError messages
// name the offending path, e.g. "tracks[0].frames[3]".
inline VizScene parse_viz_scene(const nlohmann::ordered_json& j) {
  auto fail = [](const std::string& path, const std::string& why) {
    throw Error(Errc::SchemaError, path + ": " + why);
  };
  if (!j.is_object()) fail("$", "scene must be an object");
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kSceneVersion) {
    fail("version", "expected 1");
  }
  VizScene scene;
  if (!j.contains("skeleton") || !j["skeleton"].is_object()) fail("skeleton", "missing object");
  const auto& sk = j["skeleton"];
  if (!sk.contains("parents") || !sk["parents"].is_array()) fail("skeleton.parents", "missing array");
  for (std::size_t i = 0; i < sk["parents"].size(); ++i) {
    const auto& p = sk["parents"][i];
    if (!p.is_number_integer()) fail("skeleton.parents[" + std::to_string(i) + "]", "not an integer");
    const int v = p.get<int>();
    if ((i == 0 && v != -1) || (i > 0 && (v < 0 || v >= static_cast<int>(i)))) {
      fail("skeleton.parents[" + std::to_string(i) + "]", "invalid parent index");
    }
    scene.parents.push_back(v);
  }
  const std::size_t J = scene.parents.size();
  if (J == 0) fail("skeleton.parents", "empty");
  if (sk.contains("names")) {
    if (!sk["names"].is_array() || sk["names"].size() != J) fail("skeleton.names", "must list one name per joint");
    for (const auto& n : sk["names"]) {
      if (!n.is_string()) fail("skeleton.names", "names must be strings");
      scene.names.push_back(n.get<std::string>());
    }
  }
  if (!j.contains("tracks") || !j["tracks"].is_array()) fail("tracks", "missing array");
  if (j["tracks"].size() > kMaxSceneTracks) fail("tracks", "more than 16 tracks");
  for (std::size_t ti = 0; ti < j["tracks"].size(); ++ti) {
    const std::string tp = "tracks[" + std::to_string(ti) + "]";
    const auto& tj = j["tracks"][ti];
    if (!tj.is_object()) fail(tp, "track must be an object");
    VizTrack t;
    if (!tj.contains("clip_id") || !tj["clip_id"].is_string()) fail(tp + ".clip_id", "missing string");
    t.clip_id = tj["clip_id"].get<std::string>();
    if (!tj.contains("fps") || !tj["fps"].is_number() || !(tj["fps"].get<double>() > 0.0)) {
      fail(tp + ".fps", "must be a positive number");
    }
    t.fps = tj["fps"].get<double>();
    if (tj.contains("caption")) {
      if (!tj["caption"].is_string()) fail(tp + ".caption", "must be a string");
      t.caption = tj["caption"].get<std::string>();
    }
    if (tj.contains("badges")) {
      if (!tj["badges"].is_object()) fail(tp + ".badges", "must be an object");
      for (const auto& [k, v] : tj["badges"].items()) {
        if (!v.is_number()) fail(tp + ".badges." + k, "must be a number");
        t.badges[k] = v.get<double>();
      }
    }
    if (!tj.contains("frames") || !tj["frames"].is_array() || tj["frames"].empty()) {
      fail(tp + ".frames", "must be a non-empty array");
    }
    for (std::size_t fi = 0; fi < tj["frames"].size(); ++fi) {
      const std::string fp = tp + ".frames[" + std::to_string(fi) + "]";
      const auto& fj = tj["frames"][fi];
      if (!fj.is_array()) fail(fp, "frame must be an array");
      if (fj.size() != J) {
        fail(fp, "has " + std::to_string(fj.size()) + " joints, skeleton has " + std::to_string(J));
      }
      std::vector<Eigen::Vector3d> frame;
      frame.reserve(J);
      for (std::size_t k = 0; k < J; ++k) {
        const auto& pj = fj[k];
        if (!pj.is_array() || pj.size() != 3 || !pj[0].is_number() || !pj[1].is_number() || !pj[2].is_number()) {
          fail(fp + "[" + std::to_string(k) + "]", "joint must be [x, y, z]");
        }
        frame.emplace_back(pj[0].get<double>(), pj[1].get<double>(), pj[2].get<double>());
      }
      t.frames.push_back(std::move(frame));
    }
    scene.tracks.push_back(std::move(t));
  }
  return scene;
}

}  // namespace mtk
