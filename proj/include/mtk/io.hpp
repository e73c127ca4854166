#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "mtk/clip.hpp"
#include "mtk/errors.hpp"
#include "mtk/motion.hpp"
#include "mtk/taxonomy.hpp"

namespace mtk {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Little-endian primitives
// ---------------------------------------------------------------------------
namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[offset + i]) << (8 * i);
  return v;
}

inline float get_f32(std::span<const std::uint8_t> in, std::size_t offset) {
  return std::bit_cast<float>(get_u32(in, offset));
}

inline float narrow_finite(double v) {
  const auto f = static_cast<float>(v);
  if (!std::isfinite(f)) throw Error(Errc::NonFinite, "value does not fit a 32-bit float");
  return f;
}

}  // namespace detail

inline std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "short write to " + path.string());
}

inline void write_text_file(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// .mot binary
//
//   magic "MOT1" | u32 version=1 | u32 F | u32 J | f32 fps | u32 sections
//   positions: F*J*3 f32 (frame-major, then joint, then xyz)
//   rotations (sections bit 1): F*J*4 f32 quaternions (w, x, y, z)
// ---------------------------------------------------------------------------
inline constexpr char kMotionMagic[4] = {'M', 'O', 'T', '1'};
inline constexpr std::uint32_t kMotionVersion = 1;
inline constexpr std::uint32_t kSectionPositions = 1u << 0;
inline constexpr std::uint32_t kSectionRotations = 1u << 1;
inline constexpr std::size_t kMotionHeaderBytes = 24;
inline constexpr double kRotationNormTolerance = 1e-3;

struct MotionFileHeader {
  std::uint32_t version = kMotionVersion;
  std::uint32_t num_frames = 0;
  std::uint32_t num_joints = 0;
  float fps = 30.0f;
  std::uint32_t sections = kSectionPositions;
};

inline std::vector<std::uint8_t> encode_motion(const MotionSequence& motion) {
  const std::size_t count = motion.num_frames() * motion.num_joints();
  std::vector<std::uint8_t> out;
  out.reserve(kMotionHeaderBytes + count * (motion.has_rotations() ? 28 : 12));
  out.insert(out.end(), std::begin(kMotionMagic), std::end(kMotionMagic));
  detail::put_u32(out, kMotionVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(motion.num_frames()));
  detail::put_u32(out, static_cast<std::uint32_t>(motion.num_joints()));
  detail::put_f32(out, detail::narrow_finite(motion.fps()));
  detail::put_u32(out, kSectionPositions | (motion.has_rotations() ? kSectionRotations : 0u));
  for (double v : motion.positions()) detail::put_f32(out, detail::narrow_finite(v));
  for (double v : motion.rotations()) detail::put_f32(out, detail::narrow_finite(v));
  return out;
}

inline MotionFileHeader decode_motion_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMotionMagic, 4) != 0) {
    throw Error(Errc::BadMagic, "not a MOT1 file");
  }
  if (bytes.size() < kMotionHeaderBytes) throw Error(Errc::TruncatedPayload, "header cut short");
  MotionFileHeader h;
  h.version = detail::get_u32(bytes, 4);
  if (h.version != kMotionVersion) {
    throw Error(Errc::UnsupportedVersion, "motion file version " + std::to_string(h.version));
  }
  h.num_frames = detail::get_u32(bytes, 8);
  h.num_joints = detail::get_u32(bytes, 12);
  h.fps = detail::get_f32(bytes, 16);
  h.sections = detail::get_u32(bytes, 20);
  if ((h.sections & kSectionPositions) == 0) {
    throw Error(Errc::InvalidArgument, "positions section flag not set");
  }
  return h;
}

inline MotionSequence decode_motion(std::span<const std::uint8_t> bytes) {
  const MotionFileHeader h = decode_motion_header(bytes);
  // 64-bit arithmetic: u32 * u32 * 28 cannot overflow.
  const std::uint64_t count = std::uint64_t{h.num_frames} * h.num_joints;
  const bool rotations = (h.sections & kSectionRotations) != 0;
  const std::uint64_t need = kMotionHeaderBytes + count * 12 + (rotations ? count * 16 : 0);
  if (need > bytes.size()) {
    throw Error(Errc::TruncatedPayload, "declared " + std::to_string(h.num_frames) + "x" +
                                            std::to_string(h.num_joints) + " payload exceeds " +
                                            std::to_string(bytes.size()) + " bytes");
  }
  std::size_t off = kMotionHeaderBytes;
  std::vector<double> pos(count * 3);
  for (auto& v : pos) {
    v = detail::get_f32(bytes, off);
    off += 4;
  }
  std::vector<double> rot;
  if (rotations) {
    rot.resize(count * 4);
    for (auto& v : rot) {
      v = detail::get_f32(bytes, off);
      off += 4;
    }
    for (std::size_t q = 0; q < count; ++q) {
      double* c = rot.data() + q * 4;
      const double n = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
      if (!(std::abs(n - 1.0) <= kRotationNormTolerance)) {
        throw Error(Errc::BadRotation, "quaternion " + std::to_string(q) + " has norm " +
                                           std::to_string(n));
      }
      // Float-precision unit quaternions are left untouched so payloads round-trip.
      if (std::abs(n - 1.0) > 1e-6) {
        for (int k = 0; k < 4; ++k) c[k] /= n;
      }
    }
  }
  return MotionSequence(h.num_frames, h.num_joints, h.fps, std::move(pos), std::move(rot));
}

inline void write_motion(const MotionSequence& motion, const fs::path& path) {
  write_file_bytes(path, encode_motion(motion));
}

inline MotionSequence read_motion(const fs::path& path) { return decode_motion(read_file_bytes(path)); }

// ---------------------------------------------------------------------------
// Embeddings: "EMB1" | u32 N | u32 D | N*D f32, ids in a sibling JSONL file
// (one JSON string per line) named <stem>.ids.jsonl.
// ---------------------------------------------------------------------------
inline constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', '1'};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  EmbeddingSet(RowMatrix rows, std::vector<std::string> ids) : rows_(std::move(rows)), ids_(std::move(ids)) {
    if (rows_.rows() < 1 || rows_.cols() < 1) throw Error(Errc::InvalidArgument, "embedding set is empty");
    if (static_cast<std::size_t>(rows_.rows()) != ids_.size()) {
      throw Error(Errc::IdCountMismatch, std::to_string(ids_.size()) + " ids for " +
                                             std::to_string(rows_.rows()) + " rows");
    }
    if (!rows_.allFinite()) throw Error(Errc::NonFinite, "embedding rows contain NaN/Inf");
    std::set<std::string> seen;
    for (const auto& id : ids_) {
      if (!seen.insert(id).second) throw Error(Errc::DuplicateId, "duplicate embedding id '" + id + "'");
    }
  }

  // Rows with generated ids "0", "1", ...
  static EmbeddingSet from_rows(RowMatrix rows) {
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) ids.push_back(std::to_string(i));
    return EmbeddingSet(std::move(rows), std::move(ids));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  const RowMatrix& rows() const noexcept { return rows_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  RowMatrix rows_;
  std::vector<std::string> ids_;
};

inline fs::path embedding_ids_path(const fs::path& emb_path) {
  fs::path p = emb_path;
  p.replace_extension(".ids.jsonl");
  return p;
}

inline std::vector<std::uint8_t> encode_embedding_matrix(const RowMatrix& rows) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + static_cast<std::size_t>(rows.size()) * 4);
  out.insert(out.end(), std::begin(kEmbeddingMagic), std::end(kEmbeddingMagic));
  detail::put_u32(out, static_cast<std::uint32_t>(rows.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(rows.cols()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.cols(); ++j) detail::put_f32(out, detail::narrow_finite(rows(i, j)));
  return out;
}

inline RowMatrix decode_embedding_matrix(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) {
    throw Error(Errc::BadMagic, "not an EMB1 file");
  }
  if (bytes.size() < 12) throw Error(Errc::TruncatedPayload, "embedding header cut short");
  const std::uint32_t n = detail::get_u32(bytes, 4);
  const std::uint32_t d = detail::get_u32(bytes, 8);
  const std::uint64_t need = 12 + std::uint64_t{n} * d * 4;
  if (need > bytes.size()) throw Error(Errc::TruncatedPayload, "declared N*D exceeds file size");
  RowMatrix rows(n, d);
  std::size_t off = 12;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      rows(i, j) = detail::get_f32(bytes, off);
      off += 4;
    }
  }
  return rows;
}

inline std::vector<std::string> read_id_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open id file " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_string()) {
      ids.push_back(j.get<std::string>());
    } else if (j.is_object() && j.contains("clip_id") && j["clip_id"].is_string()) {
      ids.push_back(j["clip_id"].get<std::string>());
    } else {
      throw Error(Errc::Parse, "id line is neither a JSON string nor {\"clip_id\": ...}");
    }
  }
  return ids;
}

inline EmbeddingSet read_embeddings(const fs::path& path) {
  RowMatrix rows = decode_embedding_matrix(read_file_bytes(path));
  std::vector<std::string> ids = read_id_lines(embedding_ids_path(path));
  if (ids.size() != static_cast<std::size_t>(rows.rows())) {
    throw Error(Errc::IdCountMismatch, std::to_string(ids.size()) + " ids for " +
                                           std::to_string(rows.rows()) + " rows");
  }
  return EmbeddingSet(std::move(rows), std::move(ids));
}

inline void write_embeddings(const EmbeddingSet& set, const fs::path& path) {
  write_file_bytes(path, encode_embedding_matrix(set.rows()));
  std::string ids;
  for (const auto& id : set.ids()) ids += nlohmann::json(id).dump() + "\n";
  write_text_file(embedding_ids_path(path), ids);
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------
inline nlohmann::ordered_json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

inline void write_json_file(const fs::path& path, const nlohmann::ordered_json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

inline Skeleton skeleton_from_json(const nlohmann::ordered_json& j) {
  try {
    const auto parents = j.at("parents").get<std::vector<int>>();
    std::vector<Eigen::Vector3d> offsets;
    for (const auto& o : j.at("offsets")) {
      const auto v = o.get<std::vector<double>>();
      if (v.size() != 3) throw Error(Errc::Parse, "offsets must be [x, y, z]");
      offsets.emplace_back(v[0], v[1], v[2]);
    }
    std::vector<std::string> names;
    if (j.contains("names")) names = j["names"].get<std::vector<std::string>>();
    std::vector<std::size_t> feet;
    if (j.contains("foot_joints")) feet = j["foot_joints"].get<std::vector<std::size_t>>();
    if (j.contains("num_joints") && j["num_joints"].get<std::size_t>() != parents.size()) {
      throw Error(Errc::JointCountMismatch, "num_joints disagrees with parents array");
    }
    return Skeleton(parents, std::move(offsets), std::move(names), std::move(feet));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("skeleton: ") + e.what());
  }
}

inline nlohmann::ordered_json skeleton_to_json(const Skeleton& s) {
  nlohmann::ordered_json j;
  j["num_joints"] = s.num_joints();
  j["parents"] = s.parents();
  auto offsets = nlohmann::ordered_json::array();
  for (const auto& o : s.offsets()) offsets.push_back({o.x(), o.y(), o.z()});
  j["offsets"] = std::move(offsets);
  j["names"] = s.names();
  j["foot_joints"] = s.foot_joints();
  return j;
}

inline Skeleton read_skeleton(const fs::path& path) { return skeleton_from_json(read_json_file(path)); }

inline void write_skeleton(const Skeleton& s, const fs::path& path) { write_json_file(path, skeleton_to_json(s)); }

inline Taxonomy read_taxonomy(const fs::path& path) { return Taxonomy::from_json(read_json_file(path)); }

inline void write_taxonomy(const Taxonomy& t, const fs::path& path) { write_json_file(path, t.to_json()); }

// ---------------------------------------------------------------------------
// Manifest JSONL
// ---------------------------------------------------------------------------
inline ClipRecord clip_from_json(const nlohmann::ordered_json& j) {
  try {
    ClipRecord r;
    r.clip_id = j.at("clip_id").get<std::string>();
    r.motion_file = j.value("motion_file", std::string{});
    r.fps = j.value("fps", 30.0);
    r.num_frames = j.value("num_frames", std::size_t{0});
    if (j.contains("captions")) r.captions = j["captions"].get<std::vector<std::string>>();
    r.category = j.value("category", std::string{});
    r.subcategory = j.value("subcategory", std::string{});
    r.atomic_action = j.value("atomic_action", std::string{});
    r.source = j.value("source", std::string{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("manifest record: ") + e.what());
  }
}

inline nlohmann::ordered_json clip_to_json(const ClipRecord& r) {
  nlohmann::ordered_json j;
  j["clip_id"] = r.clip_id;
  j["motion_file"] = r.motion_file;
  j["fps"] = r.fps;
  j["num_frames"] = r.num_frames;
  j["captions"] = r.captions;
  j["category"] = r.category;
  j["subcategory"] = r.subcategory;
  j["atomic_action"] = r.atomic_action;
  j["source"] = r.source;
  return j;
}

inline std::vector<ClipRecord> parse_manifest(std::istream& in) {
  std::vector<ClipRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Parse, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    ClipRecord r = clip_from_json(j);
    if (!seen.insert(r.clip_id).second) {
      throw Error(Errc::DuplicateId, "clip_id '" + r.clip_id + "' repeated at line " + std::to_string(line_no));
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<ClipRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open manifest " + path.string());
  return parse_manifest(in);
}

inline std::string manifest_to_jsonl(const std::vector<ClipRecord>& records) {
  std::string out;
  for (const auto& r : records) out += clip_to_json(r).dump() + "\n";
  return out;
}

inline void write_manifest(const std::vector<ClipRecord>& records, const fs::path& path) {
  write_text_file(path, manifest_to_jsonl(records));
}

// ---------------------------------------------------------------------------
// Per-clip metric report JSONL: { "clip_id": ..., "metrics": { name: value } }
// ---------------------------------------------------------------------------
struct ClipMetrics {
  std::string clip_id;
  std::map<std::string, double> metrics;
};

using MetricTable = std::map<std::string, std::map<std::string, double>>;

// Lines come out sorted by clip_id because MetricTable is ordered.
inline std::string metric_report_to_jsonl(const MetricTable& table) {
  std::string out;
  for (const auto& [id, metrics] : table) {
    nlohmann::ordered_json j;
    j["clip_id"] = id;
    j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : metrics) j["metrics"][name] = value;
    out += j.dump() + "\n";
  }
  return out;
}

inline MetricTable parse_metric_report(std::istream& in) {
  MetricTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::ordered_json::parse(line);
      auto& row = table[j.at("clip_id").get<std::string>()];
      for (const auto& [name, value] : j.at("metrics").items()) {
        if (value.is_number()) row[name] = value.get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Parse, std::string("metric report: ") + e.what());
    }
  }
  return table;
}

inline MetricTable read_metric_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open metric report " + path.string());
  return parse_metric_report(in);
}

inline void write_metric_report(const MetricTable& table, const fs::path& path) {
  write_text_file(path, metric_report_to_jsonl(table));
}

}  // namespace mtk
