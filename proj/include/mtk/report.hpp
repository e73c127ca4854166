#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtk/clip.hpp"
#include "mtk/io.hpp"
#include "mtk/stats.hpp"
#include "mtk/taxonomy.hpp"

namespace mtk {

inline constexpr const char* kOverallNode = "overall";
inline constexpr const char* kUnlabeledNode = "unlabeled";

struct CategoryAggregate {
  std::string node;
  std::size_t clip_count = 0;
  std::map<std::string, Summary> metrics;
  double duration_hours = 0.0;
};

inline double clip_hours(const ClipRecord& r) {
  return r.fps > 0.0 ? static_cast<double>(r.num_frames) / r.fps / 3600.0 : 0.0;
}

// Node path of a clip at the requested depth. Labels that fail to resolve land
// on a synthetic "unlabeled" child of the deepest node that did resolve, so
// parent counts always equal the sum of their children.
inline std::string taxonomy_node_for(const ClipRecord& r, const Taxonomy& taxonomy, TaxonomyLevel level) {
  TaxonomyNodeRef ref;
  try {
    ref = taxonomy.resolve(r.category);
  } catch (const Error&) {
    return kUnlabeledNode;
  }
  if (level == TaxonomyLevel::Category) return taxonomy.path(ref);
  try {
    ref = taxonomy.resolve(r.category, r.subcategory);
  } catch (const Error&) {
    return taxonomy.path(ref) + "/" + kUnlabeledNode;
  }
  if (level == TaxonomyLevel::Subcategory) return taxonomy.path(ref);
  try {
    ref = taxonomy.resolve(r.category, r.subcategory, r.atomic_action);
  } catch (const Error&) {
    return taxonomy.path(ref) + "/" + kUnlabeledNode;
  }
  return taxonomy.path(ref);
}

// One row per populated node plus a leading "overall" row. Nodes are ordered
// by descending clip count, then name. Clips without metric values still count
// toward clip_count and duration.
inline std::vector<CategoryAggregate> aggregate_by_taxonomy(const MetricTable& per_clip,
                                                            const std::vector<ClipRecord>& manifest,
                                                            const Taxonomy& taxonomy, TaxonomyLevel level) {
  struct Acc {
    std::size_t count = 0;
    double hours = 0.0;
    std::map<std::string, std::vector<double>> values;
  };
  std::map<std::string, Acc> nodes;
  Acc overall;
  auto add = [&](Acc& acc, const ClipRecord& r, const std::map<std::string, double>* metrics) {
    ++acc.count;
    acc.hours += clip_hours(r);
    if (metrics != nullptr) {
      for (const auto& [name, value] : *metrics) acc.values[name].push_back(value);
    }
  };
  for (const auto& r : manifest) {
    const auto it = per_clip.find(r.clip_id);
    const auto* metrics = it == per_clip.end() ? nullptr : &it->second;
    add(nodes[taxonomy_node_for(r, taxonomy, level)], r, metrics);
    add(overall, r, metrics);
  }

  auto finish = [](const std::string& name, Acc& acc) {
    CategoryAggregate a;
    a.node = name;
    a.clip_count = acc.count;
    a.duration_hours = acc.hours;
    for (auto& [metric, values] : acc.values) a.metrics[metric] = summarize(std::move(values));
    return a;
  };
  std::vector<CategoryAggregate> rows;
  for (auto& [name, acc] : nodes) rows.push_back(finish(name, acc));
  std::sort(rows.begin(), rows.end(), [](const CategoryAggregate& a, const CategoryAggregate& b) {
    if (a.clip_count != b.clip_count) return a.clip_count > b.clip_count;
    return a.node < b.node;
  });
  rows.insert(rows.begin(), finish(kOverallNode, overall));
  return rows;
}

inline nlohmann::ordered_json aggregates_to_json(const std::vector<CategoryAggregate>& rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& a : rows) {
    nlohmann::ordered_json j;
    j["node"] = a.node;
    j["clip_count"] = a.clip_count;
    j["duration_hours"] = a.duration_hours;
    j["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [name, s] : a.metrics) {
      j["metrics"][name] = {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}};
    }
    out.push_back(std::move(j));
  }
  return out;
}

// Metrics where a smaller value is better. They are shown as 1 / (1 + x) in
// chart data so that larger always reads as better.
inline const std::set<std::string>& default_down_metrics() {
  static const std::set<std::string> down{"foot_skating", "ground_penetration", "jerk", "jerk_per_frame3", "fid"};
  return down;
}

// metric -> node -> per-node mean, inverted for down-metrics, then divided by
// the largest node value so the best node reads 1.0. The "overall" row is
// left out.
inline nlohmann::ordered_json chart_data(const std::vector<CategoryAggregate>& rows,
                                         const std::set<std::string>& down_metrics = default_down_metrics()) {
  std::set<std::string> metric_names;
  for (const auto& a : rows)
    for (const auto& [name, s] : a.metrics) metric_names.insert(name);

  nlohmann::ordered_json out;
  out["transform"] = "inverted metrics use 1/(1+x); values divided by the per-metric maximum";
  out["metrics"] = nlohmann::ordered_json::object();
  for (const auto& name : metric_names) {
    const bool inverted = down_metrics.count(name) > 0;
    std::vector<std::pair<std::string, double>> values;
    double peak = 0.0;
    for (const auto& a : rows) {
      if (a.node == kOverallNode) continue;
      const auto it = a.metrics.find(name);
      if (it == a.metrics.end() || it->second.count == 0) continue;
      const double v = inverted ? 1.0 / (1.0 + it->second.mean) : it->second.mean;
      peak = std::max(peak, v);
      values.emplace_back(a.node, v);
    }
    nlohmann::ordered_json m;
    m["inverted"] = inverted;
    m["values"] = nlohmann::ordered_json::object();
    for (const auto& [node, v] : values) m["values"][node] = peak > 0.0 ? v / peak : v;
    out["metrics"][name] = std::move(m);
  }
  return out;
}

struct StatsReport {
  std::size_t total_clips = 0;
  double total_hours = 0.0;
  double mean_frames = 0.0;
  double median_frames = 0.0;
  std::map<std::string, std::size_t> per_category;
  std::map<std::string, std::size_t> per_subcategory;
  std::size_t subcategory_coverage = 0;  // taxonomy subcategories with >= 1 clip
  std::size_t taxonomy_subcategories = 0;
};

inline StatsReport dataset_stats(const std::vector<ClipRecord>& manifest, const Taxonomy& taxonomy) {
  StatsReport s;
  s.total_clips = manifest.size();
  s.taxonomy_subcategories = taxonomy.num_subcategories();
  std::vector<double> frames;
  frames.reserve(manifest.size());
  for (const auto& r : manifest) {
    s.total_hours += clip_hours(r);
    frames.push_back(static_cast<double>(r.num_frames));
    ++s.per_category[taxonomy_node_for(r, taxonomy, TaxonomyLevel::Category)];
    const std::string sub = taxonomy_node_for(r, taxonomy, TaxonomyLevel::Subcategory);
    ++s.per_subcategory[sub];
  }
  for (const auto& [node, count] : s.per_subcategory) {
    const bool synthetic = node == kUnlabeledNode ||
                           (node.size() > 10 && node.compare(node.size() - 10, 10, "/unlabeled") == 0);
    if (!synthetic && count > 0) ++s.subcategory_coverage;
  }
  const Summary summary = summarize(std::move(frames));
  s.mean_frames = summary.mean;
  s.median_frames = summary.median;
  return s;
}

inline nlohmann::ordered_json stats_to_json(const StatsReport& s) {
  nlohmann::ordered_json j;
  j["total_clips"] = s.total_clips;
  j["total_hours"] = s.total_hours;
  j["mean_frames"] = s.mean_frames;
  j["median_frames"] = s.median_frames;
  j["subcategory_coverage"] = s.subcategory_coverage;
  j["taxonomy_subcategories"] = s.taxonomy_subcategories;
  j["per_category"] = s.per_category;
  j["per_subcategory"] = s.per_subcategory;
  return j;
}

}  // namespace mtk
