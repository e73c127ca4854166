#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mtk/clip.hpp"
#include "mtk/errors.hpp"
#include "mtk/io.hpp"
#include "mtk/parallel.hpp"
#include "mtk/physical_metrics.hpp"
#include "mtk/taxonomy.hpp"

namespace mtk {

// ---------------------------------------------------------------------------
// Dataset sweeps
// ---------------------------------------------------------------------------
using MotionLoader = std::function<MotionSequence(const ClipRecord&)>;

// Resolves motion_file against a root directory (absolute paths pass through).
inline MotionLoader file_loader(fs::path root) {
  return [root = std::move(root)](const ClipRecord& r) { return read_motion(root / r.motion_file); };
}

template <class T>
struct SweepResult {
  std::map<std::string, T> results;
  std::map<std::string, std::string> failures;  // clip_id -> message
};

// Loads and evaluates clips one at a time on a worker pool. Per-clip failures
// are recorded and the sweep continues; output is keyed (and so ordered) by
// clip_id regardless of scheduling.
template <class T, class Fn>
SweepResult<T> sweep_clips(const std::vector<ClipRecord>& manifest, const MotionLoader& load, Fn&& eval,
                           std::size_t workers = 1) {
  std::vector<std::optional<T>> slots(manifest.size());
  std::vector<std::string> errors(manifest.size());
  parallel_for(manifest.size(), workers, [&](std::size_t i) {
    try {
      const MotionSequence motion = load(manifest[i]);
      slots[i] = eval(manifest[i], motion);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "unknown error";
    }
  });
  SweepResult<T> out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (slots[i]) {
      out.results.emplace(manifest[i].clip_id, std::move(*slots[i]));
    } else {
      out.failures.emplace(manifest[i].clip_id, errors[i]);
    }
  }
  return out;
}

inline SweepResult<DynamicScoreResult> score_dataset(const std::vector<ClipRecord>& manifest,
                                                     const MotionLoader& load, const DynamicScoreConfig& cfg = {},
                                                     std::size_t workers = 1) {
  cfg.validate();
  return sweep_clips<DynamicScoreResult>(
      manifest, load, [&](const ClipRecord&, const MotionSequence& m) { return dynamic_score(m, cfg); }, workers);
}

// ---------------------------------------------------------------------------
// Grouped top-P filtering
// ---------------------------------------------------------------------------
enum class FilterMode { KeepTop, DropTop };
enum class GroupBy { Global, Category, Subcategory };

struct FilterPolicy {
  std::string metric = "dynamic_score";
  FilterMode mode = FilterMode::KeepTop;
  double percentile = 100.0;  // (0, 100]
  GroupBy group_by = GroupBy::Global;
  // Category or subcategory names whose clips are always kept.
  std::set<std::string> exempt_groups;

  void validate(const Taxonomy* taxonomy = nullptr) const {
    if (!(percentile > 0.0 && percentile <= 100.0)) {
      throw Error(Errc::InvalidArgument, "percentile must be in (0, 100]");
    }
    if (taxonomy != nullptr) {
      for (const auto& g : exempt_groups) {
        if (!taxonomy->has_group_name(g)) {
          throw Error(Errc::UnknownLabel, "exempt group '" + g + "' is not in the taxonomy");
        }
      }
    }
  }
};

struct GroupRetention {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t exempt = 0;  // clips kept unconditionally
  double fraction = 1.0;
};

struct FilterOutcome {
  std::vector<std::string> kept;     // sorted
  std::vector<std::string> removed;  // sorted
  std::map<std::string, GroupRetention> groups;
};

// Clips retained out of n ranked candidates. Keep-top keeps ceil(P/100 * n);
// drop-top removes the complement of ceil((100 - P)/100 * n). P * n is formed
// before dividing so integral percentages never pick up rounding error.
inline std::size_t retained_count(double percentile, std::size_t n, FilterMode mode) {
  const double share = mode == FilterMode::KeepTop ? percentile : 100.0 - percentile;
  const double k = std::ceil(share * static_cast<double>(n) / 100.0);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
}

// Group key for a clip, or nullopt when its labels cannot place it.
inline std::optional<std::string> group_key(const ClipRecord& r, GroupBy by, const Taxonomy* taxonomy) {
  if (by == GroupBy::Global) return std::string("all");
  const bool need_sub = by == GroupBy::Subcategory;
  if (normalize_label(r.category).empty() || (need_sub && normalize_label(r.subcategory).empty())) {
    return std::nullopt;
  }
  if (taxonomy != nullptr) {
    try {
      return taxonomy->path(taxonomy->resolve(r.category, need_sub ? r.subcategory : std::string_view{}));
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  std::string key = normalize_label(r.category);
  if (need_sub) key += "/" + normalize_label(r.subcategory);
  return key;
}

inline bool is_exempt(const ClipRecord& r, const std::set<std::string>& exempt_normalized) {
  if (exempt_normalized.empty()) return false;
  return exempt_normalized.count(normalize_label(r.category)) > 0 ||
         exempt_normalized.count(normalize_label(r.subcategory)) > 0;
}

// Ranks each group by the metric (highest first, ties by clip_id ascending)
// and keeps the top ceil(P/100 * n) (keep-top) or drops that ranking's head
// so ceil((100-P)/100 * n) remain (drop-top). Exempt clips are kept and do not
// take part in the ranking.
inline FilterOutcome adaptive_filter(const std::map<std::string, double>& scores,
                                     const std::vector<ClipRecord>& manifest, const FilterPolicy& policy,
                                     const Taxonomy* taxonomy = nullptr) {
  policy.validate(taxonomy);
  std::set<std::string> exempt;
  for (const auto& g : policy.exempt_groups) exempt.insert(normalize_label(g));

  struct Candidate {
    double score;
    const std::string* id;
  };
  std::map<std::string, std::vector<Candidate>> ranked;
  FilterOutcome out;
  for (const auto& r : manifest) {
    const auto key = group_key(r, policy.group_by, taxonomy);
    if (!key) {
      throw Error(Errc::UnresolvableGroup, "clip '" + r.clip_id + "' has no resolvable " +
                                               (policy.group_by == GroupBy::Category ? "category" : "subcategory"));
    }
    auto& stats = out.groups[*key];
    ++stats.total;
    if (is_exempt(r, exempt)) {
      ++stats.exempt;
      ++stats.kept;
      out.kept.push_back(r.clip_id);
      continue;
    }
    const auto it = scores.find(r.clip_id);
    if (it == scores.end()) {
      throw Error(Errc::InvalidArgument, "clip '" + r.clip_id + "' has no '" + policy.metric + "' value");
    }
    ranked[*key].push_back({it->second, &r.clip_id});
  }

  for (auto& [key, group] : ranked) {
    std::sort(group.begin(), group.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      return *a.id < *b.id;
    });
    const std::size_t n = group.size();
    const std::size_t keep = retained_count(policy.percentile, n, policy.mode);
    // Keep-top retains the head of the ranking, drop-top its tail.
    const std::size_t first_kept = policy.mode == FilterMode::KeepTop ? 0 : n - keep;
    for (std::size_t i = 0; i < n; ++i) {
      const bool kept = i >= first_kept && i < first_kept + keep;
      (kept ? out.kept : out.removed).push_back(*group[i].id);
    }
    out.groups[key].kept += keep;
  }
  for (auto& [key, stats] : out.groups) {
    stats.fraction = stats.total == 0 ? 1.0 : static_cast<double>(stats.kept) / static_cast<double>(stats.total);
  }
  std::sort(out.kept.begin(), out.kept.end());
  std::sort(out.removed.begin(), out.removed.end());
  return out;
}

// ---------------------------------------------------------------------------
// Threshold partitions
// ---------------------------------------------------------------------------
struct PartitionSpec {
  std::vector<std::pair<std::string, double>> tiers{
      {"V_A", 0.05}, {"V_B", 0.10}, {"V_C", 0.15}, {"V_D", 0.50}};

  void validate() const {
    for (std::size_t i = 1; i < tiers.size(); ++i) {
      if (!(tiers[i].second > tiers[i - 1].second)) {
        throw Error(Errc::InvalidArgument, "partition thresholds must be strictly increasing");
      }
    }
  }
};

// tier -> sorted ids with score >= threshold, tiers in declaration order.
inline std::vector<std::pair<std::string, std::vector<std::string>>> partition(
    const std::map<std::string, double>& scores, const PartitionSpec& spec = {}) {
  spec.validate();
  std::vector<std::pair<std::string, std::vector<std::string>>> out;
  for (const auto& [name, threshold] : spec.tiers) {
    std::vector<std::string> ids;
    for (const auto& [id, score] : scores) {
      if (score >= threshold) ids.push_back(id);
    }
    out.emplace_back(name, std::move(ids));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Global vs adaptive comparison
// ---------------------------------------------------------------------------
struct FilterDiff {
  std::vector<std::string> rescued;        // kept by adaptive, removed by global
  std::vector<std::string> newly_removed;  // removed by adaptive, kept by global
};

inline FilterDiff compare_filters(const FilterOutcome& global, const FilterOutcome& adaptive) {
  auto universe = [](const FilterOutcome& o) {
    std::set<std::string> u(o.kept.begin(), o.kept.end());
    u.insert(o.removed.begin(), o.removed.end());
    return u;
  };
  if (universe(global) != universe(adaptive)) {
    throw Error(Errc::UniverseMismatch, "filter outcomes cover different clip sets");
  }
  const std::set<std::string> global_kept(global.kept.begin(), global.kept.end());
  const std::set<std::string> adaptive_kept(adaptive.kept.begin(), adaptive.kept.end());
  FilterDiff d;
  for (const auto& id : adaptive.kept) {
    if (!global_kept.count(id)) d.rescued.push_back(id);
  }
  for (const auto& id : adaptive.removed) {
    if (global_kept.count(id)) d.newly_removed.push_back(id);
  }
  return d;
}

}  // namespace mtk
