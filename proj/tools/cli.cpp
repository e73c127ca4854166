#include "cli.hpp"

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mtk/mtk.hpp"

namespace mtk::cli {
namespace {

using json = nlohmann::ordered_json;

// Machine-readable record of one invocation, written next to the primary
// outputs.
class RunManifest {
 public:
  RunManifest(std::string subcommand, const std::vector<std::string>& args, std::uint64_t seed,
              std::size_t threads) {
    doc_["tool"] = "mtk";
    doc_["version"] = kToolVersion;
    doc_["subcommand"] = std::move(subcommand);
    doc_["args"] = args;
    doc_["seed"] = seed;
    doc_["threads"] = threads;
    doc_["inputs"] = json::object();
    doc_["config"] = json::object();
    doc_["outputs"] = json::array();
    doc_["failures"] = json::object();
  }

  void input(const std::string& name, const fs::path& path) { doc_["inputs"][name] = path.string(); }
  template <class T>
  void config(const std::string& key, const T& value) {
    doc_["config"][key] = value;
  }
  void output(const fs::path& path) { doc_["outputs"].push_back(path.string()); }
  void failure(const std::string& id, const std::string& message) { doc_["failures"][id] = message; }
  std::size_t failure_count() const { return doc_["failures"].size(); }

  void write(const fs::path& path, int exit_code) {
    doc_["exit_code"] = exit_code;
    write_json_file(path, doc_);
  }

 private:
  json doc_;
};

void require_file(const std::string& path, const std::string& what) {
  if (path.empty() || !fs::is_regular_file(path)) throw Error(Errc::Io, what + " not found: " + path);
}

void prepare_output_file(const fs::path& path) {
  if (path.empty()) throw Error(Errc::InvalidArgument, "output path is empty");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

fs::path sibling(const fs::path& path, const std::string& suffix) { return fs::path(path.string() + suffix); }

fs::path data_root_for(const std::string& manifest, const std::string& data_root) {
  if (!data_root.empty()) return data_root;
  const fs::path parent = fs::path(manifest).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

std::vector<ClipRecord> subset(const std::vector<ClipRecord>& manifest, const std::vector<std::string>& ids) {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<ClipRecord> out;
  for (const auto& r : manifest) {
    if (wanted.count(r.clip_id)) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const ClipRecord& a, const ClipRecord& b) { return a.clip_id < b.clip_id; });
  return out;
}

std::map<std::string, double> metric_column(const MetricTable& table, const std::string& metric) {
  std::map<std::string, double> out;
  for (const auto& [id, row] : table) {
    const auto it = row.find(metric);
    if (it != row.end()) out.emplace(id, it->second);
  }
  return out;
}

PoseSequence read_pose_json(const fs::path& path, std::size_t num_joints) {
  const json doc = read_json_file(path);
  try {
    const double fps = doc.at("fps").get<double>();
    std::vector<Eigen::Vector3d> root;
    for (const auto& t : doc.at("root_translation")) {
      const auto v = t.get<std::vector<double>>();
      if (v.size() != 3) throw Error(Errc::Parse, "root_translation rows must be [x, y, z]");
      root.emplace_back(v[0], v[1], v[2]);
    }
    std::vector<Eigen::Quaterniond> rot;
    for (const auto& frame : doc.at("rotations")) {
      if (frame.size() != num_joints) {
        throw Error(Errc::JointCountMismatch, "pose frame has " + std::to_string(frame.size()) +
                                                  " rotations, skeleton has " + std::to_string(num_joints));
      }
      for (const auto& q : frame) {
        const auto v = q.get<std::vector<double>>();
        if (v.size() != 4) throw Error(Errc::Parse, "rotations must be [w, x, y, z]");
        rot.emplace_back(v[0], v[1], v[2], v[3]);
      }
    }
    return PoseSequence(fps, std::move(root), std::move(rot), num_joints);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

struct Common {
  std::size_t threads = default_parallelism();
  std::uint64_t seed = 0;
  std::string run_manifest;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "Worker threads (default: MTK_THREADS or all cores)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Seed recorded in the run manifest and used by sampled metrics");
  sub->add_option("--run-manifest", c.run_manifest, "Where to write the run manifest");
}

fs::path run_manifest_path(const Common& c, const fs::path& fallback) {
  return c.run_manifest.empty() ? fallback : fs::path(c.run_manifest);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Motion quality analysis and dataset curation toolkit", "mtk"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;

  // validate
  auto* validate = app.add_subcommand("validate", "Check clips against frame-count, fps and label rules");
  std::string v_manifest, v_root, v_taxonomy, v_out;
  ValidityPolicy v_policy;
  double v_fps = 30.0;
  std::optional<std::size_t> v_captions;
  validate->add_option("--manifest", v_manifest)->required();
  validate->add_option("--data-root", v_root, "Directory motion_file paths are relative to");
  validate->add_option("--taxonomy", v_taxonomy);
  validate->add_option("--min-frames", v_policy.min_frames)->capture_default_str();
  validate->add_option("--max-frames", v_policy.max_frames)->capture_default_str();
  validate->add_option("--fps", v_fps)->capture_default_str();
  validate->add_option("--captions", v_captions, "Required caption count");
  validate->add_option("--out", v_out)->required();
  add_common(validate, common);

  // convert
  auto* convert = app.add_subcommand("convert", "Pose JSON or .mot -> .mot with optional resampling and canonicalization");
  std::string c_in, c_out, c_skeleton;
  std::optional<double> c_resample;
  bool c_canonical = false;
  CanonicalizeConfig c_cfg;
  convert->add_option("--in", c_in)->required();
  convert->add_option("--out", c_out)->required();
  convert->add_option("--skeleton", c_skeleton);
  convert->add_option("--resample", c_resample, "Target fps");
  convert->add_flag("--canonicalize", c_canonical);
  convert->add_option("--reference-height", c_cfg.reference_height)->capture_default_str();
  convert->add_option("--left-hip", c_cfg.left_hip)->capture_default_str();
  convert->add_option("--right-hip", c_cfg.right_hip)->capture_default_str();
  convert->add_option("--head", c_cfg.head_joint)->capture_default_str();
  add_common(convert, common);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Per-clip dynamic score and physical plausibility metrics");
  std::string m_manifest, m_root, m_skeleton, m_out, m_aggregate;
  std::vector<std::size_t> m_feet;
  PhysicalMetricConfig m_phys;
  DynamicScoreConfig m_dyn;
  metrics->add_option("--manifest", m_manifest)->required();
  metrics->add_option("--data-root", m_root);
  metrics->add_option("--skeleton", m_skeleton, "Skeleton JSON supplying foot joints");
  metrics->add_option("--foot-joints", m_feet, "Foot joint indices (overrides the skeleton)");
  metrics->add_option("--contact-height", m_phys.contact_height)->capture_default_str();
  metrics->add_option("--float-height", m_phys.float_height)->capture_default_str();
  metrics->add_option("--accel-threshold", m_phys.accel_peak_threshold)->capture_default_str();
  metrics->add_option("--w-v", m_dyn.w_temporal)->capture_default_str();
  metrics->add_option("--w-r", m_dyn.w_spatial)->capture_default_str();
  metrics->add_option("--out", m_out)->required();
  metrics->add_option("--aggregate", m_aggregate, "Aggregate JSON (default: <out>.aggregate.json)");
  add_common(metrics, common);

  // score
  auto* score = app.add_subcommand("score", "Dynamic score for every clip in a manifest");
  std::string s_manifest, s_root, s_out;
  DynamicScoreConfig s_dyn;
  score->add_option("--manifest", s_manifest)->required();
  score->add_option("--data-root", s_root);
  score->add_option("--w-v", s_dyn.w_temporal)->capture_default_str();
  score->add_option("--w-r", s_dyn.w_spatial)->capture_default_str();
  score->add_option("--out", s_out)->required();
  add_common(score, common);

  // filter
  auto* filter = app.add_subcommand("filter", "Top-P percentile filtering, globally or per taxonomy group");
  std::string f_manifest, f_scores, f_taxonomy, f_out_dir, f_mode = "keep-top", f_group = "global";
  FilterPolicy f_policy;
  std::vector<std::string> f_exempt;
  bool f_compare = false;
  filter->add_option("--manifest", f_manifest)->required();
  filter->add_option("--scores", f_scores, "Per-clip metric report (JSONL)")->required();
  filter->add_option("--metric", f_policy.metric)->capture_default_str();
  filter->add_option("--mode", f_mode)->check(CLI::IsMember({"keep-top", "drop-top"}))->capture_default_str();
  filter->add_option("--percentile", f_policy.percentile)->required();
  filter->add_option("--group-by", f_group)
      ->check(CLI::IsMember({"global", "category", "subcategory"}))
      ->capture_default_str();
  filter->add_option("--exempt", f_exempt, "Category/subcategory kept at 100% (repeatable)");
  filter->add_option("--taxonomy", f_taxonomy);
  filter->add_flag("--compare-global", f_compare, "Also report the difference from the same filter applied globally");
  filter->add_option("--out-dir", f_out_dir)->required();
  add_common(filter, common);

  // partition
  auto* part = app.add_subcommand("partition", "Nested lower-bound threshold tiers, one manifest per tier");
  std::string p_manifest, p_scores, p_out_dir, p_metric = "dynamic_score";
  std::vector<std::string> p_tiers;
  part->add_option("--manifest", p_manifest)->required();
  part->add_option("--scores", p_scores)->required();
  part->add_option("--metric", p_metric)->capture_default_str();
  part->add_option("--tier", p_tiers, "NAME=THRESHOLD (repeatable; default V_A=0.05 V_B=0.10 V_C=0.15 V_D=0.50)");
  part->add_option("--out-dir", p_out_dir)->required();
  add_common(part, common);

  // eval
  auto* eval = app.add_subcommand("eval", "FID, diversity, matching score and R-precision on embeddings");
  std::string e_real, e_gen, e_text, e_motion, e_out;
  RetrievalProtocol e_protocol;
  bool e_similarity = false;
  eval->add_option("--real", e_real);
  eval->add_option("--generated", e_gen);
  eval->add_option("--text", e_text);
  eval->add_option("--motion", e_motion);
  eval->add_option("--batch-size", e_protocol.batch_size)->capture_default_str();
  eval->add_option("--diversity-pairs", e_protocol.num_diversity_pairs)->capture_default_str();
  eval->add_option("--top-k", e_protocol.top_ks)->capture_default_str();
  eval->add_flag("--similarity", e_similarity, "Matching score as mean dot product instead of distance");
  eval->add_option("--out", e_out)->required();
  add_common(eval, common);

  // report
  auto* report = app.add_subcommand("report", "Per-taxonomy aggregates, dataset statistics and chart data");
  std::string r_manifest, r_taxonomy, r_metrics, r_out, r_level = "category";
  report->add_option("--manifest", r_manifest)->required();
  report->add_option("--taxonomy", r_taxonomy)->required();
  report->add_option("--metrics", r_metrics, "Per-clip metric report (JSONL)");
  report->add_option("--level", r_level)
      ->check(CLI::IsMember({"category", "subcategory", "atomic"}))
      ->capture_default_str();
  report->add_option("--out", r_out)->required();
  add_common(report, common);

  // export-viz
  auto* viz = app.add_subcommand("export-viz", "Self-contained scene file for the browser viewer");
  std::string x_manifest, x_root, x_skeleton, x_metrics, x_out;
  std::vector<std::string> x_clips, x_badges{"dynamic_score"};
  VizOptions x_opts;
  viz->add_option("--manifest", x_manifest)->required();
  viz->add_option("--data-root", x_root);
  viz->add_option("--skeleton", x_skeleton)->required();
  viz->add_option("--clip", x_clips, "Clip id to include (repeatable; default: first clips up to 16)");
  viz->add_option("--metrics", x_metrics, "Per-clip metric report supplying badges");
  viz->add_option("--badge", x_badges, "Metric names shown as badges")->capture_default_str();
  viz->add_option("--stride", x_opts.stride)->check(CLI::PositiveNumber)->capture_default_str();
  viz->add_option("--out", x_out)->required();
  add_common(viz, common);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  RunManifest record(active->get_name(), args, common.seed, common.threads);
  fs::path record_path;

  try {
    int code = 0;
    if (active == validate) {
      require_file(v_manifest, "manifest");
      prepare_output_file(v_out);
      record_path = run_manifest_path(common, sibling(v_out, ".run.json"));
      std::optional<Taxonomy> taxonomy;
      if (!v_taxonomy.empty()) {
        require_file(v_taxonomy, "taxonomy");
        taxonomy = read_taxonomy(v_taxonomy);
        record.input("taxonomy", v_taxonomy);
      }
      v_policy.required_fps = v_fps;
      v_policy.required_captions = v_captions;
      record.input("manifest", v_manifest);
      record.config("min_frames", v_policy.min_frames);
      record.config("max_frames", v_policy.max_frames);
      record.config("fps", v_fps);

      const auto manifest = read_manifest(v_manifest);
      const auto sweep = sweep_clips<ValidityReport>(
          manifest, file_loader(data_root_for(v_manifest, v_root)),
          [&](const ClipRecord& r, const MotionSequence& m) {
            return validate_clip(r, m, v_policy, taxonomy ? &*taxonomy : nullptr);
          },
          common.threads);
      std::map<std::string, json> lines;
      std::size_t invalid = 0;
      for (const auto& [id, rep] : sweep.results) {
        json j;
        j["clip_id"] = id;
        j["valid"] = rep.valid;
        j["violations"] = json::array();
        for (const auto& v : rep.violations) j["violations"].push_back({{"rule", v.rule}, {"detail", v.detail}});
        if (!rep.valid) ++invalid;
        lines[id] = std::move(j);
      }
      for (const auto& [id, msg] : sweep.failures) {
        lines[id] = json{{"clip_id", id}, {"valid", false}, {"error", msg}};
        record.failure(id, msg);
      }
      std::string text;
      for (const auto& [id, j] : lines) text += j.dump() + "\n";
      write_text_file(v_out, text);
      record.output(v_out);
      err << manifest.size() << " clips, " << invalid << " invalid, " << sweep.failures.size() << " unreadable\n";
      code = sweep.failures.empty() ? 0 : 1;

    } else if (active == convert) {
      require_file(c_in, "input");
      prepare_output_file(c_out);
      record_path = run_manifest_path(common, sibling(c_out, ".run.json"));
      record.input("in", c_in);
      std::optional<Skeleton> skeleton;
      if (!c_skeleton.empty()) {
        require_file(c_skeleton, "skeleton");
        skeleton = read_skeleton(c_skeleton);
        record.input("skeleton", c_skeleton);
      }
      MotionSequence motion;
      if (fs::path(c_in).extension() == ".json") {
        if (!skeleton) throw Error(Errc::InvalidArgument, "pose JSON input needs --skeleton");
        motion = forward_kinematics(read_pose_json(c_in, skeleton->num_joints()), *skeleton);
      } else {
        motion = read_motion(c_in);
      }
      if (c_resample) {
        motion = resample(motion, *c_resample);
        record.config("resample_fps", *c_resample);
      }
      if (c_canonical) {
        if (!skeleton) throw Error(Errc::InvalidArgument, "--canonicalize needs --skeleton");
        motion = canonicalize(motion, *skeleton, c_cfg);
        record.config("reference_height", c_cfg.reference_height);
      }
      write_motion(motion, c_out);
      record.output(c_out);

    } else if (active == metrics) {
      require_file(m_manifest, "manifest");
      prepare_output_file(m_out);
      const fs::path aggregate_path = m_aggregate.empty() ? sibling(m_out, ".aggregate.json") : fs::path(m_aggregate);
      prepare_output_file(aggregate_path);
      record_path = run_manifest_path(common, sibling(m_out, ".run.json"));
      record.input("manifest", m_manifest);
      if (!m_skeleton.empty()) {
        require_file(m_skeleton, "skeleton");
        record.input("skeleton", m_skeleton);
        if (m_feet.empty()) {
          const Skeleton sk = read_skeleton(m_skeleton);
          m_feet = sk.foot_joints();
        }
      }
      m_phys.foot_joints = m_feet;
      m_phys.validate();
      m_dyn.validate();
      record.config("contact_height", m_phys.contact_height);
      record.config("float_height", m_phys.float_height);
      record.config("accel_peak_threshold", m_phys.accel_peak_threshold);
      record.config("foot_joints", m_feet);
      record.config("w_v", m_dyn.w_temporal);
      record.config("w_r", m_dyn.w_spatial);
      record.config("velocity_units", "meters/frame");
      record.config("jerk_units", "jerk: meters/second^3, jerk_per_frame3: meters/frame^3");

      const auto manifest = read_manifest(m_manifest);
      const auto sweep = sweep_clips<std::map<std::string, double>>(
          manifest, file_loader(data_root_for(m_manifest, m_root)),
          [&](const ClipRecord&, const MotionSequence& m) { return compute_clip_metrics(m, m_phys, m_dyn); },
          common.threads);
      MetricTable table(sweep.results.begin(), sweep.results.end());
      write_metric_report(table, m_out);
      record.output(m_out);

      std::map<std::string, std::vector<double>> columns;
      for (const auto& [id, row] : table)
        for (const auto& [name, value] : row) columns[name].push_back(value);
      json agg;
      agg["clips"] = manifest.size();
      agg["scored"] = table.size();
      agg["metrics"] = json::object();
      for (auto& [name, values] : columns) {
        const Summary s = summarize(std::move(values));
        agg["metrics"][name] = {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"p95", s.p95}};
      }
      agg["failures"] = json::object();
      for (const auto& [id, msg] : sweep.failures) {
        agg["failures"][id] = msg;
        record.failure(id, msg);
      }
      write_json_file(aggregate_path, agg);
      record.output(aggregate_path);
      code = sweep.failures.empty() ? 0 : 1;

    } else if (active == score) {
      require_file(s_manifest, "manifest");
      prepare_output_file(s_out);
      s_dyn.validate();
      record_path = run_manifest_path(common, sibling(s_out, ".run.json"));
      record.input("manifest", s_manifest);
      record.config("w_v", s_dyn.w_temporal);
      record.config("w_r", s_dyn.w_spatial);
      const auto manifest = read_manifest(s_manifest);
      const auto sweep = score_dataset(manifest, file_loader(data_root_for(s_manifest, s_root)), s_dyn, common.threads);
      MetricTable table;
      for (const auto& [id, r] : sweep.results) {
        table[id] = {{"s_temporal", r.s_temporal}, {"s_spatial", r.s_spatial}, {"dynamic_score", r.s_dynamic}};
      }
      write_metric_report(table, s_out);
      record.output(s_out);
      for (const auto& [id, msg] : sweep.failures) {
        record.failure(id, msg);
        err << "failed: " << id << ": " << msg << "\n";
      }
      code = sweep.failures.empty() ? 0 : 1;

    } else if (active == filter) {
      require_file(f_manifest, "manifest");
      require_file(f_scores, "scores");
      const fs::path dir = f_out_dir;
      fs::create_directories(dir);
      record_path = run_manifest_path(common, dir / "run_manifest.json");
      std::optional<Taxonomy> taxonomy;
      if (!f_taxonomy.empty()) {
        require_file(f_taxonomy, "taxonomy");
        taxonomy = read_taxonomy(f_taxonomy);
        record.input("taxonomy", f_taxonomy);
      }
      f_policy.mode = f_mode == "keep-top" ? FilterMode::KeepTop : FilterMode::DropTop;
      f_policy.group_by = f_group == "global" ? GroupBy::Global
                          : f_group == "category" ? GroupBy::Category
                                                  : GroupBy::Subcategory;
      f_policy.exempt_groups = std::set<std::string>(f_exempt.begin(), f_exempt.end());
      const Taxonomy* tax = taxonomy ? &*taxonomy : nullptr;
      f_policy.validate(tax);
      record.input("manifest", f_manifest);
      record.input("scores", f_scores);
      record.config("metric", f_policy.metric);
      record.config("mode", f_mode);
      record.config("percentile", f_policy.percentile);
      record.config("group_by", f_group);
      record.config("exempt", f_exempt);

      const auto manifest = read_manifest(f_manifest);
      const auto scores = metric_column(read_metric_report(f_scores), f_policy.metric);
      std::vector<ClipRecord> scored;
      std::vector<std::string> unscored;
      for (const auto& r : manifest) {
        if (scores.count(r.clip_id)) {
          scored.push_back(r);
        } else {
          unscored.push_back(r.clip_id);
          record.failure(r.clip_id, "no '" + f_policy.metric + "' value");
        }
      }
      std::sort(unscored.begin(), unscored.end());
      const FilterOutcome outcome = adaptive_filter(scores, scored, f_policy, tax);
      write_manifest(subset(manifest, outcome.kept), dir / "kept.jsonl");
      write_manifest(subset(manifest, outcome.removed), dir / "removed.jsonl");

      json rep;
      rep["metric"] = f_policy.metric;
      rep["mode"] = f_mode;
      rep["percentile"] = f_policy.percentile;
      rep["group_by"] = f_group;
      rep["exempt"] = f_exempt;
      rep["kept"] = outcome.kept.size();
      rep["removed"] = outcome.removed.size();
      rep["unscored"] = unscored;
      rep["groups"] = json::object();
      for (const auto& [key, g] : outcome.groups) {
        rep["groups"][key] = {{"total", g.total}, {"kept", g.kept}, {"exempt", g.exempt}, {"fraction", g.fraction}};
      }
      if (f_compare) {
        FilterPolicy global = f_policy;
        global.group_by = GroupBy::Global;
        global.exempt_groups.clear();
        const FilterDiff diff = compare_filters(adaptive_filter(scores, scored, global, tax), outcome);
        rep["compare_global"] = {{"rescued_count", diff.rescued.size()},
                                 {"newly_removed_count", diff.newly_removed.size()},
                                 {"rescued", diff.rescued},
                                 {"newly_removed", diff.newly_removed}};
      }
      write_json_file(dir / "retention.json", rep);
      for (const char* name : {"kept.jsonl", "removed.jsonl", "retention.json"}) record.output(dir / name);
      code = unscored.empty() ? 0 : 1;

    } else if (active == part) {
      require_file(p_manifest, "manifest");
      require_file(p_scores, "scores");
      const fs::path dir = p_out_dir;
      fs::create_directories(dir);
      record_path = run_manifest_path(common, dir / "run_manifest.json");
      PartitionSpec spec;
      if (!p_tiers.empty()) {
        spec.tiers.clear();
        for (const auto& t : p_tiers) {
          const auto eq = t.find('=');
          if (eq == std::string::npos || eq == 0) throw Error(Errc::InvalidArgument, "tier must be NAME=THRESHOLD");
          spec.tiers.emplace_back(t.substr(0, eq), std::stod(t.substr(eq + 1)));
        }
      }
      spec.validate();
      record.input("manifest", p_manifest);
      record.input("scores", p_scores);
      record.config("metric", p_metric);
      json tiers_cfg = json::object();
      for (const auto& [name, threshold] : spec.tiers) tiers_cfg[name] = threshold;
      record.config("tiers", tiers_cfg);

      const auto manifest = read_manifest(p_manifest);
      const auto scores = metric_column(read_metric_report(p_scores), p_metric);
      json summary;
      summary["metric"] = p_metric;
      summary["total"] = manifest.size();
      summary["tiers"] = json::object();
      for (const auto& [name, ids] : partition(scores, spec)) {
        const fs::path path = dir / (name + ".jsonl");
        write_manifest(subset(manifest, ids), path);
        record.output(path);
        summary["tiers"][name] = ids.size();
      }
      write_json_file(dir / "partition.json", summary);
      record.output(dir / "partition.json");

    } else if (active == eval) {
      prepare_output_file(e_out);
      record_path = run_manifest_path(common, sibling(e_out, ".run.json"));
      e_protocol.seed = common.seed;
      e_protocol.validate();
      json result;
      result["seed"] = common.seed;
      result["batch_size"] = e_protocol.batch_size;
      json skipped = json::object();
      std::optional<EmbeddingSet> real, gen, text, motion;
      auto load = [&](const std::string& path, const char* name, std::optional<EmbeddingSet>& slot) {
        if (path.empty()) return;
        require_file(path, name);
        slot = read_embeddings(path);
        record.input(name, path);
      };
      load(e_real, "real", real);
      load(e_gen, "generated", gen);
      load(e_text, "text", text);
      load(e_motion, "motion", motion);
      if (!real && !gen && !text && !motion) throw Error(Errc::InvalidArgument, "no embedding inputs given");

      auto attempt = [&](const char* name, auto&& fn) {
        try {
          fn();
        } catch (const Error& e) {
          if (e.code() != Errc::TooFewSamples && e.code() != Errc::DimensionMismatch &&
              e.code() != Errc::IdMisalignment) {
            throw;
          }
          skipped[name] = e.what();
          record.failure(name, e.what());
        }
      };
      if (real && gen) {
        attempt("fid", [&] {
          const FidResult f = fid_detailed(*real, *gen);
          result["fid"] = f.value;
          result["fid_degenerate_covariance"] = f.degenerate_covariance;
        });
      }
      if (real) attempt("diversity_real", [&] { result["diversity_real"] = diversity(*real, e_protocol); });
      if (gen) attempt("diversity_generated", [&] { result["diversity_generated"] = diversity(*gen, e_protocol); });
      if (text && motion) {
        const MatchingMode mode = e_similarity ? MatchingMode::DotSimilarity : MatchingMode::Distance;
        attempt("matching_score", [&] {
          result["matching_score"] = matching_score(*text, *motion, mode);
          result["matching_mode"] = e_similarity ? "dot_similarity" : "distance";
        });
        attempt("r_precision", [&] {
          json rp = json::object();
          for (const auto& [k, v] : r_precision(*text, *motion, e_protocol)) rp["top" + std::to_string(k)] = v;
          result["r_precision"] = rp;
        });
      }
      if (!skipped.empty()) result["skipped"] = skipped;
      write_json_file(e_out, result);
      record.output(e_out);
      code = skipped.empty() ? 0 : 1;

    } else if (active == report) {
      require_file(r_manifest, "manifest");
      require_file(r_taxonomy, "taxonomy");
      if (!r_metrics.empty()) require_file(r_metrics, "metrics");
      prepare_output_file(r_out);
      record_path = run_manifest_path(common, sibling(r_out, ".run.json"));
      record.input("manifest", r_manifest);
      record.input("taxonomy", r_taxonomy);
      if (!r_metrics.empty()) record.input("metrics", r_metrics);
      record.config("level", r_level);
      const TaxonomyLevel level = r_level == "category"      ? TaxonomyLevel::Category
                                  : r_level == "subcategory" ? TaxonomyLevel::Subcategory
                                                             : TaxonomyLevel::Atomic;
      const auto manifest = read_manifest(r_manifest);
      const Taxonomy taxonomy = read_taxonomy(r_taxonomy);
      const MetricTable table = r_metrics.empty() ? MetricTable{} : read_metric_report(r_metrics);
      const auto rows = aggregate_by_taxonomy(table, manifest, taxonomy, level);
      json doc;
      doc["level"] = r_level;
      doc["aggregates"] = aggregates_to_json(rows);
      doc["stats"] = stats_to_json(dataset_stats(manifest, taxonomy));
      doc["chart"] = chart_data(rows);
      write_json_file(r_out, doc);
      record.output(r_out);

    } else if (active == viz) {
      require_file(x_manifest, "manifest");
      require_file(x_skeleton, "skeleton");
      if (!x_metrics.empty()) require_file(x_metrics, "metrics");
      prepare_output_file(x_out);
      record_path = run_manifest_path(common, sibling(x_out, ".run.json"));
      record.input("manifest", x_manifest);
      record.input("skeleton", x_skeleton);
      record.config("stride", x_opts.stride);
      const auto manifest = read_manifest(x_manifest);
      const Skeleton skeleton = read_skeleton(x_skeleton);
      const MetricTable table = x_metrics.empty() ? MetricTable{} : read_metric_report(x_metrics);
      std::vector<const ClipRecord*> chosen;
      if (x_clips.empty()) {
        for (const auto& r : manifest) {
          if (chosen.size() == kMaxSceneTracks) break;
          chosen.push_back(&r);
        }
      } else {
        for (const auto& id : x_clips) {
          const auto it = std::find_if(manifest.begin(), manifest.end(),
                                       [&](const ClipRecord& r) { return r.clip_id == id; });
          if (it == manifest.end()) throw Error(Errc::InvalidArgument, "clip '" + id + "' not in manifest");
          chosen.push_back(&*it);
        }
      }
      const fs::path root = data_root_for(x_manifest, x_root);
      std::vector<VizClip> clips;
      for (const ClipRecord* r : chosen) {
        VizClip c{*r, read_motion(root / r->motion_file), {}};
        if (const auto it = table.find(r->clip_id); it != table.end()) {
          for (const auto& b : x_badges) {
            if (const auto m = it->second.find(b); m != it->second.end()) c.badges[b] = m->second;
          }
        }
        clips.push_back(std::move(c));
      }
      write_json_file(x_out, scene_to_json(export_viz_scene(clips, skeleton, x_opts)));
      record.output(x_out);
    }

    record.write(record_path, code);
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    if (!record_path.empty()) {
      try {
        record.failure("fatal", e.what());
        record.write(record_path, 2);
      } catch (...) {
      }
    }
    return 2;
  }
}

}  // namespace mtk::cli
