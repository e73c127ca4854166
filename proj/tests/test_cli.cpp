#include <gtest/gtest.h>

#include "cli_fixture.hpp"

using namespace mtk;
using mtk::testing::run_cli;
using mtk::testing::slurp;
using mtk::testing::TempDir;

namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

nlohmann::ordered_json load(const fs::path& p) { return read_json_file(p); }

}  // namespace

TEST(Cli, UnknownSubcommandPrintsUsage) {
  const auto r = run_cli({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("score"), std::string::npos);
  EXPECT_EQ(run_cli({}).code, 2);
}

TEST(Cli, ScoreHappyPath) {
  TempDir dir("cli");
  mtk::testing::write_fixture_dataset(dir.path(), 5, 1);
  const auto r = run_cli({"score", "--manifest", (dir / "manifest.jsonl").string(), "--out",
                          (dir / "scores.jsonl").string(), "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_count(slurp(dir / "scores.jsonl")), 5u);
  const auto run = load(dir / "scores.jsonl.run.json");
  EXPECT_EQ(run["subcommand"], "score");
  EXPECT_EQ(run["exit_code"], 0);
  EXPECT_EQ(run["config"]["w_v"], 0.7);
}

TEST(Cli, MissingMotionIsPartialFailure) {
  TempDir dir("cli");
  mtk::testing::write_fixture_dataset(dir.path(), 4, 2);
  fs::remove(dir / "motions" / "clip00002.mot");
  const auto r = run_cli({"score", "--manifest", (dir / "manifest.jsonl").string(), "--out",
                          (dir / "scores.jsonl").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(line_count(slurp(dir / "scores.jsonl")), 3u);
  const auto run = load(dir / "scores.jsonl.run.json");
  EXPECT_TRUE(run["failures"].contains("clip00002"));
  EXPECT_EQ(run["exit_code"], 1);
}

TEST(Cli, MissingManifestIsFatal) {
  TempDir dir("cli");
  EXPECT_EQ(run_cli({"score", "--manifest", (dir / "nope.jsonl").string(), "--out", (dir / "s.jsonl").string()}).code,
            2);
  EXPECT_EQ(run_cli({"score", "--out", (dir / "s.jsonl").string()}).code, 2);
}

TEST(Cli, ValidateReportsViolations) {
  TempDir dir("cli");
  mtk::testing::write_fixture_dataset(dir.path(), 3, 3);
  const auto r = run_cli({"validate", "--manifest", (dir / "manifest.jsonl").string(), "--taxonomy",
                          (dir / "taxonomy.json").string(), "--captions", "5", "--out",
                          (dir / "validity.jsonl").string()});
  // Invalid clips are verdicts, not processing failures.
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("3 invalid"), std::string::npos);
  const std::string text = slurp(dir / "validity.jsonl");
  EXPECT_EQ(line_count(text), 3u);
  EXPECT_NE(text.find("caption_count"), std::string::npos);
  EXPECT_EQ(run_cli({"validate", "--manifest", (dir / "manifest.jsonl").string(), "--out",
                     (dir / "validity.jsonl").string()})
                .code,
            0);
}

TEST(Cli, MetricsFilterPartitionReport) {
  TempDir dir("cli");
  mtk::testing::write_fixture_dataset(dir.path(), 40, 4);
  const std::string manifest = (dir / "manifest.jsonl").string();
  auto r = run_cli({"metrics", "--manifest", manifest, "--foot-joints", "0", "1", "--out",
                    (dir / "metrics.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const MetricTable table = read_metric_report(dir / "metrics.jsonl");
  ASSERT_EQ(table.size(), 40u);
  EXPECT_TRUE(table.begin()->second.count("foot_skating"));
  EXPECT_TRUE(fs::exists(dir / "metrics.jsonl.aggregate.json"));

  r = run_cli({"filter", "--manifest", manifest, "--scores", (dir / "metrics.jsonl").string(), "--percentile", "50",
               "--group-by", "subcategory", "--taxonomy", (dir / "taxonomy.json").string(), "--compare-global",
               "--out-dir", (dir / "filtered").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kept = read_manifest(dir / "filtered" / "kept.jsonl");
  const auto removed = read_manifest(dir / "filtered" / "removed.jsonl");
  EXPECT_EQ(kept.size() + removed.size(), 40u);
  const auto retention = load(dir / "filtered" / "retention.json");
  EXPECT_TRUE(retention.contains("groups"));

  r = run_cli({"filter", "--manifest", manifest, "--scores", (dir / "metrics.jsonl").string(), "--metric",
               "foot_skating", "--mode", "drop-top", "--percentile", "15", "--group-by", "subcategory", "--exempt",
               "Skateboarding", "--out-dir", (dir / "skate").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& c : read_manifest(dir / "skate" / "removed.jsonl")) EXPECT_NE(c.subcategory, "Skateboarding");

  r = run_cli({"partition", "--manifest", manifest, "--scores", (dir / "metrics.jsonl").string(), "--out-dir",
               (dir / "tiers").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* t : {"V_A", "V_B", "V_C", "V_D"}) EXPECT_TRUE(fs::exists(dir / "tiers" / (std::string(t) + ".jsonl")));

  r = run_cli({"report", "--manifest", manifest, "--taxonomy", (dir / "taxonomy.json").string(), "--metrics",
               (dir / "metrics.jsonl").string(), "--level", "subcategory", "--out", (dir / "report.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = load(dir / "report.json");
  EXPECT_EQ(rep["aggregates"][0]["node"], "overall");
  EXPECT_EQ(rep["aggregates"][0]["clip_count"], 40);
  EXPECT_EQ(rep["stats"]["total_clips"], 40);
  EXPECT_TRUE(rep["chart"]["metrics"]["foot_skating"]["inverted"].get<bool>());
}

TEST(Cli, FilterMissingScoreIsPartialFailure) {
  TempDir dir("cli");
  mtk::testing::write_fixture_dataset(dir.path(), 4, 5);
  write_text_file(dir / "scores.jsonl", "{\"clip_id\":\"clip00000\",\"metrics\":{\"dynamic_score\":0.5}}\n");
  const auto r = run_cli({"filter", "--manifest", (dir / "manifest.jsonl").string(), "--scores",
                          (dir / "scores.jsonl").string(), "--percentile", "50", "--out-dir", (dir / "f").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(read_manifest(dir / "f" / "kept.jsonl").size(), 1u);
}

TEST(Cli, EvalWritesAllMetrics) {
  TempDir dir("cli");
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  auto make = [&](std::size_t n, double shift) {
    RowMatrix x(n, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(g(rng) + shift);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
    return EmbeddingSet(x, ids);
  };
  const auto real = make(64, 0.0);
  write_embeddings(real, dir / "real.emb");
  write_embeddings(make(64, 1.0), dir / "gen.emb");
  const auto r = run_cli({"eval", "--real", (dir / "real.emb").string(), "--generated", (dir / "gen.emb").string(),
                          "--text", (dir / "real.emb").string(), "--motion", (dir / "real.emb").string(),
                          "--diversity-pairs", "20", "--out", (dir / "eval.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load(dir / "eval.json");
  EXPECT_GT(j["fid"].get<double>(), 0.5);
  EXPECT_EQ(j["matching_score"].get<double>(), 0.0);
  EXPECT_EQ(j["r_precision"]["top1"].get<double>(), 1.0);
  EXPECT_TRUE(j.contains("diversity_real"));

  // Default 300 diversity pairs need 600 rows; the metric is skipped, not fatal.
  const auto s = run_cli({"eval", "--real", (dir / "real.emb").string(), "--out", (dir / "e2.json").string()});
  EXPECT_EQ(s.code, 1);
  EXPECT_TRUE(load(dir / "e2.json")["skipped"].contains("diversity_real"));
}

TEST(Cli, ConvertCanonicalizesPoseJson) {
  TempDir dir("cli");
  const Skeleton sk = mtk::testing::mini_skeleton();
  write_skeleton(sk, dir / "skel.json");
  nlohmann::ordered_json pose;
  pose["fps"] = 60.0;
  pose["root_translation"] = nlohmann::ordered_json::array();
  pose["rotations"] = nlohmann::ordered_json::array();
  const double s = std::sqrt(0.5);
  for (int t = 0; t < 5; ++t) {
    pose["root_translation"].push_back({1.0 + 0.1 * t, 0.2, -2.0});
    auto frame = nlohmann::ordered_json::array();
    frame.push_back({s, 0.0, s, 0.0});  // 90 degrees about Y
    for (int j = 1; j < 6; ++j) frame.push_back({1.0, 0.0, 0.0, 0.0});
    pose["rotations"].push_back(frame);
  }
  write_json_file(dir / "pose.json", pose);
  const auto r = run_cli({"convert", "--in", (dir / "pose.json").string(), "--out", (dir / "out.mot").string(),
                          "--skeleton", (dir / "skel.json").string(), "--resample", "30", "--canonicalize", "--head",
                          "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const MotionSequence m = read_motion(dir / "out.mot");
  EXPECT_EQ(m.num_frames(), 3u);
  EXPECT_EQ(m.fps(), 30.0);
  EXPECT_NEAR(m.coord(0, 0, 0), 0.0, 1e-6);
  EXPECT_NEAR(m.coord(0, 0, 2), 0.0, 1e-6);
  EXPECT_NEAR(m.coord(0, 4, 1), 0.0, 1e-6);
  EXPECT_NEAR(facing_angle(m, 0, mtk::testing::mini_canonical_config()), 0.0, 1e-5);
}

TEST(Cli, ExportVizScene) {
  TempDir dir("cli");
  mtk::testing::write_fixture_dataset(dir.path(), 3, 7);
  write_skeleton(mtk::testing::mini_skeleton(), dir / "skel.json");
  ASSERT_EQ(run_cli({"score", "--manifest", (dir / "manifest.jsonl").string(), "--out", (dir / "s.jsonl").string()}).code, 0);
  const auto r = run_cli({"export-viz", "--manifest", (dir / "manifest.jsonl").string(), "--skeleton",
                          (dir / "skel.json").string(), "--metrics", (dir / "s.jsonl").string(), "--clip", "clip00001",
                          "--stride", "2", "--out", (dir / "scene.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const VizScene scene = parse_viz_scene(load(dir / "scene.json"));
  ASSERT_EQ(scene.tracks.size(), 1u);
  EXPECT_EQ(scene.tracks[0].clip_id, "clip00001");
  EXPECT_TRUE(scene.tracks[0].badges.count("dynamic_score"));
  EXPECT_EQ(scene.tracks[0].fps, 15.0);
}
