#include <gtest/gtest.h>

#include <sstream>

#include "test_helpers.hpp"

using namespace mtk;

namespace {

MotionSequence still(std::size_t frames, double fps = 30.0) {
  return MotionSequence::from_fn(frames, 1, fps, [](std::size_t, std::size_t) { return Eigen::Vector3d::Zero(); });
}

ClipRecord record_for(const MotionSequence& m) {
  ClipRecord r;
  r.clip_id = "clip";
  r.fps = m.fps();
  r.num_frames = m.num_frames();
  return r;
}

Taxonomy sports() {
  return Taxonomy::from_json(nlohmann::ordered_json::parse(R"({
    "Sports": {
      "Table Tennis": ["Swing racket", "Serve ball"],
      "Skateboarding": ["Ride board"]
    },
    "Daily Life": {
      "Office Work": ["Type on keyboard"]
    }
  })"));
}

}  // namespace

TEST(MotionSequence, RejectsBadShapes) {
  EXPECT_ERRC(Errc::InvalidArgument, MotionSequence(0, 1, 30.0, {}));
  EXPECT_ERRC(Errc::InvalidArgument, MotionSequence(1, 1, 0.0, {0, 0, 0}));
  EXPECT_ERRC(Errc::ShapeMismatch, MotionSequence(2, 1, 30.0, {0, 0, 0}));
  EXPECT_ERRC(Errc::NonFinite, MotionSequence(1, 1, 30.0, {0, std::nan(""), 0}));
}

TEST(Skeleton, EnforcesTopologicalOrder) {
  using V = Eigen::Vector3d;
  EXPECT_ERRC(Errc::InvalidArgument, Skeleton({-1, 2, 0}, {V::Zero(), V::Zero(), V::Zero()}, {}, {}));
  EXPECT_ERRC(Errc::InvalidArgument, Skeleton({-1, -1}, {V::Zero(), V::Zero()}, {}, {}));
  EXPECT_ERRC(Errc::InvalidArgument, Skeleton({0, 0}, {V::Zero(), V::Zero()}, {}, {}));
  EXPECT_ERRC(Errc::InvalidArgument, Skeleton({-1, 0}, {V::Zero(), V::Zero()}, {}, {5}));
  const Skeleton ok({-1, 0}, {V::Zero(), V::UnitY()}, {}, {1});
  EXPECT_EQ(ok.names()[1], "joint_1");
}

TEST(ValidateClip, MedianLengthClipIsValid) {
  const auto m = still(114);
  const auto rep = validate_clip(record_for(m), m);
  EXPECT_TRUE(rep.valid);
  EXPECT_TRUE(rep.violations.empty());
}

TEST(ValidateClip, FrameBoundsAreInclusive) {
  for (std::size_t f : {30u, 600u}) {
    const auto m = still(f);
    EXPECT_TRUE(validate_clip(record_for(m), m).valid) << f;
  }
  for (std::size_t f : {29u, 601u}) {
    const auto m = still(f);
    const auto rep = validate_clip(record_for(m), m);
    EXPECT_FALSE(rep.valid) << f;
    ASSERT_EQ(rep.violations.size(), 1u);
    EXPECT_EQ(rep.violations[0].rule, f == 29 ? "too_short" : "too_long");
  }
}

TEST(ValidateClip, ReportsEveryViolationAndIsPure) {
  const auto m = still(10, 60.0);
  ClipRecord r = record_for(m);
  r.num_frames = 12;
  r.category = "Nope";
  ValidityPolicy policy;
  policy.required_captions = 5;
  const Taxonomy tax = sports();
  const auto a = validate_clip(r, m, policy, &tax);
  const auto b = validate_clip(r, m, policy, &tax);
  std::vector<std::string> rules;
  for (const auto& v : a.violations) rules.push_back(v.rule);
  EXPECT_EQ(rules, (std::vector<std::string>{"too_short", "fps", "frame_count_mismatch", "caption_count", "taxonomy"}));
  ASSERT_EQ(a.violations.size(), b.violations.size());
  for (std::size_t i = 0; i < a.violations.size(); ++i) EXPECT_EQ(a.violations[i].detail, b.violations[i].detail);
}

TEST(Taxonomy, ResolvesKnownLabel) {
  const Taxonomy tax = sports();
  const auto ref = resolve_taxonomy_label(tax, "Sports", "Table Tennis", "Swing racket");
  EXPECT_EQ(tax.path(ref), "Sports/Table Tennis/Swing racket");
}

TEST(Taxonomy, MatchingIsCaseAndWhitespaceInsensitive) {
  const Taxonomy tax = sports();
  EXPECT_EQ(resolve_taxonomy_label(tax, "sports", "table   tennis", "  SWING racket "),
            resolve_taxonomy_label(tax, "Sports", "Table Tennis", "Swing racket"));
}

TEST(Taxonomy, UnknownLabelNamesTheFailingLevel) {
  const Taxonomy tax = sports();
  try {
    resolve_taxonomy_label(tax, "Sports", "Quidditch", "Catch snitch");
    FAIL() << "expected UnknownLabel";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownLabel);
    EXPECT_NE(std::string(e.what()).find("subcategory"), std::string::npos);
  }
  EXPECT_ERRC(Errc::UnknownLabel, resolve_taxonomy_label(tax, "Cooking", "", ""));
}

TEST(Taxonomy, NormalizationCollisionIsAmbiguous) {
  const Taxonomy tax = Taxonomy::from_json(nlohmann::ordered_json::parse(R"({"Dance": {"Hip Hop": [], "hip  hop": []}})"));
  EXPECT_ERRC(Errc::AmbiguousLabel, tax.resolve("dance", "HIP HOP"));
}

TEST(Taxonomy, RejectsDuplicateSiblings) {
  using Sub = Taxonomy::Subcategory;
  EXPECT_ERRC(Errc::InvalidArgument, Taxonomy({{"A", {Sub{"x", {}}, Sub{"x", {}}}}}));
  EXPECT_ERRC(Errc::InvalidArgument, Taxonomy({{"A", {Sub{"x", {"run", "run"}}}}}));
}

TEST(Taxonomy, SerializeRoundTripPreservesCounts) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Taxonomy::Category> cats;
    const std::size_t nc = 1 + rng() % 6;
    for (std::size_t c = 0; c < nc; ++c) {
      Taxonomy::Category cat{"cat" + std::to_string(c), {}};
      const std::size_t ns = rng() % 5;
      for (std::size_t s = 0; s < ns; ++s) {
        Taxonomy::Subcategory sub{"sub" + std::to_string(s), {}};
        const std::size_t na = rng() % 4;
        for (std::size_t a = 0; a < na; ++a) sub.atomics.push_back("act" + std::to_string(a));
        cat.subcategories.push_back(std::move(sub));
      }
      cats.push_back(std::move(cat));
    }
    const Taxonomy original(cats);
    const Taxonomy back = Taxonomy::from_json(nlohmann::ordered_json::parse(original.to_json().dump()));
    EXPECT_EQ(back.num_categories(), original.num_categories());
    EXPECT_EQ(back.num_subcategories(), original.num_subcategories());
    EXPECT_EQ(back.num_atomics(), original.num_atomics());
  }
}

TEST(NormalizeLabel, CollapsesWhitespace) {
  EXPECT_EQ(normalize_label("  Table\t\tTennis \n"), "table tennis");
  EXPECT_EQ(normalize_label(""), "");
}
