#include <gtest/gtest.h>

#include "test_helpers.hpp"

using namespace mtk;

namespace {

MotionSequence line_x(std::vector<double> xs, std::size_t joints = 1, double fps = 30.0) {
  return MotionSequence::from_fn(xs.size(), joints, fps, [&](std::size_t t, std::size_t j) {
    return j == 0 ? Eigen::Vector3d(xs[t], 0, 0) : Eigen::Vector3d::Zero();
  });
}

PhysicalMetricConfig feet(std::vector<std::size_t> f) {
  PhysicalMetricConfig c;
  c.foot_joints = std::move(f);
  return c;
}

MotionSequence rotated(const MotionSequence& m, const Eigen::Matrix3d& R, const Eigen::Vector3d& shift) {
  return MotionSequence::from_fn(m.num_frames(), m.num_joints(), m.fps(), [&](std::size_t t, std::size_t j) {
    return Eigen::Vector3d(R * m.position(t, j) + shift);
  });
}

}  // namespace

TEST(DynamicScore, DefaultWeights) {
  const DynamicScoreConfig cfg;
  EXPECT_EQ(cfg.w_temporal, 0.7);
  EXPECT_EQ(cfg.w_spatial, 0.3);
}

TEST(DynamicScore, StaticClipIsZero) {
  const auto m = MotionSequence::from_fn(8, 3, 30, [](std::size_t, std::size_t j) { return Eigen::Vector3d(j, 1, -2); });
  const auto r = dynamic_score(m);
  EXPECT_EQ(r.s_temporal, 0.0);
  EXPECT_EQ(r.s_spatial, 0.0);
  EXPECT_EQ(r.s_dynamic, 0.0);
}

TEST(DynamicScore, SingleJointHandValue) {
  const auto r = dynamic_score(line_x({0, 0.1, 0.2}));
  EXPECT_NEAR(r.s_temporal, 0.1, 1e-12);
  EXPECT_NEAR(r.s_spatial, 0.2, 1e-12);
  EXPECT_NEAR(r.s_dynamic, 0.13, 1e-12);
}

TEST(DynamicScore, StaticJointHalvesBothTerms) {
  const auto r = dynamic_score(line_x({0, 0.1, 0.2}, 2));
  EXPECT_NEAR(r.s_temporal, 0.05, 1e-12);
  EXPECT_NEAR(r.s_spatial, 0.1, 1e-12);
  EXPECT_NEAR(r.s_dynamic, 0.065, 1e-12);
}

TEST(DynamicScore, MatchesBruteForceOnRandomMotions) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = mtk::testing::random_motion(rng, 20, 5);
    DynamicScoreConfig cfg;
    if (trial % 2) cfg = {w(rng), w(rng) + 0.01};
    const auto got = dynamic_score(m, cfg);
    const auto want = mtk::testing::oracle_dynamic_score(mtk::testing::to_grid(m), cfg.w_temporal, cfg.w_spatial);
    EXPECT_NEAR(got.s_temporal, want.temporal, 1e-9);
    EXPECT_NEAR(got.s_spatial, want.spatial, 1e-9);
    EXPECT_NEAR(got.s_dynamic, want.dynamic, 1e-9);
  }
}

TEST(DynamicScore, TranslationInvariantAndTemporalRotationInvariant) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> grid(-1024, 1024);
  for (int trial = 0; trial < 30; ++trial) {
    // Dyadic coordinates, so adding the shift below is exact and the
    // invariance can be checked bit for bit.
    const auto m = MotionSequence::from_fn(2 + rng() % 19, 1 + rng() % 5, 30, [&](std::size_t, std::size_t) {
      return Eigen::Vector3d(grid(rng), grid(rng), grid(rng)) / 1024.0;
    });
    const auto base = dynamic_score(m);
    const auto shifted = dynamic_score(rotated(m, Eigen::Matrix3d::Identity(), Eigen::Vector3d(4, -8, 16)));
    EXPECT_EQ(shifted.s_temporal, base.s_temporal);
    EXPECT_EQ(shifted.s_spatial, base.s_spatial);
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    EXPECT_NEAR(dynamic_score(rotated(m, R, Eigen::Vector3d::Zero())).s_temporal, base.s_temporal, 1e-12);
  }
}

TEST(DynamicScore, ShapeMismatchAndBadWeights) {
  const auto m = line_x({0, 0.1, 0.2});
  const auto v = finite_differences(line_x({0, 0.1, 0.2, 0.3}), 1);
  EXPECT_ERRC(Errc::ShapeMismatch, dynamic_score(m, v));
  EXPECT_ERRC(Errc::InvalidArgument, dynamic_score(m, DynamicScoreConfig{-0.1, 1.0}));
  EXPECT_ERRC(Errc::InvalidArgument, dynamic_score(m, DynamicScoreConfig{0.0, 0.0}));
}

TEST(FootSkating, StationaryAndAirborneAreZero) {
  const auto standing = MotionSequence::from_fn(10, 2, 30, [](std::size_t, std::size_t j) { return Eigen::Vector3d(j, 0, 0); });
  EXPECT_EQ(foot_skating(standing, feet({0, 1})), 0.0);
  const auto airborne = MotionSequence::from_fn(10, 2, 30, [](std::size_t t, std::size_t j) {
    return Eigen::Vector3d(0.1 * t, 0.5, j);
  });
  EXPECT_EQ(foot_skating(airborne, feet({0, 1})), 0.0);
}

TEST(FootSkating, OneSlidingFoot) {
  const auto m = MotionSequence::from_fn(200, 2, 30, [](std::size_t t, std::size_t j) {
    return j == 0 ? Eigen::Vector3d(0.01 * t, 0, 0) : Eigen::Vector3d(0, 0, 1);
  });
  EXPECT_NEAR(foot_skating(m, feet({0, 1})), 0.01, 1e-12);
}

TEST(FootSkating, VerticalMotionDoesNotCount) {
  const auto m = MotionSequence::from_fn(10, 1, 30, [](std::size_t t, std::size_t) {
    return Eigen::Vector3d(0, 0.001 * t, 0);
  });
  EXPECT_EQ(foot_skating(m, feet({0})), 0.0);
}

TEST(FootSkating, NeedsFeet) {
  EXPECT_ERRC(Errc::NoFootJoints, foot_skating(line_x({0, 1}), feet({})));
}

TEST(GroundPenetration, Values) {
  EXPECT_EQ(ground_penetration(line_x({0, 1, 2})), 0.0);
  const auto sunk = MotionSequence::from_fn(6, 1, 30, [](std::size_t, std::size_t) { return Eigen::Vector3d(0, -0.02, 0); });
  EXPECT_NEAR(ground_penetration(sunk), 0.02, 1e-15);
  const auto half = MotionSequence::from_fn(6, 2, 30, [](std::size_t t, std::size_t j) {
    return Eigen::Vector3d(0, j == 0 && t % 2 ? -0.02 : 0.3, 0);
  });
  EXPECT_NEAR(ground_penetration(half), 0.01, 1e-15);
}

TEST(Floating, Values) {
  const PhysicalMetricConfig cfg;
  EXPECT_EQ(floating(line_x({0, 1}), cfg), 0.0);
  const auto hover = MotionSequence::from_fn(4, 2, 30, [](std::size_t, std::size_t j) { return Eigen::Vector3d(0, 0.15 + j, 0); });
  EXPECT_NEAR(floating(hover, cfg), 0.10, 1e-12);
  const auto bob = MotionSequence::from_fn(4, 1, 30, [](std::size_t t, std::size_t) {
    return Eigen::Vector3d(0, t % 2 ? 0.25 : 0.05, 0);
  });
  EXPECT_NEAR(floating(bob, cfg), 0.10, 1e-12);
}

TEST(Jerk, PolynomialsOfDegreeTwoVanish) {
  EXPECT_EQ(jerk(line_x({0, 1, 2, 3, 4})), 0.0);
  EXPECT_EQ(jerk(line_x({0, 1, 4, 9, 16, 25})), 0.0);
}

TEST(Jerk, CubicAtOneFps) {
  const auto m = line_x({0, 1, 8, 27, 64, 125}, 1, 1.0);
  EXPECT_DOUBLE_EQ(jerk(m), 6.0);
  EXPECT_DOUBLE_EQ(jerk_per_frame(line_x({0, 1, 8, 27, 64}, 1, 30.0)), 6.0);
  EXPECT_DOUBLE_EQ(jerk(line_x({0, 1, 8, 27, 64}, 1, 2.0)), 48.0);
}

TEST(Jerk, TooFewFrames) {
  EXPECT_ERRC(Errc::TooFewFrames, jerk(line_x({0, 1, 2})));
}

TEST(AccelerationPeaks, StaticAndConstantVelocity) {
  const PhysicalMetricConfig cfg;
  EXPECT_EQ(acceleration_peaks(line_x(std::vector<double>(10, 3.0)), cfg), 0.0);
  EXPECT_EQ(acceleration_peaks(line_x({0, 1, 2, 3, 4, 5}), cfg), 0.0);
}

TEST(AccelerationPeaks, OneSpikeInTwoSeconds) {
  // 60 frames at 30 fps; velocity jumps once, giving a single second difference
  // of 0.01 m/frame^2 = 9 m/s^2.
  std::vector<double> xs(60);
  for (std::size_t t = 0; t < 60; ++t) xs[t] = t <= 30 ? 0.0 : 0.01 * static_cast<double>(t - 30);
  const PhysicalMetricConfig cfg;
  EXPECT_DOUBLE_EQ(acceleration_peaks(line_x(xs), cfg), 0.5);
}

TEST(AccelerationPeaks, TooFewFrames) {
  EXPECT_ERRC(Errc::TooFewFrames, acceleration_peaks(line_x({0, 1}), PhysicalMetricConfig{}));
}

TEST(PhysicalMetrics, ThresholdsMustBePositive) {
  PhysicalMetricConfig cfg;
  cfg.float_height = 0.0;
  EXPECT_ERRC(Errc::InvalidArgument, floating(line_x({0, 1}), cfg));
}

TEST(PhysicalMetrics, ScalingWithThresholdsIsHomogeneous) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = mtk::testing::random_motion(rng, 20, 5, 30.0, 0.3);
    auto cfg = feet({0});
    for (double s : {0.5, 2.0, 10.0}) {
      auto scfg = cfg;
      scfg.contact_height *= s;
      scfg.float_height *= s;
      const auto big = mtk::testing::scaled(m, s);
      const auto a = dynamic_score(m), b = dynamic_score(big);
      EXPECT_NEAR(b.s_temporal, s * a.s_temporal, 1e-12 * s * a.s_temporal);
      EXPECT_NEAR(b.s_spatial, s * a.s_spatial, 1e-12 * s * a.s_spatial);
      EXPECT_NEAR(b.s_dynamic, s * a.s_dynamic, 1e-12 * s * a.s_dynamic);
      EXPECT_NEAR(foot_skating(big, scfg), s * foot_skating(m, cfg), 1e-12 * s * foot_skating(m, cfg) + 1e-300);
      EXPECT_NEAR(ground_penetration(big), s * ground_penetration(m), 1e-12 * s * ground_penetration(m) + 1e-300);
      EXPECT_NEAR(floating(big, scfg), s * floating(m, cfg), 1e-12 * s * floating(m, cfg) + 1e-300);
    }
  }
}

TEST(PhysicalMetrics, FixedThresholdBreaksPlainScaling) {
  // Lowest joint at 0.15 with a fixed 0.05 threshold: 0.10 before, 0.25 after doubling.
  const auto hover = MotionSequence::from_fn(3, 1, 30, [](std::size_t, std::size_t) { return Eigen::Vector3d(0, 0.15, 0); });
  const PhysicalMetricConfig cfg;
  EXPECT_NEAR(floating(mtk::testing::scaled(hover, 2.0), cfg), 0.25, 1e-12);
}

TEST(PhysicalMetrics, ClipMetricKeysDependOnLength) {
  const auto short_clip = line_x({0, 1});
  auto keys = compute_clip_metrics(short_clip, feet({0}));
  EXPECT_TRUE(keys.count("dynamic_score"));
  EXPECT_FALSE(keys.count("jerk"));
  EXPECT_FALSE(keys.count("acceleration_peaks"));
  keys = compute_clip_metrics(line_x({0, 1, 2, 3, 4}), feet({0}));
  for (const char* k : {"s_temporal", "s_spatial", "dynamic_score", "foot_skating", "ground_penetration", "floating",
                        "jerk", "jerk_per_frame3", "acceleration_peaks"})
    EXPECT_TRUE(keys.count(k)) << k;
}
