#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affectkit/lma.hpp"
#include "affectkit/simkit.hpp"

using namespace affectkit;
using J = Joint;

namespace {

// Normalized sequence of T frames built from a pose function; scale 1.
template <typename Fn>
NormalizedSequence nseq_of(std::size_t T, Fn&& pose_at) {
  NormalizedSequence n;
  n.frames.resize(T);
  for (std::size_t t = 0; t < T; ++t) n.frames[t] = pose_at(static_cast<double>(t));
  return n;
}

NormalizedPose all_at(Point2 p) {
  NormalizedPose pose;
  pose.fill(p);
  return pose;
}

SkeletonSequence raw_with(std::size_t T, const std::vector<std::pair<J, Point2>>& visible) {
  SkeletonSequence s;
  s.instance_id = "x";
  s.frames.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    s.frames[t].frame = static_cast<std::int64_t>(t);
    for (auto [j, p] : visible) s.frames[t][j] = {p.x, p.y, 1.0};
  }
  return s;
}

SkeletonSequence composite(std::uint64_t seed, std::size_t frames = 90, double missing = 0.0) {
  sim::MotionSpec spec;
  spec.kind = sim::MotionKind::kComposite;
  spec.frames = frames;
  spec.missing_rate = missing;
  return sim::gen_skeletons(spec, seed);
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

TEST(Normalize, SingleLimbLengthTwo) {
  auto seq = raw_with(4, {{J::kNeck, {0, 0}}, {J::kNose, {0, 2}}});
  auto n = normalize_sequence(seq, default_limb_graph());
  EXPECT_DOUBLE_EQ(n.scale, 2.0);
  EXPECT_EQ(n.visible_terms, 4u);
  EXPECT_DOUBLE_EQ(n.frames[0][idx(J::kNose)]->y, 1.0);
  EXPECT_FALSE(n.frames[0][idx(J::kRWrist)].has_value());
}

TEST(Normalize, TwoLimbsLengthsOneAndThree) {
  LimbGraph g({{0, 1}, {1, 2}});
  auto seq = raw_with(3, {{J::kNose, {0, 0}}, {J::kNeck, {1, 0}}, {J::kRShoulder, {1, 3}}});
  EXPECT_DOUBLE_EQ(normalize_sequence(seq, g).scale, 2.0);
}

TEST(Normalize, ScaledInputGivesSameCoordinates) {
  auto seq = composite(3);
  auto a = normalize_sequence(seq, default_limb_graph());
  auto b = normalize_sequence(sim::transform_sequence(seq, 7.5, 0, {}), default_limb_graph());
  for (std::size_t t = 0; t < a.length(); ++t)
    for (std::size_t k = 0; k < kNumJoints; ++k) {
      EXPECT_NEAR(a.frames[t][k]->x, b.frames[t][k]->x, 1e-12 * std::abs(a.frames[t][k]->x) + 1e-15);
      EXPECT_NEAR(a.frames[t][k]->y, b.frames[t][k]->y, 1e-12 * std::abs(a.frames[t][k]->y) + 1e-15);
    }
}

TEST(Normalize, RawOverScaleExactly) {
  auto seq = composite(4);
  auto n = normalize_sequence(seq, default_limb_graph());
  EXPECT_GT(n.scale, 0);
  for (std::size_t t = 0; t < n.length(); ++t)
    for (std::size_t k = 0; k < kNumJoints; ++k) EXPECT_EQ(n.frames[t][k]->x, seq.frames[t].joints[k].x / n.scale);
}

TEST(Normalize, NoVisibleLimbThrows) {
  auto seq = raw_with(3, {{J::kNose, {0, 0}}});
  EXPECT_THROW(normalize_sequence(seq, default_limb_graph()), NormalizationError);
  EXPECT_THROW(extract_all(seq, default_limb_graph()), NormalizationError);
}

TEST(Body, FeetAtUnitDistanceFromHips) {
  auto n = nseq_of(3, [](double) {
    NormalizedPose p;
    p[idx(J::kRHip)] = Point2{-1, 0};
    p[idx(J::kLHip)] = Point2{1, 0};
    p[idx(J::kRAnkle)] = Point2{-1, 1};
    p[idx(J::kLAnkle)] = Point2{1.6, 0.8};
    return p;
  });
  auto b = body_features(n);
  for (const auto& v : b.feet_hip) EXPECT_DOUBLE_EQ(*v, 1.0);
  for (const auto& v : b.hands) EXPECT_FALSE(v.has_value());
  for (const auto& v : b.centroid_pelvis) ASSERT_TRUE(v.has_value());
}

TEST(Body, CoincidentJointsGiveZeroDistances) {
  auto b = body_features(nseq_of(2, [](double) { return all_at({3, 4}); }));
  for (const Series* s : {&b.feet_hip, &b.hands_shoulder, &b.hands, &b.hands_head, &b.centroid_pelvis, &b.gait})
    for (const auto& v : *s) EXPECT_EQ(*v, 0.0);
}

TEST(Body, HandsToHead) {
  auto b = body_features(nseq_of(1, [](double) {
    NormalizedPose p;
    p[idx(J::kRWrist)] = Point2{1, 0};
    p[idx(J::kLWrist)] = Point2{-1, 0};
    p[idx(J::kNose)] = Point2{0, 1};
    return p;
  }));
  EXPECT_DOUBLE_EQ(*b.hands_head[0], std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(*b.hands[0], 2.0);
}

TEST(Kinematics, StationaryIsZero) {
  auto k = joint_kinematics(nseq_of(50, [](double) { return all_at({1, 2}); }), {15});
  for (const auto& g : k)
    for (const Series* s : {&g.speed, &g.acceleration, &g.jerk})
      for (const auto& v : *s)
        if (v) EXPECT_EQ(*v, 0.0);
}

TEST(Kinematics, UniformMotion) {
  auto k = joint_kinematics(nseq_of(60, [](double t) { return all_at({t, 0}); }), {15});
  for (const auto& g : k) {
    for (std::size_t t = 0; t < 60; ++t) {
      ASSERT_EQ(g.speed[t].has_value(), t + 15 < 60);
      if (g.speed[t]) EXPECT_NEAR(*g.speed[t], 1.0, 1e-12);
      ASSERT_EQ(g.acceleration[t].has_value(), t + 30 < 60);
      if (g.acceleration[t]) EXPECT_NEAR(*g.acceleration[t], 0.0, 1e-12);
      ASSERT_EQ(g.jerk[t].has_value(), t + 45 < 60);
    }
  }
}

TEST(Kinematics, QuadraticMotion) {
  auto k = joint_kinematics(nseq_of(60, [](double t) { return all_at({t * t, 0}); }), {15});
  for (const auto& g : k) {
    for (std::size_t t = 0; t + 15 < 60; ++t) EXPECT_NEAR(*g.speed[t], 2.0 * static_cast<double>(t) + 15, 1e-9);
    for (std::size_t t = 0; t + 30 < 60; ++t) EXPECT_NEAR(*g.acceleration[t], 2.0, 1e-9);
    for (std::size_t t = 0; t + 45 < 60; ++t) EXPECT_NEAR(*g.jerk[t], 0.0, 1e-9);
  }
}

TEST(Kinematics, InvisibleDependencyIsMissing) {
  auto n = nseq_of(40, [](double t) { return all_at({t, 0}); });
  n.frames[20][idx(J::kRWrist)].reset();
  auto hands = joint_kinematics(n, {5})[2];
  EXPECT_FALSE(hands.speed[20].has_value());
  EXPECT_FALSE(hands.speed[15].has_value());
  EXPECT_TRUE(hands.speed[16].has_value());
}

TEST(Kinematics, TauBounds) {
  auto n = nseq_of(10, [](double t) { return all_at({t, 0}); });
  EXPECT_THROW(joint_kinematics(n, {0}), DomainError);
  EXPECT_THROW(joint_kinematics(n, {10}), DomainError);
  EXPECT_NO_THROW(joint_kinematics(n, {9}));
}

namespace {

// Edge 0 = (0,1), edge 1 = (2,3); the pose sets limb directions directly.
NormalizedSequence two_limbs(std::size_t T, Point2 u, std::function<Point2(double)> v) {
  return nseq_of(T, [&](double t) {
    NormalizedPose p;
    p[0] = u;
    p[1] = Point2{0, 0};
    p[2] = v(t);
    p[3] = Point2{0, 0};
    return p;
  });
}

}  // namespace

TEST(Angles, ClosedFormCases) {
  LimbGraph g({{0, 1}, {2, 3}});
  auto theta = [&](Point2 u, Point2 v) {
    return *angular_kinematics(two_limbs(2, u, [v](double) { return v; }), g, {1})[0].theta[0];
  };
  EXPECT_DOUBLE_EQ(theta({1, 0}, {0, 1}), std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(theta({1, 0}, {3, 0}), 0.0);
  EXPECT_DOUBLE_EQ(theta({1, 0}, {-2, 0}), std::numbers::pi);
  EXPECT_DOUBLE_EQ(theta({1, 1}, {-1, 1}), std::numbers::pi / 2);
}

TEST(Angles, ConstantRotation) {
  LimbGraph g({{0, 1}, {2, 3}});
  auto n = two_limbs(100, {1, 0}, [](double t) { return Point2{std::cos(0.2 + 0.01 * t), std::sin(0.2 + 0.01 * t)}; });
  auto a = angular_kinematics(n, g, {15})[0];
  for (std::size_t t = 0; t + 15 < 100; ++t) EXPECT_NEAR(*a.omega[t], 0.01, 1e-6);
  for (std::size_t t = 0; t + 30 < 100; ++t) EXPECT_NEAR(*a.alpha[t], 0.0, 1e-6);
}

TEST(Angles, ZeroLengthLimbIsMissing) {
  LimbGraph g({{0, 1}, {2, 3}});
  auto a = angular_kinematics(two_limbs(3, {0, 0}, [](double) { return Point2{1, 0}; }), g, {1})[0];
  for (const auto& v : a.theta) EXPECT_FALSE(v.has_value());
}

TEST(Angles, PairCountAndOrder) {
  auto n = normalize_sequence(composite(1, 30), default_limb_graph());
  auto a = angular_kinematics(n, default_limb_graph(), {5});
  ASSERT_EQ(a.size(), 253u);
  EXPECT_EQ(a[0].first, 0u);
  EXPECT_EQ(a[0].second, 1u);
  EXPECT_EQ(a[22].first, 1u);
  EXPECT_EQ(a[22].second, 2u);
}

TEST(Shape, VerticalLineHasZeroVolume) {
  auto s = shape_features(nseq_of(1, [](double) {
    NormalizedPose p;
    for (std::size_t k = 0; k < kNumJoints; ++k) p[k] = Point2{2, static_cast<double>(k)};
    return p;
  }));
  for (const Series* x : {&s.volume, &s.volume_upper, &s.volume_lower, &s.volume_left, &s.volume_right})
    EXPECT_EQ(*(*x)[0], 0.0);
}

TEST(Shape, UnitSquareAndUpperBox) {
  auto s = shape_features(nseq_of(1, [](double) {
    NormalizedPose p;
    p[idx(J::kNose)] = Point2{0, 0};
    p[idx(J::kRWrist)] = Point2{2, 0.5};
    p[idx(J::kRAnkle)] = Point2{0, 1};
    p[idx(J::kLAnkle)] = Point2{1, 1};
    return p;
  }));
  EXPECT_DOUBLE_EQ(*s.volume_upper[0], 1.0);
  EXPECT_DOUBLE_EQ(*s.volume[0], 2.0);

  auto sq = shape_features(nseq_of(1, [](double) {
    NormalizedPose p;
    p[idx(J::kRAnkle)] = Point2{0, 0};
    p[idx(J::kLAnkle)] = Point2{1, 0};
    p[idx(J::kRKnee)] = Point2{0, 1};
    p[idx(J::kLKnee)] = Point2{1, 1};
    return p;
  }));
  EXPECT_DOUBLE_EQ(*sq.volume[0], 1.0);
  EXPECT_DOUBLE_EQ(*sq.volume_lower[0], 1.0);
  EXPECT_FALSE(sq.volume_upper[0].has_value());
  EXPECT_FALSE(sq.torso_height[0].has_value());
}

TEST(Summary, Examples) {
  auto c = summarize({3.0, 3.0, 3.0});
  EXPECT_EQ(*c.max, 3);
  EXPECT_EQ(*c.min, 3);
  EXPECT_EQ(*c.mean, 3);
  EXPECT_EQ(*c.std, 0);
  auto two = summarize({1.0, std::nullopt, 3.0});
  EXPECT_EQ(*two.max, 3);
  EXPECT_EQ(*two.min, 1);
  EXPECT_EQ(*two.mean, 2);
  EXPECT_EQ(*two.std, 1);
  auto none = summarize({std::nullopt, std::nullopt});
  EXPECT_FALSE(none.max || none.min || none.mean || none.std);
  auto one = summarize({5.0});
  EXPECT_FALSE(one.max || one.std);
}

TEST(Extract, DimensionAndNames) {
  const auto names = lma_feature_names(default_limb_graph());
  EXPECT_EQ(names.size(), kLmaDim);
  EXPECT_EQ(kLmaDim, 30u * 4 + 2u * 4 * 253);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), names.size());
  EXPECT_EQ(names.front(), "f1_max");
  EXPECT_EQ(names.back(), "f24_std");
  auto fv = extract_all(composite(2), default_limb_graph());
  EXPECT_EQ(fv.size(), kLmaDim);
  EXPECT_EQ(fv, extract_all(composite(2), default_limb_graph()));
  EXPECT_EQ(lma_dim(LimbGraph({{0, 1}, {1, 2}, {2, 3}}).size()), 4u * (30 + 2 * 3));
}

TEST(Extract, HandsNeverVisible) {
  auto seq = composite(5, 60);
  for (auto& f : seq.frames)
    for (J j : {J::kRWrist, J::kLWrist}) f[j] = {0, 0, 0};
  const auto limbs = default_limb_graph();
  const auto names = lma_feature_names(limbs);
  std::set<std::string> wrist_edges;
  for (std::size_t i = 0; i < limbs.size(); ++i) {
    const auto& e = limbs.edges()[i];
    for (J j : {J::kRWrist, J::kLWrist})
      if (e.a == idx(j) || e.b == idx(j)) wrist_edges.insert("e" + std::to_string(i));
  }
  auto fv = extract_all(seq, limbs);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto& n = names[i];
    bool hands = starts_with(n, "f2_") || starts_with(n, "f3_") || starts_with(n, "f4_") || starts_with(n, "f13_") ||
                 starts_with(n, "f16_") || starts_with(n, "f40_");
    if (starts_with(n, "f38_") || starts_with(n, "f39_")) {
      auto parts = text::split(n, '_');
      hands = wrist_edges.count(parts[1]) || wrist_edges.count(parts[2]);
    }
    EXPECT_EQ(fv.values[i].has_value(), !hands) << n;
  }
}

TEST(Extract, StationaryHasZeroVelocities) {
  sim::MotionSpec spec;
  spec.frames = 40;
  auto fv = extract_all(sim::gen_skeletons(spec, 0), default_limb_graph());
  const auto names = lma_feature_names(default_limb_graph());
  for (const char* id : {"f29", "f32", "f13", "f12", "f35", "f14"})
    for (const char* st : {"max", "min", "mean", "std"}) {
      auto i = std::find(names.begin(), names.end(), std::string(id) + "_" + st) - names.begin();
      EXPECT_EQ(*fv.values[i], 0.0) << id << "_" << st;
    }
}

TEST(Properties, ThetaRangeAndNonNegativeStd) {
  const auto limbs = default_limb_graph();
  const auto names = lma_feature_names(limbs);
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto seq = composite(s, 60, 0.1);
    auto n = normalize_sequence(seq, limbs);
    for (const auto& a : angular_kinematics(n, limbs, {5}))
      for (const auto& v : a.theta)
        if (v) {
          EXPECT_GE(*v, 0.0);
          EXPECT_LE(*v, std::numbers::pi);
        }
    auto fv = extract_all(seq, limbs);
    for (std::size_t i = 0; i < names.size(); ++i)
      if (starts_with(names[i].substr(names[i].rfind('_')), "_std") && fv.values[i]) EXPECT_GE(*fv.values[i], 0.0);
  }
}

TEST(Properties, TimeReversal) {
  const auto limbs = default_limb_graph();
  const auto names = lma_feature_names(limbs);
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto seq = composite(s, 91);
    auto rev = seq;
    std::reverse(rev.frames.begin(), rev.frames.end());
    for (std::size_t t = 0; t < rev.frames.size(); ++t) rev.frames[t].frame = static_cast<std::int64_t>(t);
    auto a = extract_all(seq, limbs);
    auto b = extract_all(rev, limbs);
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto& n = names[i];
      const bool distance = starts_with(n, "f1_") || starts_with(n, "f2_") || starts_with(n, "f3_") ||
                            starts_with(n, "f4_") || starts_with(n, "f8_") || starts_with(n, "f9_");
      const bool speed_mean = n.ends_with("_mean") && (starts_with(n, "f29_") || starts_with(n, "f32_") ||
                                                       starts_with(n, "f13_") || starts_with(n, "f12_") ||
                                                       starts_with(n, "f35_") || starts_with(n, "f14_"));
      if ((distance && !n.ends_with("_std")) || speed_mean)
        EXPECT_NEAR(*a.values[i], *b.values[i], 1e-12 * std::max(1.0, std::abs(*a.values[i]))) << n;
    }
  }
}

TEST(FeatureTable, RoundTripWithMissing) {
  const auto limbs = default_limb_graph();
  std::vector<LmaFeatureVector> rows = {extract_all(composite(1, 40, 0.2), limbs), extract_all(composite(2, 40), limbs)};
  std::ostringstream out;
  write_feature_table(out, lma_feature_names(limbs), {"a", "b"}, rows);
  std::istringstream in(out.str());
  auto t = read_feature_table(in);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.names, lma_feature_names(limbs));
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < kLmaDim; ++c) {
      ASSERT_EQ(t.rows[r][c].has_value(), rows[r].values[c].has_value());
      if (t.rows[r][c]) EXPECT_EQ(*t.rows[r][c], *rows[r].values[c]);
    }
  EXPECT_EQ(*t.column("f16_mean"), 4u * 6 + 4 * 8 + 2);
}

TEST(Batch, OrderAndThreadIndependence) {
  std::vector<SkeletonSequence> seqs;
  for (std::uint64_t s = 0; s < 12; ++s) seqs.push_back(composite(s, 40));
  seqs[5] = raw_with(40, {{J::kNose, {0, 0}}});
  auto one = extract_batch(seqs, default_limb_graph(), {5}, 1);
  auto four = extract_batch(seqs, default_limb_graph(), {5}, 4);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one[5].size(), 0u);
  EXPECT_EQ(one[3], extract_all(seqs[3], default_limb_graph(), {5}));
}
