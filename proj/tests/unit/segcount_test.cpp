#include "segcount.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "error.hpp"
#include "perturb.hpp"
#include "synth.hpp"

namespace nosense {
namespace {

Embedding axis(std::size_t i, std::size_t d) {
  std::vector<double> v(d, 0.0);
  v[i] = 1.0;
  return normalize(v);
}

ObjectInstance chair(const std::string& id) { return {id, "chair"}; }

// One frame per entry; each frame shows the listed objects in the given room.
FrameStream annotated(const std::vector<std::pair<std::string, std::vector<ObjectInstance>>>& frames) {
  std::vector<Embedding> rows;
  for (const auto& f : frames) rows.push_back(axis(f.first == "A" ? 0 : 1, 2));
  auto s = make_stream("scene", std::move(rows));
  for (std::size_t i = 0; i < frames.size(); ++i) s.frames[i].annotation = FrameAnnotation{frames[i].first, frames[i].second};
  return s;
}

FrameStream two_room_stream() {
  return annotated({
      {"A", {chair("c1"), chair("c2")}},
      {"A", {chair("c3"), {"t1", "table"}}},
      {"A", {chair("c1")}},
      {"B", {chair("c4")}},
      {"B", {chair("c5"), chair("c4")}},
  });
}

TEST(Surprise, ConstantStreamHasNoBoundaries) {
  auto s = make_stream("c", std::vector<Embedding>(50, axis(0, 4)));
  const auto r = surprise_signal(s);
  ASSERT_EQ(r.surprise.size(), 50u);
  for (double x : r.surprise) EXPECT_NEAR(x, 0.0, 1e-15);
  EXPECT_TRUE(r.boundaries.empty());
}

TEST(Surprise, OrthogonalClustersGiveOneBoundary) {
  std::vector<Embedding> rows(10, axis(0, 3));
  rows.insert(rows.end(), 10, axis(1, 3));
  const auto r = surprise_signal(make_stream("two", std::move(rows)));
  EXPECT_NEAR(r.surprise[10], 1.0, 1e-15);
  EXPECT_EQ(r.boundaries, (std::vector<std::int64_t>{11}));
}

TEST(Surprise, FixedRuleUsesTau) {
  std::vector<Embedding> rows(5, axis(0, 3));
  rows.insert(rows.end(), 5, axis(1, 3));
  SurpriseConfig fixed;
  fixed.rule = SurpriseConfig::Rule::kFixed;
  fixed.tau = 0.5;
  EXPECT_EQ(surprise_signal(make_stream("two", rows), fixed).boundaries, (std::vector<std::int64_t>{6}));
  fixed.tau = 1.0;
  EXPECT_TRUE(surprise_signal(make_stream("two", rows), fixed).boundaries.empty());
}

TEST(Surprise, DriftingRoomRepeatedFiresAtSeamOnly) {
  // Slow rotation through 70 degrees; the seam jumps back to the start.
  std::vector<Embedding> rows;
  const int n = 30;
  for (int t = 0; t < n; ++t) {
    const double a = (70.0 * std::numbers::pi / 180.0) * t / (n - 1);
    rows.push_back(normalize(std::vector<double>{std::cos(a), std::sin(a), 0.0}));
  }
  const auto s = make_stream("drift", std::move(rows));
  EXPECT_TRUE(surprise_signal(s).boundaries.empty());
  const auto twice = repeat_stream(s, 2);
  EXPECT_EQ(surprise_signal(twice).boundaries, (std::vector<std::int64_t>{n + 1}));
}

TEST(Surprise, EmptyStreamAndBadConfig) {
  FrameStream empty;
  EXPECT_THROW(surprise_signal(empty), Error);
  SurpriseConfig bad;
  bad.window = 1;
  try {
    surprise_signal(make_stream("x", {axis(0, 2)}), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
}

TEST(SegmentCount, TwoRoomsWithBoundary) {
  const auto s = two_room_stream();
  const std::vector<std::int64_t> b{4};
  const auto r = segment_count(s, "chair", b);
  EXPECT_EQ(r.prediction, 5);
  ASSERT_EQ(r.segments.size(), 2u);
  EXPECT_EQ(r.segments[0].count, 3);
  EXPECT_EQ(r.segments[0].start_t, 1);
  EXPECT_EQ(r.segments[0].end_t, 3);
  EXPECT_EQ(r.segments[1].count, 2);
  EXPECT_EQ(r.segments[1].start_t, 4);
  EXPECT_EQ(unique_count_oracle(s, "chair"), 5);
}

TEST(SegmentCount, SurpriseBoundariesMatchRooms) {
  const auto s = two_room_stream();
  EXPECT_EQ(surprise_signal(s).boundaries, (std::vector<std::int64_t>{4}));
  EXPECT_EQ(ideal_boundaries(s), (std::vector<std::int64_t>{4}));
  EXPECT_EQ(segment_count(s, "chair", SurpriseConfig{}).prediction, 5);
}

TEST(SegmentCount, SplittingARoomDoubleCounts) {
  const auto s = two_room_stream();
  const std::vector<std::int64_t> b{3, 4};
  // c1 is seen in segment [1,2] and again in [3,3].
  EXPECT_EQ(segment_count(s, "chair", b).prediction, 6);
}

TEST(SegmentCount, RepeatDoublesPrediction) {
  const auto s = repeat_stream(two_room_stream(), 2);
  EXPECT_EQ(ideal_boundaries(s), (std::vector<std::int64_t>{4, 6, 9}));
  EXPECT_EQ(segment_count(s, "chair", ideal_boundaries(s)).prediction, 10);
  EXPECT_EQ(segment_count(s, "chair", SurpriseConfig{}).prediction, 10);
  EXPECT_EQ(unique_count_oracle(s, "chair"), 5);
}

TEST(SegmentCount, MissingAnnotations) {
  auto s = two_room_stream();
  s.frames[2].annotation.reset();
  try {
    segment_count(s, "chair", std::vector<std::int64_t>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingMetadata);
  }
  EXPECT_THROW(unique_count_oracle(s, "chair"), Error);
  EXPECT_THROW(ideal_boundaries(s), Error);
}

TEST(UniqueCountOracle, SceneExamples) {
  CountingScene scene;
  scene.target_category = "chair";
  scene.rooms = {{"kitchen", 10, {chair("a"), chair("b"), {"t", "table"}}}, {"hall", 10, {chair("c")}}};
  EXPECT_EQ(unique_count_oracle(scene), 3);
  EXPECT_EQ(unique_count_oracle(repeat_scene(scene, 4)), 3);
  scene.target_category = "sofa";
  EXPECT_EQ(unique_count_oracle(scene), 0);
}

TEST(SegmentCountProperty, PredictionScalesWithRepeats) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    VscSynthParams p;
    p.rooms = 2 + static_cast<int>(seed % 4);
    p.seed = seed;
    const auto inst = gen_vsc_scene(p);
    const auto base = segment_count(inst.stream, "chair", SurpriseConfig{}).prediction;
    ASSERT_EQ(base, inst.gold) << "seed " << seed;
    for (int k = 2; k <= 4; ++k) {
      const auto rep = repeat_stream(inst.stream, k);
      ASSERT_EQ(segment_count(rep, "chair", SurpriseConfig{}).prediction, k * base) << "seed " << seed << " k " << k;
      ASSERT_EQ(unique_count_oracle(rep, "chair"), inst.gold);
    }
  }
}

TEST(SurpriseProperty, NoisyScenesSegmentAtRoomChanges) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    VscSynthParams p;
    p.rooms = 2 + static_cast<int>(seed % 4);
    p.noise = 0.3 * static_cast<double>(seed % 4) / 3.0;
    p.seed = 100 + seed;
    const auto inst = gen_vsc_scene(p);
    const auto rep = repeat_stream(inst.stream, 1 + static_cast<int>(seed % 3));
    ASSERT_EQ(surprise_signal(rep).boundaries, ideal_boundaries(rep)) << "seed " << seed;
  }
}

}  // namespace
}  // namespace nosense
