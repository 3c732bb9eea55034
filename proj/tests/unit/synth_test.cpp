#include "synth.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "error.hpp"
#include "segcount.hpp"

namespace nosense {
namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(GenVsr, NeedlesAreTopFourWithMargin) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    VsrSynthParams p;
    p.seed = seed;
    p.frames = 300;
    const auto inst = gen_vsr_instance(p);
    std::vector<std::pair<double, std::int64_t>> sims;
    for (const auto& f : inst.stream.frames) sims.emplace_back(cosine(f.embedding, inst.queries.object), f.index);
    std::sort(sims.rbegin(), sims.rend());
    std::vector<std::int64_t> top;
    for (int i = 0; i < 4; ++i) top.push_back(sims[static_cast<std::size_t>(i)].second);
    std::sort(top.begin(), top.end());
    EXPECT_EQ(top, std::vector<std::int64_t>(inst.needles.begin(), inst.needles.end()));
    EXPECT_GE(sims[3].first - sims[4].first, 0.1);
    EXPECT_EQ(inst.question.options[static_cast<std::size_t>(inst.question.gold_option - 1)], inst.sigma);
    EXPECT_EQ(answer_vsr(inst.stream, inst.question, inst.queries).scores.answer, inst.question.gold_option);
  }
}

TEST(GenVsr, FourFrameStream) {
  VsrSynthParams p;
  p.frames = 4;
  p.seed = 9;
  const auto inst = gen_vsr_instance(p);
  EXPECT_EQ(inst.needles, (std::array<std::int64_t, 4>{1, 2, 3, 4}));
  EXPECT_EQ(answer_vsr(inst.stream, inst.question, inst.queries).scores.answer, inst.question.gold_option);
}

TEST(GenVsr, ExplicitPlacement) {
  VsrSynthParams p;
  p.frames = 50;
  p.needle_positions = {5, 10, 20, 45};
  p.sigma = Permutation{3, 1, 4, 2};
  const auto inst = gen_vsr_instance(p);
  EXPECT_EQ(inst.needles, (std::array<std::int64_t, 4>{5, 10, 20, 45}));
  EXPECT_EQ(inst.sigma, (Permutation{3, 1, 4, 2}));
  EXPECT_EQ(inst.frames_raw.count(), 50u);
  EXPECT_EQ(inst.text_raw.count(), 5u);
}

TEST(GenVsr, InfeasibleParameters) {
  auto with = [](auto edit) {
    VsrSynthParams p;
    edit(p);
    return [p] { gen_vsr_instance(p); };
  };
  EXPECT_EQ(code_of(with([](auto& p) { p.adversarial_duplicate = true; })), ErrorCode::kInfeasibleParams);
  EXPECT_EQ(code_of(with([](auto& p) { p.frames = 3; })), ErrorCode::kInfeasibleParams);
  EXPECT_EQ(code_of(with([](auto& p) { p.dim = 5; })), ErrorCode::kInfeasibleParams);
  EXPECT_EQ(code_of(with([](auto& p) { p.margin = 1.0; })), ErrorCode::kInfeasibleParams);
  EXPECT_EQ(code_of(with([](auto& p) { p.needle_positions = {1, 1, 2, 3}; })), ErrorCode::kInfeasibleParams);
  EXPECT_EQ(code_of(with([](auto& p) { p.sigma = Permutation{1, 1, 2, 3}; })), ErrorCode::kInfeasibleParams);
  EXPECT_EQ(code_of(with([](auto& p) { p.noise = 2.0; })), ErrorCode::kInfeasibleParams);
}

TEST(GenVsr, SameSeedSameBytes) {
  VsrSynthParams p;
  p.seed = 77;
  const auto a = gen_vsr_instance(p);
  const auto b = gen_vsr_instance(p);
  EXPECT_EQ(a.frames_raw.data, b.frames_raw.data);
  EXPECT_EQ(a.text_raw.data, b.text_raw.data);
  EXPECT_EQ(a.question.options, b.question.options);
  p.seed = 78;
  EXPECT_NE(gen_vsr_instance(p).frames_raw.data, a.frames_raw.data);
}

TEST(TemplatedTextTable, CoversEveryModeText) {
  VsrSynthParams p;
  p.seed = 3;
  const auto inst = gen_vsr_instance(p);
  PromptTemplates t;
  TableTextEncoder enc;
  for (const auto& [text, v] : templated_text_table(inst, t, 3)) enc.add(text, std::vector<double>(v.begin(), v.end()));
  for (auto mode : {QueryMode::kEnsemble, QueryMode::kBasicPrompt, QueryMode::kRawQuestion}) {
    const auto q = build_queries(inst.question, mode, t, enc);
    EXPECT_GT(cosine(q.object, inst.queries.object), 0.5);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(q.aux[i], inst.queries.aux[i]);
  }
}

TEST(GenVsc, ExplicitRoomsGiveGoldFive) {
  VscSynthParams p;
  p.rooms = 2;
  p.targets_per_room = {3, 2};
  const auto inst = gen_vsc_scene(p);
  EXPECT_EQ(inst.gold, 5);
  EXPECT_EQ(inst.stream.size(), 40u);
  EXPECT_EQ(unique_count_oracle(inst.stream, "chair"), 5);
  EXPECT_EQ(surprise_signal(inst.stream).boundaries, (std::vector<std::int64_t>{21}));
  EXPECT_EQ(segment_count(inst.stream, "chair", SurpriseConfig{}).prediction, 5);
}

TEST(GenVsc, RoomCountGivesBoundaries) {
  for (int rooms = 1; rooms <= 6; ++rooms) {
    VscSynthParams p;
    p.rooms = rooms;
    p.seed = static_cast<std::uint64_t>(rooms);
    p.noise = 0.2;
    const auto inst = gen_vsc_scene(p);
    EXPECT_EQ(surprise_signal(inst.stream).boundaries.size(), static_cast<std::size_t>(rooms - 1));
    EXPECT_EQ(ideal_boundaries(inst.stream).size(), static_cast<std::size_t>(rooms - 1));
  }
}

TEST(GenVsc, EmptyRoomsAndShortDwell) {
  VscSynthParams p;
  p.rooms = 3;
  p.targets_per_room = {0, 5, 1};
  p.others_per_room = 0;
  p.dwell_frames = 2;
  const auto inst = gen_vsc_scene(p);
  EXPECT_EQ(inst.gold, 6);
  EXPECT_TRUE(inst.stream.frames[0].annotation->visible.empty());
  // Five objects over two frames: frame j shows objects i with i % 2 == j % 2.
  EXPECT_EQ(inst.stream.frames[2].annotation->visible.size(), 3u);
  EXPECT_EQ(unique_count_oracle(inst.stream, "chair"), 6);
}

TEST(GenVsc, Infeasible) {
  VscSynthParams p;
  p.rooms = 5;
  p.dim = 4;
  EXPECT_EQ(code_of([&] { gen_vsc_scene(p); }), ErrorCode::kInfeasibleParams);
  p.dim = 32;
  p.targets_per_room = {1, 2};
  EXPECT_EQ(code_of([&] { gen_vsc_scene(p); }), ErrorCode::kInfeasibleParams);
}

TEST(GenVsc, Deterministic) {
  VscSynthParams p;
  p.rooms = 4;
  p.noise = 0.1;
  p.seed = 5;
  const auto a = gen_vsc_scene(p);
  const auto b = gen_vsc_scene(p);
  EXPECT_EQ(a.frames_raw.data, b.frames_raw.data);
  EXPECT_EQ(a.gold, b.gold);
  EXPECT_EQ(a.stream.frames, b.stream.frames);
}

}  // namespace
}  // namespace nosense
