#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace nosense {

struct RepeatSpec {
  int k = 1;
  bool boundary_marker = true;  // record where each copy starts
};

// Seamless self-concatenation: output frame j*N + t carries frame t's
// embedding and annotation, indices are renumbered 1..kN and timestamps
// continue at the stream's frame rate. k == 1 returns the input unchanged.
FrameStream repeat_stream(const FrameStream& stream, const RepeatSpec& spec);
inline FrameStream repeat_stream(const FrameStream& stream, int k) { return repeat_stream(stream, RepeatSpec{k, true}); }

CountingScene repeat_scene(const CountingScene& scene, int k);

struct CountingInstance {
  std::string instance_id;
  FrameStream stream;
  std::string target_category;
  std::int64_t gold = 0;
  std::optional<CountingScene> scene;
};

// Models are black boxes from an instance to a predicted count.
using CountingModel = std::function<std::int64_t(const CountingInstance&)>;

struct InvarianceCase {
  std::string name;
  std::function<CountingInstance(const CountingInstance&)> transform;
  std::function<std::int64_t(std::int64_t)> gold_map;
  std::function<bool(std::int64_t before, std::int64_t after)> predicate;
};

InvarianceCase identity_case();
// gold unchanged, predicate "prediction unchanged".
InvarianceCase vsc_repeat_case(int k);

struct InvarianceRow {
  std::string instance_id;
  std::int64_t pred_before = 0;
  std::int64_t pred_after = 0;
  std::int64_t gold_before = 0;
  std::int64_t gold_after = 0;
  bool holds = false;
  double mra_before = 0.0;
  double mra_after = 0.0;
  std::string error;  // non-empty when the model or a self-check failed
};

struct InvarianceReport {
  std::string case_name;
  std::vector<InvarianceRow> rows;
  double violation_rate = 0.0;    // over rows without errors
  double mean_mra_before = 0.0;
  double mean_mra_after = 0.0;
  std::size_t errors = 0;
};

// Errors from the model or the gold self-check are recorded on the row and
// the sweep continues.
InvarianceReport run_invariance(const InvarianceCase& c, const CountingModel& model,
                                std::span<const CountingInstance> instances);

}  // namespace nosense
