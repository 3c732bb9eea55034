#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace nosense {

// Surprise proxy: 1 - cos(F_t, F_{t-1}); surprise(1) = 0.
//
// Fixed rule: boundary at t iff surprise(t) > tau.
// Adaptive rule: boundary at t iff surprise(t) > max(floor, mean + c * std),
// where mean/std (population) cover the last `window` surprise values of the
// current segment, not counting the frame that opened it. The window restarts
// at every boundary so one spike cannot mask the next room change.
//
// Noise model: frames drawn as norm(room_center + sigma * g / sqrt(d)) with
// g ~ N(0, I_d) and orthogonal room centers. For sigma <= 0.3 the defaults
// fire exactly at room changes (in-room surprise stays near
// sigma^2 / (1 + sigma^2), well under the floor).
struct SurpriseConfig {
  enum class Rule { kFixed, kAdaptive };
  Rule rule = Rule::kAdaptive;
  double tau = 0.5;
  double c = 3.0;
  std::size_t window = 30;
  double floor = 0.3;

  void validate() const;
};

struct SurpriseResult {
  std::vector<double> surprise;          // one per frame
  std::vector<std::int64_t> boundaries;  // 1-based indices that open a segment
};

SurpriseResult surprise_signal(const FrameStream& stream, const SurpriseConfig& cfg = {});

// Room changes from annotations plus recorded repeat seams.
std::vector<std::int64_t> ideal_boundaries(const FrameStream& stream);

struct SegmentTrace {
  std::size_t segment_index = 0;
  std::int64_t start_t = 0;
  std::int64_t end_t = 0;
  std::int64_t count = 0;
};

struct SegmentCountResult {
  std::int64_t prediction = 0;
  std::vector<SegmentTrace> segments;
};

// Per segment: distinct target-category instances seen inside it. The
// prediction is the plain sum over segments, with no deduplication across
// segments. Throws kMissingMetadata if any frame lacks annotations.
SegmentCountResult segment_count(const FrameStream& stream, const std::string& target_category,
                                 std::span<const std::int64_t> boundaries);
SegmentCountResult segment_count(const FrameStream& stream, const std::string& target_category,
                                 const SurpriseConfig& cfg);

std::int64_t unique_count_oracle(const CountingScene& scene);
// Identity-based count over annotated frames; kMissingMetadata without them.
std::int64_t unique_count_oracle(const FrameStream& stream, const std::string& target_category);

}  // namespace nosense
