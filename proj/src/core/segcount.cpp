#include "segcount.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "error.hpp"

namespace nosense {

void SurpriseConfig::validate() const {
  if (rule == Rule::kFixed && !(tau > 0.0 && tau <= 2.0)) fail(ErrorCode::kConfig, "fixed threshold must be in (0,2]");
  if (rule == Rule::kAdaptive) {
    if (window < 2) fail(ErrorCode::kConfig, "adaptive window must be >= 2");
    if (!(c >= 0.0)) fail(ErrorCode::kConfig, "adaptive multiplier must be >= 0");
    if (!(floor >= 0.0 && floor <= 2.0)) fail(ErrorCode::kConfig, "adaptive floor must be in [0,2]");
  }
}

SurpriseResult surprise_signal(const FrameStream& stream, const SurpriseConfig& cfg) {
  cfg.validate();
  if (stream.frames.empty()) fail(ErrorCode::kEmptyStream, "surprise of an empty stream");
  SurpriseResult out;
  out.surprise.assign(stream.size(), 0.0);
  std::deque<double> window;
  for (std::size_t i = 1; i < stream.size(); ++i) {
    const double s = 1.0 - cosine(stream.frames[i].embedding, stream.frames[i - 1].embedding);
    out.surprise[i] = s;
    bool fire = false;
    if (cfg.rule == SurpriseConfig::Rule::kFixed) {
      fire = s > cfg.tau;
    } else {
      double mean = 0.0;
      double var = 0.0;
      if (!window.empty()) {
        for (double w : window) mean += w;
        mean /= static_cast<double>(window.size());
        for (double w : window) var += (w - mean) * (w - mean);
        var /= static_cast<double>(window.size());
      }
      fire = s > std::max(cfg.floor, mean + cfg.c * std::sqrt(var));
    }
    if (fire) {
      out.boundaries.push_back(stream.frames[i].index);
      window.clear();
    } else if (cfg.rule == SurpriseConfig::Rule::kAdaptive) {
      window.push_back(s);
      if (window.size() > cfg.window) window.pop_front();
    }
  }
  return out;
}

std::vector<std::int64_t> ideal_boundaries(const FrameStream& stream) {
  if (!stream.has_annotations()) fail(ErrorCode::kMissingMetadata, "ideal boundaries need room annotations");
  std::set<std::int64_t> out(stream.seams.begin(), stream.seams.end());
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream.frames[i].annotation->room_id != stream.frames[i - 1].annotation->room_id) {
      out.insert(stream.frames[i].index);
    }
  }
  out.erase(1);
  return {out.begin(), out.end()};
}

SegmentCountResult segment_count(const FrameStream& stream, const std::string& target_category,
                                 std::span<const std::int64_t> boundaries) {
  if (stream.frames.empty()) fail(ErrorCode::kEmptyStream, "segment count of an empty stream");
  if (!stream.has_annotations()) fail(ErrorCode::kMissingMetadata, "frames lack visible-object annotations");
  const std::set<std::int64_t> opens(boundaries.begin(), boundaries.end());

  SegmentCountResult out;
  std::set<std::string> event_buffer;
  auto close_segment = [&](std::int64_t start, std::int64_t end) {
    SegmentTrace seg{out.segments.size(), start, end, static_cast<std::int64_t>(event_buffer.size())};
    out.prediction += seg.count;
    out.segments.push_back(seg);
    event_buffer.clear();
  };

  std::int64_t start = stream.frames.front().index;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& f = stream.frames[i];
    if (i > 0 && opens.contains(f.index)) {
      close_segment(start, stream.frames[i - 1].index);
      start = f.index;
    }
    for (const auto& obj : f.annotation->visible) {
      if (obj.category == target_category) event_buffer.insert(obj.instance_id);
    }
  }
  close_segment(start, stream.frames.back().index);
  return out;
}

SegmentCountResult segment_count(const FrameStream& stream, const std::string& target_category,
                                 const SurpriseConfig& cfg) {
  const auto sig = surprise_signal(stream, cfg);
  return segment_count(stream, target_category, sig.boundaries);
}

std::int64_t unique_count_oracle(const CountingScene& scene) {
  std::set<std::string> ids;
  for (const auto& room : scene.rooms) {
    for (const auto& obj : room.objects) {
      if (obj.category == scene.target_category) ids.insert(obj.instance_id);
    }
  }
  return static_cast<std::int64_t>(ids.size());
}

std::int64_t unique_count_oracle(const FrameStream& stream, const std::string& target_category) {
  if (!stream.frames.empty() && !stream.has_annotations()) {
    fail(ErrorCode::kMissingMetadata, "frames lack visible-object annotations");
  }
  std::set<std::string> ids;
  for (const auto& f : stream.frames) {
    for (const auto& obj : f.annotation->visible) {
      if (obj.category == target_category) ids.insert(obj.instance_id);
    }
  }
  return static_cast<std::int64_t>(ids.size());
}

}  // namespace nosense
