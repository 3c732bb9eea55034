#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "error.hpp"

namespace nosense {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kZeroNorm: return "ZeroNorm";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kCrcMismatch: return "CrcMismatch";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kUnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::kMixedDimensions: return "MixedDimensions";
    case ErrorCode::kSchema: return "SchemaError";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kOutOfOrderFrame: return "OutOfOrderFrame";
    case ErrorCode::kEmptyStream: return "EmptyStream";
    case ErrorCode::kMissingRawQuestion: return "MissingRawQuestion";
    case ErrorCode::kEncoderUnavailable: return "EncoderUnavailable";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kZeroGold: return "ZeroGold";
    case ErrorCode::kInvalidRepeat: return "InvalidRepeat";
    case ErrorCode::kMissingMetadata: return "MissingMetadata";
    case ErrorCode::kInfeasibleParams: return "InfeasibleParams";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

namespace {

void normalize_into(std::span<const double> raw, std::vector<double>& out) {
  if (raw.empty()) fail(ErrorCode::kZeroNorm, "cannot normalize an empty vector");
  double max_abs = 0.0;
  for (double v : raw) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFinite, "vector has a non-finite entry");
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0) fail(ErrorCode::kZeroNorm, "vector norm below 1e-12");
  // Pre-scaling by the largest magnitude keeps the sum of squares in range.
  out.assign(raw.begin(), raw.end());
  double sum_sq = 0.0;
  for (double& v : out) {
    v /= max_abs;
    sum_sq += v * v;
  }
  const double scaled_norm = std::sqrt(sum_sq);
  if (scaled_norm * max_abs < 1e-12) fail(ErrorCode::kZeroNorm, "vector norm below 1e-12");
  for (double& v : out) v /= scaled_norm;
}

}  // namespace

Embedding normalize(std::span<const double> raw) {
  std::vector<double> out;
  normalize_into(raw, out);
  return Embedding(std::move(out));
}

Embedding normalize(std::span<const float> raw) {
  std::vector<double> widened(raw.begin(), raw.end());
  return normalize(std::span<const double>(widened));
}

bool operator==(const Embedding& a, const Embedding& b) {
  if (a.values_ == b.values_) return true;
  const auto va = a.values();
  const auto vb = b.values();
  return std::equal(va.begin(), va.end(), vb.begin(), vb.end());
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorCode::kDimensionMismatch,
         "cosine of dimension " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const auto va = a.values();
  const auto vb = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) dot += va[i] * vb[i];
  return std::clamp(dot, -1.0, 1.0);
}

bool FrameStream::has_annotations() const {
  return !frames.empty() &&
         std::all_of(frames.begin(), frames.end(), [](const FrameRecord& f) { return f.annotation.has_value(); });
}

void FrameStream::validate() const {
  const std::size_t d = dim();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.index != static_cast<std::int64_t>(i) + 1) {
      fail(ErrorCode::kOutOfOrderFrame, "frame " + std::to_string(i) + " has index " + std::to_string(f.index));
    }
    if (i > 0 && f.timestamp_s < frames[i - 1].timestamp_s) {
      fail(ErrorCode::kOutOfOrderFrame, "timestamps decrease at index " + std::to_string(f.index));
    }
    if (f.embedding.dim() != d) fail(ErrorCode::kMixedDimensions, "stream mixes embedding dimensions");
  }
}

FrameStream make_stream(std::string video_id, std::vector<Embedding> rows, double fps) {
  FrameStream s;
  s.video_id = std::move(video_id);
  s.fps = fps;
  s.frames.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    FrameRecord f;
    f.index = static_cast<std::int64_t>(i) + 1;
    f.timestamp_s = static_cast<double>(i) / fps;
    f.embedding = std::move(rows[i]);
    s.frames.push_back(std::move(f));
  }
  return s;
}

bool is_permutation_of_four(const Permutation& p) {
  std::array<bool, 4> seen{};
  for (int v : p) {
    if (v < 1 || v > 4 || seen[v - 1]) return false;
    seen[v - 1] = true;
  }
  return true;
}

void RecallQuestion::validate() const {
  for (std::size_t k = 0; k < options.size(); ++k) {
    if (!is_permutation_of_four(options[k])) {
      fail(ErrorCode::kSchema, "options[" + std::to_string(k) + "]: not a permutation of {1,2,3,4}");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (options[j] == options[k]) {
        fail(ErrorCode::kSchema, "options[" + std::to_string(k) + "]: duplicates options[" + std::to_string(j) + "]");
      }
    }
  }
  if (gold_option < 1 || gold_option > 4) {
    fail(ErrorCode::kSchema, "gold_option: must be in 1..4, got " + std::to_string(gold_option));
  }
}

void CountingScene::validate() const {
  std::set<std::string> ids;
  for (const auto& room : rooms) {
    if (room.dwell_frames < 1) fail(ErrorCode::kSchema, "room " + room.room_id + ": dwell_frames must be >= 1");
    for (const auto& obj : room.objects) {
      if (!ids.insert(obj.instance_id).second) {
        fail(ErrorCode::kSchema, "duplicate instance_id " + obj.instance_id);
      }
    }
  }
  if (repeat_factor < 1) fail(ErrorCode::kSchema, "repeat_factor must be >= 1");
}

void EvalReport::add(ReportRow row) { rows_.push_back(std::move(row)); }

std::map<Condition, double> EvalReport::aggregates() const {
  std::map<Condition, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows_) {
    auto& [sum, n] = acc[r.condition];
    sum += r.score;
    ++n;
  }
  std::map<Condition, double> out;
  for (const auto& [cond, sn] : acc) out[cond] = sn.first / static_cast<double>(sn.second);
  return out;
}

void EvalReport::check_consistent() const {
  if (!stored_) return;
  const auto recomputed = aggregates();
  if (recomputed.size() != stored_->size()) fail(ErrorCode::kSchema, "aggregate conditions differ from rows");
  for (const auto& [cond, value] : recomputed) {
    auto it = stored_->find(cond);
    if (it == stored_->end() || std::abs(it->second - value) > 1e-12) {
      fail(ErrorCode::kSchema, "aggregate for split '" + cond.split + "' disagrees with rows");
    }
  }
}

}  // namespace nosense
