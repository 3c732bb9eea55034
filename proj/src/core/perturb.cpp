#include "perturb.hpp"

#include <algorithm>
#include <exception>

#include "error.hpp"
#include "metrics.hpp"
#include "segcount.hpp"

namespace nosense {

FrameStream repeat_stream(const FrameStream& stream, const RepeatSpec& spec) {
  if (spec.k < 1) fail(ErrorCode::kInvalidRepeat, "repeat factor must be >= 1, got " + std::to_string(spec.k));
  if (stream.frames.empty()) fail(ErrorCode::kEmptyStream, "cannot repeat an empty stream");
  if (spec.k == 1) return stream;

  const auto n = static_cast<std::int64_t>(stream.size());
  FrameStream out;
  out.video_id = stream.video_id;
  out.fps = stream.fps;
  out.frames.reserve(stream.size() * static_cast<std::size_t>(spec.k));
  for (int j = 0; j < spec.k; ++j) {
    const std::int64_t offset = j * n;
    if (spec.boundary_marker) {
      if (j > 0) out.seams.push_back(offset + 1);
      for (auto s : stream.seams) out.seams.push_back(offset + s);
    }
    for (const auto& f : stream.frames) {
      FrameRecord g = f;
      g.index = offset + f.index;
      g.timestamp_s = static_cast<double>(g.index - 1) / stream.fps;
      out.frames.push_back(std::move(g));
    }
  }
  std::sort(out.seams.begin(), out.seams.end());
  return out;
}

CountingScene repeat_scene(const CountingScene& scene, int k) {
  if (k < 1) fail(ErrorCode::kInvalidRepeat, "repeat factor must be >= 1");
  CountingScene out = scene;
  out.repeat_factor = scene.repeat_factor * k;
  return out;
}

InvarianceCase identity_case() {
  return {"identity", [](const CountingInstance& x) { return x; }, [](std::int64_t g) { return g; },
          [](std::int64_t a, std::int64_t b) { return a == b; }};
}

InvarianceCase vsc_repeat_case(int k) {
  if (k < 1) fail(ErrorCode::kInvalidRepeat, "repeat factor must be >= 1");
  return {"vsc-repeat-k" + std::to_string(k),
          [k](const CountingInstance& x) {
            CountingInstance y = x;
            y.stream = repeat_stream(x.stream, k);
            if (x.scene) y.scene = repeat_scene(*x.scene, k);
            return y;
          },
          [](std::int64_t g) { return g; }, [](std::int64_t a, std::int64_t b) { return a == b; }};
}

namespace {

// Ground truth recomputed from identity metadata, when any is available.
std::optional<std::int64_t> recompute_gold(const CountingInstance& x) {
  if (x.stream.has_annotations()) return unique_count_oracle(x.stream, x.target_category);
  if (x.scene) return unique_count_oracle(*x.scene);
  return std::nullopt;
}

}  // namespace

InvarianceReport run_invariance(const InvarianceCase& c, const CountingModel& model,
                                std::span<const CountingInstance> instances) {
  InvarianceReport report;
  report.case_name = c.name;
  std::size_t ok = 0;
  std::size_t violations = 0;
  for (const auto& before : instances) {
    InvarianceRow row;
    row.instance_id = before.instance_id;
    row.gold_before = before.gold;
    try {
      CountingInstance after = c.transform(before);
      after.gold = c.gold_map(before.gold);
      row.gold_after = after.gold;
      if (auto g = recompute_gold(after); g && *g != after.gold) {
        fail(ErrorCode::kSchema, "gold self-check failed: mapped " + std::to_string(after.gold) + ", recomputed " +
                                     std::to_string(*g));
      }
      row.pred_before = model(before);
      row.pred_after = model(after);
      row.holds = c.predicate(row.pred_before, row.pred_after);
      row.mra_before = mra(row.pred_before, row.gold_before);
      row.mra_after = mra(row.pred_after, row.gold_after);
      ++ok;
      if (!row.holds) ++violations;
      report.mean_mra_before += row.mra_before;
      report.mean_mra_after += row.mra_after;
    } catch (const std::exception& e) {
      row.error = e.what();
      ++report.errors;
    }
    report.rows.push_back(std::move(row));
  }
  if (ok > 0) {
    report.violation_rate = static_cast<double>(violations) / static_cast<double>(ok);
    report.mean_mra_before /= static_cast<double>(ok);
    report.mean_mra_after /= static_cast<double>(ok);
  }
  return report;
}

}  // namespace nosense
