#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nosense {

// Unit-norm dense vector. Values are held in double precision even when the
// on-disk payload is float32. Copies share the same immutable storage.
class Embedding {
 public:
  Embedding() = default;

  std::span<const double> values() const {
    return values_ ? std::span<const double>(*values_) : std::span<const double>();
  }
  std::size_t dim() const { return values_ ? values_->size() : 0; }
  bool empty() const { return dim() == 0; }

  friend bool operator==(const Embedding& a, const Embedding& b);

 private:
  friend Embedding normalize(std::span<const double> raw);
  explicit Embedding(std::vector<double> v)
      : values_(std::make_shared<const std::vector<double>>(std::move(v))) {}

  std::shared_ptr<const std::vector<double>> values_;
};

// v / ||v||_2. Throws kZeroNorm (norm < 1e-12) or kNonFinite.
Embedding normalize(std::span<const double> raw);
Embedding normalize(std::span<const float> raw);

// Inner product of two unit vectors, clamped to [-1, 1] for tiny overshoot.
double cosine(const Embedding& a, const Embedding& b);

struct ObjectInstance {
  std::string instance_id;
  std::string category;

  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

// Per-frame ground truth used only by the counting simulator and oracle.
struct FrameAnnotation {
  std::string room_id;
  std::vector<ObjectInstance> visible;

  friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

struct FrameRecord {
  std::int64_t index = 0;  // 1-based
  double timestamp_s = 0.0;
  Embedding embedding;
  std::optional<FrameAnnotation> annotation;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct FrameStream {
  std::string video_id;
  double fps = 1.0;
  std::vector<FrameRecord> frames;
  // 1-based indices where a concatenated copy begins (repeat seams).
  std::vector<std::int64_t> seams;

  std::size_t size() const { return frames.size(); }
  std::size_t dim() const { return frames.empty() ? 0 : frames.front().embedding.dim(); }
  bool has_annotations() const;

  // Indices 1..N strictly increasing, timestamps non-decreasing, one dimension.
  void validate() const;
};

// Builds a stream from embeddings at the given frame rate, indices 1..N.
FrameStream make_stream(std::string video_id, std::vector<Embedding> rows, double fps = 1.0);

// Values are 1-based auxiliary indices; entry u is the auxiliary seen at the
// u-th needle in time order.
using Permutation = std::array<int, 4>;

bool is_permutation_of_four(const Permutation& p);

struct RecallQuestion {
  std::string question_id;
  std::string object_text;
  std::array<std::string, 4> auxiliaries;
  std::array<Permutation, 4> options{};
  int gold_option = 1;  // 1-based
  std::optional<std::string> raw_question;

  // Options must be distinct permutations and gold_option in 1..4.
  // Throws kSchema.
  void validate() const;
};

struct Room {
  std::string room_id;
  std::int64_t dwell_frames = 1;
  std::vector<ObjectInstance> objects;
};

struct CountingScene {
  std::vector<Room> rooms;
  std::string target_category;
  int repeat_factor = 1;

  // Throws kSchema on duplicate instance ids or non-positive dwell.
  void validate() const;
};

struct Condition {
  std::string split;
  std::string mode;
  int repeat = 1;

  auto operator<=>(const Condition&) const = default;
};

struct ReportRow {
  std::string instance_id;
  Condition condition;
  std::int64_t prediction = 0;
  std::int64_t gold = 0;
  double score = 0.0;  // 1/0 correctness for MCQ, MRA for counting
};

// Per-instance rows plus the per-condition mean of their scores.
class EvalReport {
 public:
  void add(ReportRow row);
  const std::vector<ReportRow>& rows() const { return rows_; }
  std::map<Condition, double> aggregates() const;

  // Fails with kSchema if the stored aggregates disagree with the rows.
  void set_aggregates(std::map<Condition, double> aggregates) { stored_ = std::move(aggregates); }
  void check_consistent() const;

 private:
  std::vector<ReportRow> rows_;
  std::optional<std::map<Condition, double>> stored_;
};

}  // namespace nosense
