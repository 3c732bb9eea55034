#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace nosense {

enum class QueryMode { kEnsemble, kBasicPrompt, kRawQuestion };

const char* to_string(QueryMode mode);
QueryMode parse_query_mode(const std::string& name);  // "ensemble" | "basic" | "raw"

// Prompt templates use "{o}" for the object and "{a}" for an auxiliary.
struct PromptTemplates {
  std::string version = "templates-v1";
  std::vector<std::string> ensemble{
      "a photo of a {o}.",
      "a photo of the {o}.",
      "a photo of the {o} in a room.",
      "a close-up photo of a {o}.",
      "a photo of a small {o}.",
      "a photo of a large {o}.",
      "an indoor photo of a {o}.",
  };
  std::string basic = "a photo of a {o}.";
  std::string joint = "a photo of a {o} near a {a}.";

  void validate() const;
};

std::string expand_template(const std::string& tmpl, const std::string& object, const std::string& auxiliary = {});

// Every string the text tower must embed for a question in a given mode.
std::vector<std::string> required_texts(const RecallQuestion& q, QueryMode mode, const PromptTemplates& templates);

// Text tower stand-in. Real runs use a table exported by the encoder sidecar;
// tests inject vectors directly.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  // Raw (unnormalized) embedding, or nullopt if the text is unknown.
  virtual std::optional<std::vector<double>> encode(const std::string& text) const = 0;
};

class TableTextEncoder final : public TextEncoder {
 public:
  void add(std::string text, std::vector<double> raw) { table_[std::move(text)] = std::move(raw); }
  std::optional<std::vector<double>> encode(const std::string& text) const override;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::vector<double>> table_;
};

struct QueryEmbeddings {
  Embedding object;                  // O
  std::array<Embedding, 4> aux;      // A_1..A_4
  QueryMode mode = QueryMode::kEnsemble;

  friend bool operator==(const QueryEmbeddings&, const QueryEmbeddings&) = default;
};

// ensemble: O = norm(mean_j norm(enc(T_j(o)))); basic: O = norm(enc(T(o)));
// raw: O = norm(enc(raw_question)). A_i = norm(enc(joint(o, a_i))) in all modes.
QueryEmbeddings build_queries(const RecallQuestion& q, QueryMode mode, const PromptTemplates& templates,
                              const TextEncoder& encoder);

struct BufferEntry {
  std::int64_t index = 0;
  double similarity = 0.0;
  Embedding embedding;
};

// Holds the K most object-similar frames seen so far. On a similarity tie at
// the K-th place the earlier frame is kept.
class TopKBuffer {
 public:
  explicit TopKBuffer(std::size_t capacity = 4);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  std::int64_t last_index() const { return last_index_; }
  std::size_t peak_size() const { return peak_size_; }

  // Scores the frame against the object query and keeps it if it ranks in
  // the top K. Throws kOutOfOrderFrame or kDimensionMismatch.
  void update(const FrameRecord& frame, const Embedding& object_vec);

  // Entries sorted by frame index ascending. Throws kEmptyStream if nothing
  // was seen.
  std::vector<BufferEntry> finalize() const;

 private:
  std::size_t capacity_;
  std::vector<BufferEntry> entries_;
  std::int64_t last_index_ = 0;
  std::size_t peak_size_ = 0;
};

// rows[u][i] = <F_{t_u}, A_{i+1}>, rows in frame-time order; 1..4 rows.
struct ScoreMatrix {
  std::vector<std::array<double, 4>> rows;
};

ScoreMatrix build_score_matrix(std::span<const BufferEntry> ordered, const QueryEmbeddings& queries);

struct OptionScores {
  std::array<double, 4> scores{};
  int answer = 1;  // 1-based, lowest index among maxima
};

// score(k) = sum_u r[u][pi_k(u)], over the retained rows only.
OptionScores score_options(const ScoreMatrix& r, const std::array<Permutation, 4>& options);

// Pull-based stream. answer_vsr consumes each frame exactly once.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<FrameRecord> next() = 0;
};

class StreamFrameSource final : public FrameSource {
 public:
  explicit StreamFrameSource(const FrameStream& stream) : stream_(stream) {}
  std::optional<FrameRecord> next() override;

 private:
  const FrameStream& stream_;
  std::size_t pos_ = 0;
};

struct EngineConfig {
  std::size_t top_k = 4;
};

struct VsrDiagnostics {
  std::vector<std::pair<std::int64_t, double>> retained;  // (t_u, s_{t_u})
  OptionScores scores;
  std::uint64_t frames_seen = 0;
  std::size_t peak_buffer = 0;
};

VsrDiagnostics answer_vsr(FrameSource& frames, const RecallQuestion& q, const QueryEmbeddings& queries,
                          const EngineConfig& cfg = {});
VsrDiagnostics answer_vsr(const FrameStream& stream, const RecallQuestion& q, const QueryEmbeddings& queries,
                          const EngineConfig& cfg = {});

}  // namespace nosense
