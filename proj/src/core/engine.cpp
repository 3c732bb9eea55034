#include "engine.hpp"

#include <algorithm>

#include "error.hpp"

namespace nosense {

const char* to_string(QueryMode mode) {
  switch (mode) {
    case QueryMode::kEnsemble: return "ensemble";
    case QueryMode::kBasicPrompt: return "basic";
    case QueryMode::kRawQuestion: return "raw";
  }
  return "unknown";
}

QueryMode parse_query_mode(const std::string& name) {
  if (name == "ensemble") return QueryMode::kEnsemble;
  if (name == "basic") return QueryMode::kBasicPrompt;
  if (name == "raw") return QueryMode::kRawQuestion;
  fail(ErrorCode::kConfig, "unknown mode '" + name + "' (expected ensemble|basic|raw)");
}

void PromptTemplates::validate() const {
  if (ensemble.empty()) fail(ErrorCode::kConfig, "prompt ensemble is empty");
  if (basic.empty() || joint.empty()) fail(ErrorCode::kConfig, "basic and joint templates must be non-empty");
}

std::string expand_template(const std::string& tmpl, const std::string& object, const std::string& auxiliary) {
  std::string out;
  out.reserve(tmpl.size() + object.size() + auxiliary.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl.compare(i, 3, "{o}") == 0) {
      out += object;
      i += 2;
    } else if (tmpl.compare(i, 3, "{a}") == 0) {
      out += auxiliary;
      i += 2;
    } else {
      out += tmpl[i];
    }
  }
  return out;
}

std::vector<std::string> required_texts(const RecallQuestion& q, QueryMode mode, const PromptTemplates& templates) {
  std::vector<std::string> out;
  switch (mode) {
    case QueryMode::kEnsemble:
      for (const auto& t : templates.ensemble) out.push_back(expand_template(t, q.object_text));
      break;
    case QueryMode::kBasicPrompt:
      out.push_back(expand_template(templates.basic, q.object_text));
      break;
    case QueryMode::kRawQuestion:
      if (q.raw_question) out.push_back(*q.raw_question);
      break;
  }
  for (const auto& a : q.auxiliaries) out.push_back(expand_template(templates.joint, q.object_text, a));
  return out;
}

std::optional<std::vector<double>> TableTextEncoder::encode(const std::string& text) const {
  auto it = table_.find(text);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

namespace {

Embedding encode_normalized(const TextEncoder& encoder, const std::string& text) {
  auto raw = encoder.encode(text);
  if (!raw) fail(ErrorCode::kEncoderUnavailable, "no text embedding for \"" + text + "\"");
  return normalize(*raw);
}

}  // namespace

QueryEmbeddings build_queries(const RecallQuestion& q, QueryMode mode, const PromptTemplates& templates,
                              const TextEncoder& encoder) {
  QueryEmbeddings out;
  out.mode = mode;
  switch (mode) {
    case QueryMode::kEnsemble: {
      templates.validate();
      std::vector<double> sum;
      for (const auto& t : templates.ensemble) {
        const auto e = encode_normalized(encoder, expand_template(t, q.object_text));
        if (sum.empty()) sum.assign(e.dim(), 0.0);
        if (e.dim() != sum.size()) fail(ErrorCode::kDimensionMismatch, "ensemble prompts differ in dimension");
        const auto v = e.values();
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
      }
      for (double& x : sum) x /= static_cast<double>(templates.ensemble.size());
      out.object = normalize(sum);
      break;
    }
    case QueryMode::kBasicPrompt:
      out.object = encode_normalized(encoder, expand_template(templates.basic, q.object_text));
      break;
    case QueryMode::kRawQuestion:
      if (!q.raw_question) fail(ErrorCode::kMissingRawQuestion, "question " + q.question_id + " has no raw text");
      out.object = encode_normalized(encoder, *q.raw_question);
      break;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    out.aux[i] = encode_normalized(encoder, expand_template(templates.joint, q.object_text, q.auxiliaries[i]));
    if (out.aux[i].dim() != out.object.dim()) fail(ErrorCode::kDimensionMismatch, "auxiliary and object dims differ");
  }
  return out;
}

TopKBuffer::TopKBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) fail(ErrorCode::kConfig, "top-k capacity must be >= 1");
  entries_.reserve(capacity);
}

void TopKBuffer::update(const FrameRecord& frame, const Embedding& object_vec) {
  if (frame.index <= last_index_) {
    fail(ErrorCode::kOutOfOrderFrame,
         "frame " + std::to_string(frame.index) + " after frame " + std::to_string(last_index_));
  }
  const double s = cosine(frame.embedding, object_vec);
  last_index_ = frame.index;

  if (entries_.size() < capacity_) {
    entries_.push_back({frame.index, s, frame.embedding});
  } else {
    // The weakest entry has the lowest similarity; among equals, the latest
    // index. A newcomer always has the latest index, so it must beat strictly.
    auto weakest = std::min_element(entries_.begin(), entries_.end(), [](const BufferEntry& a, const BufferEntry& b) {
      return a.similarity < b.similarity || (a.similarity == b.similarity && a.index > b.index);
    });
    if (s > weakest->similarity) *weakest = {frame.index, s, frame.embedding};
  }
  peak_size_ = std::max(peak_size_, entries_.size());
}

std::vector<BufferEntry> TopKBuffer::finalize() const {
  if (entries_.empty()) fail(ErrorCode::kEmptyStream, "no frames were streamed");
  auto out = entries_;
  std::sort(out.begin(), out.end(), [](const BufferEntry& a, const BufferEntry& b) { return a.index < b.index; });
  return out;
}

ScoreMatrix build_score_matrix(std::span<const BufferEntry> ordered, const QueryEmbeddings& queries) {
  if (ordered.size() > 4) fail(ErrorCode::kConfig, "option scoring takes at most 4 retained frames");
  ScoreMatrix r;
  for (const auto& e : ordered) {
    std::array<double, 4> row{};
    for (std::size_t i = 0; i < 4; ++i) row[i] = cosine(e.embedding, queries.aux[i]);
    r.rows.push_back(row);
  }
  return r;
}

OptionScores score_options(const ScoreMatrix& r, const std::array<Permutation, 4>& options) {
  if (r.rows.size() > 4) fail(ErrorCode::kInvalidArgument, "score matrix has more than 4 rows");
  OptionScores out;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!is_permutation_of_four(options[k])) fail(ErrorCode::kSchema, "option is not a permutation");
    double score = 0.0;
    for (std::size_t u = 0; u < r.rows.size(); ++u) score += r.rows[u][options[k][u] - 1];
    out.scores[k] = score;
  }
  for (int k = 1; k < 4; ++k) {
    if (out.scores[k] > out.scores[out.answer - 1]) out.answer = k + 1;
  }
  return out;
}

std::optional<FrameRecord> StreamFrameSource::next() {
  if (pos_ >= stream_.frames.size()) return std::nullopt;
  return stream_.frames[pos_++];
}

VsrDiagnostics answer_vsr(FrameSource& frames, const RecallQuestion& q, const QueryEmbeddings& queries,
                          const EngineConfig& cfg) {
  if (cfg.top_k < 1 || cfg.top_k > 4) fail(ErrorCode::kConfig, "answer_vsr needs 1 <= K <= 4");
  TopKBuffer buffer(cfg.top_k);
  VsrDiagnostics diag;
  while (auto frame = frames.next()) {
    if (frame->embedding.dim() != queries.object.dim()) {
      fail(ErrorCode::kDimensionMismatch, "frame dim " + std::to_string(frame->embedding.dim()) +
                                              " vs query dim " + std::to_string(queries.object.dim()));
    }
    buffer.update(*frame, queries.object);
    ++diag.frames_seen;
  }
  const auto ordered = buffer.finalize();
  for (const auto& e : ordered) diag.retained.emplace_back(e.index, e.similarity);
  diag.scores = score_options(build_score_matrix(ordered, queries), q.options);
  diag.peak_buffer = buffer.peak_size();
  return diag;
}

VsrDiagnostics answer_vsr(const FrameStream& stream, const RecallQuestion& q, const QueryEmbeddings& queries,
                          const EngineConfig& cfg) {
  StreamFrameSource source(stream);
  return answer_vsr(source, q, queries, cfg);
}

}  // namespace nosense
