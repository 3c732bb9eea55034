#include "nosense/nosense.h"

#include <exception>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "../core/commands.hpp"
#include "../core/embedding_io.hpp"
#include "../core/engine.hpp"
#include "../core/error.hpp"
#include "../core/metrics.hpp"

struct ns_topk {
  nosense::TopKBuffer buffer;
};

struct ns_embeddings {
  nosense::RawMatrix matrix;
};

struct ns_config {
  nosense::RunConfig config;
  std::string summary;
};

namespace {

thread_local std::string g_last_error;

ns_status to_status(nosense::ErrorCode code) {
  using nosense::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return NS_ERR_INVALID_ARGUMENT;
    case ErrorCode::kZeroNorm: return NS_ERR_ZERO_NORM;
    case ErrorCode::kNonFinite: return NS_ERR_NON_FINITE;
    case ErrorCode::kDimensionMismatch: return NS_ERR_DIMENSION_MISMATCH;
    case ErrorCode::kIo: return NS_ERR_IO;
    case ErrorCode::kBadMagic: return NS_ERR_BAD_MAGIC;
    case ErrorCode::kCrcMismatch: return NS_ERR_CRC_MISMATCH;
    case ErrorCode::kTruncated: return NS_ERR_TRUNCATED;
    case ErrorCode::kUnsupportedDtype: return NS_ERR_UNSUPPORTED_DTYPE;
    case ErrorCode::kMixedDimensions: return NS_ERR_MIXED_DIMENSIONS;
    case ErrorCode::kSchema: return NS_ERR_SCHEMA;
    case ErrorCode::kCountMismatch: return NS_ERR_COUNT_MISMATCH;
    case ErrorCode::kOutOfOrderFrame: return NS_ERR_OUT_OF_ORDER_FRAME;
    case ErrorCode::kEmptyStream: return NS_ERR_EMPTY_STREAM;
    case ErrorCode::kMissingRawQuestion: return NS_ERR_MISSING_RAW_QUESTION;
    case ErrorCode::kEncoderUnavailable: return NS_ERR_ENCODER_UNAVAILABLE;
    case ErrorCode::kLengthMismatch: return NS_ERR_LENGTH_MISMATCH;
    case ErrorCode::kEmpty: return NS_ERR_EMPTY;
    case ErrorCode::kZeroGold: return NS_ERR_ZERO_GOLD;
    case ErrorCode::kInvalidRepeat: return NS_ERR_INVALID_REPEAT;
    case ErrorCode::kMissingMetadata: return NS_ERR_MISSING_METADATA;
    case ErrorCode::kInfeasibleParams: return NS_ERR_INFEASIBLE_PARAMS;
    case ErrorCode::kConfig: return NS_ERR_CONFIG;
  }
  return NS_ERR_INTERNAL;
}

template <typename F>
ns_status guarded(F&& body) {
  try {
    std::forward<F>(body)();
    return NS_OK;
  } catch (const nosense::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return NS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NS_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) nosense::fail(nosense::ErrorCode::kInvalidArgument, what);
}

}  // namespace

extern "C" {

const char* ns_version(void) { return "0.1.0"; }

const char* ns_status_name(ns_status status) {
  switch (status) {
    case NS_OK: return "OK";
    case NS_ERR_INTERNAL: return "Internal";
    default: break;
  }
  for (int c = 0; c <= static_cast<int>(nosense::ErrorCode::kConfig); ++c) {
    const auto code = static_cast<nosense::ErrorCode>(c);
    if (to_status(code) == status) return nosense::to_string(code);
  }
  return "Unknown";
}

const char* ns_last_error(void) { return g_last_error.c_str(); }

ns_status ns_normalize(const double* raw, size_t dim, double* out) {
  return guarded([&] {
    require(raw && out, "null pointer");
    const auto e = nosense::normalize(std::span<const double>(raw, dim));
    const auto v = e.values();
    std::copy(v.begin(), v.end(), out);
  });
}

ns_status ns_cosine(const double* a, const double* b, size_t dim, double* out) {
  return guarded([&] {
    require(a && b && out, "null pointer");
    *out = nosense::cosine(nosense::normalize(std::span<const double>(a, dim)),
                           nosense::normalize(std::span<const double>(b, dim)));
  });
}

ns_status ns_accuracy(const int* preds, const int* golds, size_t n, double* out) {
  return guarded([&] {
    require(out && (n == 0 || (preds && golds)), "null pointer");
    *out = nosense::accuracy(std::span<const int>(preds, n), std::span<const int>(golds, n));
  });
}

ns_status ns_mra(int64_t pred, int64_t gold, double* out) {
  return guarded([&] {
    require(out, "null pointer");
    *out = nosense::mra(pred, gold);
  });
}

ns_status ns_mean_mra(const int64_t* preds, const int64_t* golds, size_t n, double* out) {
  return guarded([&] {
    require(out && (n == 0 || (preds && golds)), "null pointer");
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
    for (size_t i = 0; i < n; ++i) pairs.emplace_back(preds[i], golds[i]);
    *out = nosense::mean_mra(pairs);
  });
}

ns_status ns_topk_create(size_t capacity, ns_topk** out) {
  return guarded([&] {
    require(out, "null pointer");
    *out = new ns_topk{nosense::TopKBuffer(capacity)};
  });
}

void ns_topk_destroy(ns_topk* buffer) { delete buffer; }

ns_status ns_topk_update(ns_topk* buffer, int64_t index, const double* frame, const double* object, size_t dim) {
  return guarded([&] {
    require(buffer && frame && object, "null pointer");
    nosense::FrameRecord f;
    f.index = index;
    f.timestamp_s = static_cast<double>(index - 1);
    f.embedding = nosense::normalize(std::span<const double>(frame, dim));
    buffer->buffer.update(f, nosense::normalize(std::span<const double>(object, dim)));
  });
}

size_t ns_topk_size(const ns_topk* buffer) { return buffer ? buffer->buffer.size() : 0; }

ns_status ns_topk_finalize(const ns_topk* buffer, int64_t* indices, double* similarities, size_t capacity,
                           size_t* count) {
  return guarded([&] {
    require(buffer && count, "null pointer");
    const auto entries = buffer->buffer.finalize();
    require(capacity >= entries.size(), "output capacity smaller than the buffer");
    for (size_t i = 0; i < entries.size(); ++i) {
      if (indices) indices[i] = entries[i].index;
      if (similarities) similarities[i] = entries[i].similarity;
    }
    *count = entries.size();
  });
}

ns_status ns_score_options(const double* r, size_t rows, const int* options, double* scores, int* answer) {
  return guarded([&] {
    require(options && scores && answer && (rows == 0 || r), "null pointer");
    require(rows <= 4, "at most 4 rows");
    nosense::ScoreMatrix m;
    for (size_t u = 0; u < rows; ++u) m.rows.push_back({r[4 * u], r[4 * u + 1], r[4 * u + 2], r[4 * u + 3]});
    std::array<nosense::Permutation, 4> opts{};
    for (size_t k = 0; k < 4; ++k) {
      for (size_t u = 0; u < 4; ++u) opts[k][u] = options[4 * k + u];
    }
    const auto result = nosense::score_options(m, opts);
    std::copy(result.scores.begin(), result.scores.end(), scores);
    *answer = result.answer;
  });
}

ns_status ns_embeddings_write(const char* path, const float* data, uint32_t dim, uint64_t count) {
  return guarded([&] {
    require(path && (count == 0 || data), "null pointer");
    nosense::RawMatrix m;
    m.dim = dim;
    m.data.assign(data, data + static_cast<size_t>(dim) * count);
    nosense::write_embeddings(path, m);
  });
}

ns_status ns_embeddings_read(const char* path, ns_embeddings** out) {
  return guarded([&] {
    require(path && out, "null pointer");
    *out = new ns_embeddings{nosense::read_embeddings(path)};
  });
}

uint32_t ns_embeddings_dim(const ns_embeddings* e) { return e ? e->matrix.dim : 0; }
uint64_t ns_embeddings_count(const ns_embeddings* e) { return e ? e->matrix.count() : 0; }
const float* ns_embeddings_data(const ns_embeddings* e) { return e ? e->matrix.data.data() : nullptr; }
void ns_embeddings_destroy(ns_embeddings* e) { delete e; }

ns_status ns_config_create(ns_config** out) {
  return guarded([&] {
    require(out, "null pointer");
    *out = new ns_config{};
  });
}

void ns_config_destroy(ns_config* cfg) { delete cfg; }

ns_status ns_config_set(ns_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null pointer");
    cfg->config.set(key, value);
  });
}

ns_status ns_run(ns_config* cfg, const char* subcommand) {
  return guarded([&] {
    require(cfg && subcommand, "null pointer");
    const std::string cmd(subcommand);
    cfg->summary.clear();
    if (cmd == "run-vsr") {
      cfg->summary = nosense::cmd_run_vsr(cfg->config);
    } else if (cmd == "run-vsc-repeat") {
      cfg->summary = nosense::cmd_run_vsc_repeat(cfg->config);
    } else if (cmd == "gen-vsr") {
      cfg->summary = nosense::cmd_gen_vsr(cfg->config);
    } else if (cmd == "gen-vsc") {
      cfg->summary = nosense::cmd_gen_vsc(cfg->config);
    } else if (cmd == "report") {
      cfg->summary = nosense::cmd_report(cfg->config);
    } else {
      nosense::fail(nosense::ErrorCode::kConfig, "unknown subcommand '" + cmd + "'");
    }
  });
}

const char* ns_config_summary(const ns_config* cfg) { return cfg ? cfg->summary.c_str() : ""; }

}  // extern "C"
