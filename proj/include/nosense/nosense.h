/*
 * nosense: streaming stress tests for long-video spatial benchmarks.
 *
 * C interface to the core library. Every function returns an ns_status;
 * on failure a description is available from ns_last_error() on the same
 * thread until the next failing call. Handles are opaque and owned by the
 * caller, who must release them with the matching *_destroy function.
 *
 * Frame indices are 1-based throughout.
 */
#ifndef NOSENSE_NOSENSE_H_
#define NOSENSE_NOSENSE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NOSENSE_BUILDING_LIBRARY)
#define NS_API __declspec(dllexport)
#else
#define NS_API __declspec(dllimport)
#endif
#else
#define NS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ns_status {
  NS_OK = 0,
  NS_ERR_INVALID_ARGUMENT = 1,
  NS_ERR_ZERO_NORM = 2,
  NS_ERR_NON_FINITE = 3,
  NS_ERR_DIMENSION_MISMATCH = 4,
  NS_ERR_IO = 5,
  NS_ERR_BAD_MAGIC = 6,
  NS_ERR_CRC_MISMATCH = 7,
  NS_ERR_TRUNCATED = 8,
  NS_ERR_UNSUPPORTED_DTYPE = 9,
  NS_ERR_MIXED_DIMENSIONS = 10,
  NS_ERR_SCHEMA = 11,
  NS_ERR_COUNT_MISMATCH = 12,
  NS_ERR_OUT_OF_ORDER_FRAME = 13,
  NS_ERR_EMPTY_STREAM = 14,
  NS_ERR_MISSING_RAW_QUESTION = 15,
  NS_ERR_ENCODER_UNAVAILABLE = 16,
  NS_ERR_LENGTH_MISMATCH = 17,
  NS_ERR_EMPTY = 18,
  NS_ERR_ZERO_GOLD = 19,
  NS_ERR_INVALID_REPEAT = 20,
  NS_ERR_MISSING_METADATA = 21,
  NS_ERR_INFEASIBLE_PARAMS = 22,
  NS_ERR_CONFIG = 23,
  NS_ERR_INTERNAL = 99
} ns_status;

NS_API const char* ns_version(void);
NS_API const char* ns_status_name(ns_status status);
NS_API const char* ns_last_error(void);

/* ---- vectors ---------------------------------------------------------- */

/* out[i] = raw[i] / ||raw||_2. out may alias raw. */
NS_API ns_status ns_normalize(const double* raw, size_t dim, double* out);

/* Cosine similarity; both inputs are normalized first. */
NS_API ns_status ns_cosine(const double* a, const double* b, size_t dim, double* out);

/* ---- metrics ---------------------------------------------------------- */

NS_API ns_status ns_accuracy(const int* preds, const int* golds, size_t n, double* out);

/* Mean relative accuracy over thresholds 0.50, 0.55, ..., 0.95 (strict). */
NS_API ns_status ns_mra(int64_t pred, int64_t gold, double* out);
NS_API ns_status ns_mean_mra(const int64_t* preds, const int64_t* golds, size_t n, double* out);

/* ---- streaming top-k -------------------------------------------------- */

typedef struct ns_topk ns_topk;

NS_API ns_status ns_topk_create(size_t capacity, ns_topk** out);
NS_API void ns_topk_destroy(ns_topk* buffer);

/* Scores one frame against the object query (both normalized internally).
 * Indices must strictly increase across calls. */
NS_API ns_status ns_topk_update(ns_topk* buffer, int64_t index, const double* frame, const double* object,
                                size_t dim);
NS_API size_t ns_topk_size(const ns_topk* buffer);

/* Writes retained frames in ascending index order. *count receives the number
 * written; capacity must be at least ns_topk_size(). */
NS_API ns_status ns_topk_finalize(const ns_topk* buffer, int64_t* indices, double* similarities, size_t capacity,
                                  size_t* count);

/* ---- option scoring --------------------------------------------------- */

/* r is rows x 4 row-major (rows in 1..4, time order); options is 4 x 4
 * row-major, each row a permutation of 1..4. *answer is 1-based. */
NS_API ns_status ns_score_options(const double* r, size_t rows, const int* options, double* scores, int* answer);

/* ---- EMB1 embedding files --------------------------------------------- */

typedef struct ns_embeddings ns_embeddings;

NS_API ns_status ns_embeddings_write(const char* path, const float* data, uint32_t dim, uint64_t count);
NS_API ns_status ns_embeddings_read(const char* path, ns_embeddings** out);
NS_API uint32_t ns_embeddings_dim(const ns_embeddings* e);
NS_API uint64_t ns_embeddings_count(const ns_embeddings* e);
NS_API const float* ns_embeddings_data(const ns_embeddings* e);
NS_API void ns_embeddings_destroy(ns_embeddings* e);

/* ---- batch commands --------------------------------------------------- */

typedef struct ns_config ns_config;

NS_API ns_status ns_config_create(ns_config** out);
NS_API void ns_config_destroy(ns_config* cfg);

/* Keys use the CLI option spelling without dashes ("mode", "k", "out", ...).
 * "input" appends; every other key overwrites. */
NS_API ns_status ns_config_set(ns_config* cfg, const char* key, const char* value);

/* subcommand: "run-vsr", "run-vsc-repeat", "gen-vsr", "gen-vsc", "report". */
NS_API ns_status ns_run(ns_config* cfg, const char* subcommand);

/* One-line summary of the last successful ns_run on this handle. */
NS_API const char* ns_config_summary(const ns_config* cfg);

#ifdef __cplusplus
}
#endif

#endif /* NOSENSE_NOSENSE_H_ */
