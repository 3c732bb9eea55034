#include <nosense/nosense.h>

#include <gtest/gtest.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STREQ(ns_version(), "0.1.0");
  EXPECT_STREQ(ns_status_name(NS_OK), "OK");
  EXPECT_STREQ(ns_status_name(NS_ERR_COUNT_MISMATCH), "CountMismatch");
  EXPECT_STREQ(ns_status_name(NS_ERR_CONFIG), "ConfigError");
}

TEST(CApi, NormalizeAndCosine) {
  double v[2] = {3.0, 4.0};
  ASSERT_EQ(ns_normalize(v, 2, v), NS_OK);
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
  const double zero[2] = {0.0, 0.0};
  double out[2];
  EXPECT_EQ(ns_normalize(zero, 2, out), NS_ERR_ZERO_NORM);
  EXPECT_NE(std::string(ns_last_error()).size(), 0u);
  const double a[2] = {1.0, 0.0};
  const double b[2] = {1.0, 1.0};
  double c = 0.0;
  ASSERT_EQ(ns_cosine(a, b, 2, &c), NS_OK);
  EXPECT_NEAR(c, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(ns_cosine(nullptr, b, 2, &c), NS_ERR_INVALID_ARGUMENT);
}

TEST(CApi, Metrics) {
  const int preds[3] = {1, 2, 3};
  const int golds[3] = {1, 2, 4};
  double acc = 0.0;
  ASSERT_EQ(ns_accuracy(preds, golds, 3, &acc), NS_OK);
  EXPECT_DOUBLE_EQ(acc, 2.0 / 3.0);
  EXPECT_EQ(ns_accuracy(preds, golds, 0, &acc), NS_ERR_EMPTY);
  double m = 0.0;
  ASSERT_EQ(ns_mra(110, 100, &m), NS_OK);
  EXPECT_DOUBLE_EQ(m, 0.8);
  EXPECT_EQ(ns_mra(1, 0, &m), NS_ERR_ZERO_GOLD);
  const std::int64_t p[2] = {10, 20};
  const std::int64_t g[2] = {10, 10};
  ASSERT_EQ(ns_mean_mra(p, g, 2, &m), NS_OK);
  EXPECT_DOUBLE_EQ(m, 0.5);
}

TEST(CApi, TopKBuffer) {
  ns_topk* buf = nullptr;
  ASSERT_EQ(ns_topk_create(4, &buf), NS_OK);
  const double object[2] = {1.0, 0.0};
  const double sims[6] = {0.1, 0.9, 0.3, 0.8, 0.7, 0.95};
  for (int t = 0; t < 6; ++t) {
    const double frame[2] = {sims[t], std::sqrt(1.0 - sims[t] * sims[t])};
    ASSERT_EQ(ns_topk_update(buf, t + 1, frame, object, 2), NS_OK);
  }
  EXPECT_EQ(ns_topk_size(buf), 4u);
  const double late[2] = {1.0, 0.0};
  EXPECT_EQ(ns_topk_update(buf, 3, late, object, 2), NS_ERR_OUT_OF_ORDER_FRAME);
  std::int64_t idx[4];
  double s[4];
  std::size_t count = 0;
  EXPECT_EQ(ns_topk_finalize(buf, idx, s, 2, &count), NS_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(ns_topk_finalize(buf, idx, s, 4, &count), NS_OK);
  ASSERT_EQ(count, 4u);
  EXPECT_EQ(idx[0], 2);
  EXPECT_EQ(idx[1], 4);
  EXPECT_EQ(idx[2], 5);
  EXPECT_EQ(idx[3], 6);
  EXPECT_NEAR(s[3], 0.95, 1e-12);
  ns_topk_destroy(buf);

  ASSERT_EQ(ns_topk_create(4, &buf), NS_OK);
  EXPECT_EQ(ns_topk_finalize(buf, idx, s, 4, &count), NS_ERR_EMPTY_STREAM);
  ns_topk_destroy(buf);
  ns_topk_destroy(nullptr);
}

TEST(CApi, ScoreOptions) {
  const double r[16] = {0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0};  // sigma = (3,1,4,2)
  const int options[16] = {1, 2, 3, 4, 3, 1, 4, 2, 4, 3, 2, 1, 2, 1, 3, 4};
  double scores[4];
  int answer = 0;
  ASSERT_EQ(ns_score_options(r, 4, options, scores, &answer), NS_OK);
  EXPECT_EQ(answer, 2);
  EXPECT_EQ(scores[1], 4.0);
  const int bad[16] = {1, 1, 3, 4, 3, 1, 4, 2, 4, 3, 2, 1, 2, 1, 3, 4};
  EXPECT_EQ(ns_score_options(r, 4, bad, scores, &answer), NS_ERR_SCHEMA);
  EXPECT_EQ(ns_score_options(r, 5, options, scores, &answer), NS_ERR_INVALID_ARGUMENT);
}

TEST(CApi, EmbeddingFiles) {
  const auto path = fs::temp_directory_path() / ("nosense_capi_" + std::to_string(::getpid()) + ".emb");
  const float data[6] = {1, 2, 3, 4, 5, 6};
  ASSERT_EQ(ns_embeddings_write(path.c_str(), data, 3, 2), NS_OK);
  EXPECT_EQ(fs::file_size(path), 17u + 24u + 4u);
  ns_embeddings* e = nullptr;
  ASSERT_EQ(ns_embeddings_read(path.c_str(), &e), NS_OK);
  EXPECT_EQ(ns_embeddings_dim(e), 3u);
  EXPECT_EQ(ns_embeddings_count(e), 2u);
  EXPECT_EQ(ns_embeddings_data(e)[4], 5.0f);
  ns_embeddings_destroy(e);
  fs::resize_file(path, 30);
  EXPECT_EQ(ns_embeddings_read(path.c_str(), &e), NS_ERR_TRUNCATED);
  fs::remove(path);
  EXPECT_EQ(ns_embeddings_read(path.c_str(), &e), NS_ERR_IO);
}

TEST(CApi, ConfigAndRun) {
  const auto dir = fs::temp_directory_path() / ("nosense_capi_run_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  ns_config* cfg = nullptr;
  ASSERT_EQ(ns_config_create(&cfg), NS_OK);
  EXPECT_EQ(ns_config_set(cfg, "k", "x"), NS_ERR_CONFIG);
  EXPECT_EQ(ns_config_set(cfg, "no-such-key", "1"), NS_ERR_CONFIG);
  ASSERT_EQ(ns_config_set(cfg, "out", dir.c_str()), NS_OK);
  ASSERT_EQ(ns_config_set(cfg, "count", "3"), NS_OK);
  ASSERT_EQ(ns_config_set(cfg, "frames", "50"), NS_OK);
  ASSERT_EQ(ns_run(cfg, "gen-vsr"), NS_OK);
  EXPECT_NE(std::string(ns_config_summary(cfg)).find("3 manifests"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "vsr_0002.json"));
  EXPECT_EQ(ns_run(cfg, "bogus"), NS_ERR_CONFIG);
  ns_config_destroy(cfg);

  ASSERT_EQ(ns_config_create(&cfg), NS_OK);
  ASSERT_EQ(ns_config_set(cfg, "input", (dir / "*.json").c_str()), NS_OK);
  ASSERT_EQ(ns_config_set(cfg, "out", (dir / "run").c_str()), NS_OK);
  ASSERT_EQ(ns_run(cfg, "run-vsr"), NS_OK);
  EXPECT_NE(std::string(ns_config_summary(cfg)).find("1.0000"), std::string::npos);
  ns_config_destroy(cfg);
  fs::remove_all(dir);
}

}  // namespace
