#include "metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "error.hpp"

namespace nosense {
namespace {

// Independent oracle: thresholds are (10 + j) / 20 for j = 0..9, so the strict
// test |p - g| / g < 1 - theta becomes 20 |p - g| < (10 - j) g.
double mra_oracle(long long pred, long long gold) {
  int pass = 0;
  for (int j = 0; j < 10; ++j) pass += 20 * std::llabs(pred - gold) < (10 - j) * gold ? 1 : 0;
  return pass / 10.0;
}

TEST(Accuracy, Examples) {
  const std::vector<int> g{1, 2, 3, 4};
  EXPECT_EQ(accuracy(g, g), 1.0);
  const std::vector<int> miss{2, 3, 4, 1};
  EXPECT_EQ(accuracy(miss, g), 0.0);

  std::vector<int> preds(60, 1), golds(60, 1);
  preds[17] = 2;
  EXPECT_DOUBLE_EQ(accuracy(preds, golds), 59.0 / 60.0);
}

TEST(Accuracy, Errors) {
  const std::vector<int> a{1, 2}, b{1};
  EXPECT_THROW(accuracy(a, b), Error);
  try {
    accuracy(std::vector<int>{}, std::vector<int>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmpty);
  }
  try {
    accuracy(a, b);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
}

TEST(Mra, Examples) {
  EXPECT_EQ(mra(100, 100), 1.0);
  EXPECT_EQ(mra(110, 100), 0.8);
  EXPECT_EQ(mra(200, 100), 0.0);
  EXPECT_EQ(mra(0, 7), 0.0);
  EXPECT_EQ(mra(110, 100), mra_oracle(110, 100));
}

TEST(Mra, StrictBoundary) {
  // Relative error exactly 0.05 sits on the 0.95 threshold: fails strictly.
  EXPECT_EQ(mra(105, 100), 0.9);
  MraConfig loose;
  loose.strict = false;
  EXPECT_EQ(mra(105, 100, loose), 1.0);
}

TEST(Mra, ZeroGold) {
  try {
    mra(3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroGold);
  }
}

TEST(MraProperty, MatchesOracleMonotoneScaleInvariantAndDecimal) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5000; ++trial) {
    const long long gold = 1 + static_cast<long long>(rng() % 200);
    const long long pred = static_cast<long long>(rng() % 500);
    const double v = mra(pred, gold);
    ASSERT_EQ(v, mra_oracle(pred, gold)) << pred << " vs " << gold;
    ASSERT_EQ(v, std::round(v * 10.0) / 10.0);
    ASSERT_EQ(v, mra(2 * pred, 2 * gold));
    const long long farther = pred >= gold ? pred + 1 : (pred > 0 ? pred - 1 : pred);
    ASSERT_LE(mra(farther, gold), v);
  }
}

TEST(MeanMra, Examples) {
  const std::vector<std::pair<std::int64_t, std::int64_t>> exact{{3, 3}, {5, 5}};
  EXPECT_EQ(mean_mra(exact), 1.0);
  const std::vector<std::pair<std::int64_t, std::int64_t>> mixed{{110, 100}, {100, 100}};
  EXPECT_EQ(mean_mra(mixed), 0.9);
  const std::vector<std::pair<std::int64_t, std::int64_t>> doubled{{10, 5}, {9, 3}, {40, 20}};
  EXPECT_EQ(mean_mra(doubled), 0.0);
  EXPECT_THROW(mean_mra(std::vector<std::pair<std::int64_t, std::int64_t>>{}), Error);
}

TEST(MraConfig, FromThresholdsAndValidation) {
  const std::vector<double> t{0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  EXPECT_EQ(MraConfig::from_thresholds(t).thresholds_bp, MraConfig{}.thresholds_bp);
  const std::vector<double> bad{0.6, 0.5};
  EXPECT_THROW(MraConfig::from_thresholds(bad), Error);
}

TEST(RoundHalfUp, Examples) {
  EXPECT_EQ(round_half_up(2.5), 3);
  EXPECT_EQ(round_half_up(2.49), 2);
  EXPECT_EQ(round_half_up(0.0), 0);
}

}  // namespace
}  // namespace nosense
