#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace nosense {

// Thresholds are kept in basis points so the relative-error comparison is
// exact integer arithmetic: |pred - gold| / gold < 1 - t/10000.
struct MraConfig {
  std::vector<int> thresholds_bp{5000, 5500, 6000, 6500, 7000, 7500, 8000, 8500, 9000, 9500};
  bool strict = true;

  static MraConfig from_thresholds(std::span<const double> thresholds, bool strict = true);
  void validate() const;
};

double accuracy(std::span<const int> preds, std::span<const int> golds);

double mra(std::int64_t pred, std::int64_t gold, const MraConfig& cfg = {});

double mean_mra(std::span<const std::pair<std::int64_t, std::int64_t>> pairs, const MraConfig& cfg = {});

// Counts are scored as integers; fractional outputs round half up.
std::int64_t round_half_up(double value);

}  // namespace nosense
