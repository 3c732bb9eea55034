#include "metrics.hpp"

#include <cmath>
#include <string>

#include "error.hpp"

namespace nosense {

MraConfig MraConfig::from_thresholds(std::span<const double> thresholds, bool strict) {
  MraConfig cfg;
  cfg.strict = strict;
  cfg.thresholds_bp.clear();
  for (double t : thresholds) cfg.thresholds_bp.push_back(static_cast<int>(std::lround(t * 10000.0)));
  cfg.validate();
  return cfg;
}

void MraConfig::validate() const {
  if (thresholds_bp.empty()) fail(ErrorCode::kConfig, "MRA needs at least one threshold");
  for (std::size_t i = 0; i < thresholds_bp.size(); ++i) {
    if (thresholds_bp[i] <= 0 || thresholds_bp[i] >= 10000) fail(ErrorCode::kConfig, "MRA threshold outside (0,1)");
    if (i > 0 && thresholds_bp[i] <= thresholds_bp[i - 1]) {
      fail(ErrorCode::kConfig, "MRA thresholds must be strictly increasing");
    }
  }
}

double accuracy(std::span<const int> preds, std::span<const int> golds) {
  if (preds.size() != golds.size()) {
    fail(ErrorCode::kLengthMismatch, std::to_string(preds.size()) + " predictions vs " +
                                         std::to_string(golds.size()) + " golds");
  }
  if (preds.empty()) fail(ErrorCode::kEmpty, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == golds[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double mra(std::int64_t pred, std::int64_t gold, const MraConfig& cfg) {
  if (gold < 1) fail(ErrorCode::kZeroGold, "MRA requires gold >= 1");
  if (pred < 0) fail(ErrorCode::kInvalidArgument, "MRA requires pred >= 0");
  // Exact in 128-bit: 10000*|pred-gold| vs (10000-t)*gold.
  const __int128 err = static_cast<__int128>(pred > gold ? pred - gold : gold - pred) * 10000;
  int passed = 0;
  for (int t : cfg.thresholds_bp) {
    const __int128 bound = static_cast<__int128>(10000 - t) * gold;
    if (cfg.strict ? err < bound : err <= bound) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(cfg.thresholds_bp.size());
}

double mean_mra(std::span<const std::pair<std::int64_t, std::int64_t>> pairs, const MraConfig& cfg) {
  if (pairs.empty()) fail(ErrorCode::kEmpty, "mean MRA of an empty set");
  double sum = 0.0;
  for (const auto& [pred, gold] : pairs) sum += mra(pred, gold, cfg);
  return sum / static_cast<double>(pairs.size());
}

std::int64_t round_half_up(double value) {
  if (!std::isfinite(value)) fail(ErrorCode::kNonFinite, "cannot round a non-finite count");
  return static_cast<std::int64_t>(std::floor(value + 0.5));
}

}  // namespace nosense
