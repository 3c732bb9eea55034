#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "segcount.hpp"

namespace nosense {

inline constexpr int kRowSchemaVersion = 1;

enum class TextMode { kInjected, kTemplated };

struct RunConfig {
  std::vector<std::string> inputs;  // manifest globs, or report inputs
  std::string out_dir;
  QueryMode mode = QueryMode::kEnsemble;
  std::size_t top_k = 4;
  std::vector<int> repeats{1, 2, 3, 4, 5};
  SurpriseConfig surprise;
  bool ideal_boundaries = false;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency
  std::string templates_file;
  PromptTemplates templates;

  // gen
  std::int64_t count = 10;
  std::int64_t frames = 600;
  std::uint32_t dim = 64;
  double margin = 0.1;
  double noise = 0.05;
  std::string split = "synthetic";
  TextMode text_mode = TextMode::kInjected;
  int rooms_min = 2;
  int rooms_max = 5;
  std::int64_t dwell = 20;
  std::string target_category = "chair";

  // run-vsc-repeat without manifests
  std::int64_t synthetic_scenes = 0;

  // Sets one field from its CLI spelling; kConfig on a bad key or value.
  void set(const std::string& key, const std::string& value);
  void validate(const std::string& subcommand) const;
  nlohmann::json to_json() const;
};

// Each command writes its outputs under cfg.out_dir and returns a one-line
// human summary. Failures throw nosense::Error after flushing whatever
// completed rows exist.
std::string cmd_run_vsr(const RunConfig& cfg);
std::string cmd_run_vsc_repeat(const RunConfig& cfg);
std::string cmd_gen_vsr(const RunConfig& cfg);
std::string cmd_gen_vsc(const RunConfig& cfg);
std::string cmd_report(const RunConfig& cfg);

// Expands globs, sorted and de-duplicated.
std::vector<std::string> expand_globs(const std::vector<std::string>& patterns);

std::string format_metric(double v);  // 4 decimal places

}  // namespace nosense
