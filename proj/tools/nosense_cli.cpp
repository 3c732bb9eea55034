// nosense command-line front end. Everything goes through the C API.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nosense/nosense.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Subcommand {
  CLI::App* app = nullptr;
  std::string name;  // C API subcommand
  std::map<std::string, std::string> values;
  std::vector<std::string> inputs;
};

void option(Subcommand& sub, const std::string& key, const std::string& help) {
  sub.app->add_option("--" + key, sub.values[key], help);
}

int exit_code_for(ns_status status) {
  switch (status) {
    case NS_OK: return 0;
    case NS_ERR_CONFIG:
    case NS_ERR_INVALID_ARGUMENT:
    case NS_ERR_INFEASIBLE_PARAMS:
    case NS_ERR_INVALID_REPEAT: return kExitConfig;
    default: return kExitIo;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming stress tests for long-video spatial recall and counting benchmarks"};
  app.require_subcommand(1);

  const char* env_out = std::getenv("NOSENSE_OUT_DIR");
  const std::string default_out = env_out ? env_out : "";

  std::vector<std::unique_ptr<Subcommand>> subs;
  auto make = [&](CLI::App* parent, const std::string& cli_name, const std::string& api_name,
                  const std::string& help) -> Subcommand& {
    auto s = std::make_unique<Subcommand>();
    s->app = parent->add_subcommand(cli_name, help);
    s->name = api_name;
    s->app->add_option("--out,-o", s->values["out"], "Output directory (default: $NOSENSE_OUT_DIR)");
    s->app->add_option("--workers", s->values["workers"], "Worker threads, 0 = all cores");
    s->app->add_option("--seed", s->values["seed"], "Base random seed");
    subs.push_back(std::move(s));
    return *subs.back();
  };

  auto& vsr = make(&app, "run-vsr", "run-vsr", "Answer recall questions with the streaming top-K retrieval engine");
  vsr.app->add_option("--input,-i", vsr.inputs, "Manifest glob (repeatable)")->required();
  option(vsr, "mode",
         "Object query encoding: ensemble (prompt ensemble, default) | basic (single template, no ensembling) | "
         "raw (verbatim question, no object extraction)");
  option(vsr, "k", "Retained frames K, 1..4 (default 4)");
  option(vsr, "templates", "JSON file with {version, ensemble[], basic, joint} prompt templates");

  auto& vsc = make(&app, "run-vsc-repeat", "run-vsc-repeat",
                   "Repeat counting videos k times and compare the segment counter against the unique-count oracle");
  vsc.app->add_option("--input,-i", vsc.inputs, "Counting manifest glob (repeatable)");
  option(vsc, "synthetic-scenes", "Also evaluate N generated scenes with orthogonal room clusters");
  option(vsc, "repeats", "Comma-separated repeat factors (default 1,2,3,4,5)");
  option(vsc, "threshold", "Surprise threshold rule: adaptive (default) | fixed");
  option(vsc, "tau", "Fixed threshold in (0,2]");
  option(vsc, "sigma-c", "Adaptive rule: fire above mean + c*std of the trailing window (default 3)");
  option(vsc, "window", "Adaptive rule trailing window in frames (default 30)");
  option(vsc, "floor", "Adaptive rule minimum threshold (default 0.3)");
  option(vsc, "boundaries", "surprise (default) | ideal (annotated room changes and seams)");
  option(vsc, "rooms-min", "Synthetic scenes: fewest rooms (default 2)");
  option(vsc, "rooms-max", "Synthetic scenes: most rooms (default 5)");
  option(vsc, "dwell", "Synthetic scenes: frames per room (default 20)");
  option(vsc, "dim", "Synthetic scenes: embedding dimension");
  option(vsc, "target", "Synthetic scenes: target category (default chair)");

  auto* gen = app.add_subcommand("gen", "Write synthetic manifests and EMB1 embedding files");
  gen->require_subcommand(1);
  auto& gen_vsr = make(gen, "vsr", "gen-vsr", "Recall instances with guaranteed top-4 needles and gold argmax");
  option(gen_vsr, "count", "Number of instances (default 10)");
  option(gen_vsr, "frames", "Frames per video (default 600)");
  option(gen_vsr, "dim", "Embedding dimension (default 64)");
  option(gen_vsr, "margin", "Needle vs distractor similarity gap (default 0.1)");
  option(gen_vsr, "noise", "Embedding noise level (default 0.05)");
  option(gen_vsr, "split", "Split name recorded in manifests (default synthetic)");
  option(gen_vsr, "text-mode",
         "injected (query vectors given directly, default) | templated (text table for every prompt)");
  option(gen_vsr, "templates", "Prompt template JSON used for templated text tables");
  auto& gen_vsc = make(gen, "vsc", "gen-vsc", "Counting scenes with identity annotations");
  option(gen_vsc, "count", "Number of scenes (default 10)");
  option(gen_vsc, "rooms-min", "Fewest rooms (default 2)");
  option(gen_vsc, "rooms-max", "Most rooms (default 5)");
  option(gen_vsc, "dwell", "Frames per room (default 20)");
  option(gen_vsc, "dim", "Embedding dimension (default 64)");
  option(gen_vsc, "noise", "Intra-room noise (default 0.05)");
  option(gen_vsc, "split", "Split name (default synthetic)");
  option(gen_vsc, "target", "Target category (default chair)");

  auto& rep = make(&app, "report", "report", "Merge *_rows.jsonl outputs into accuracy and MRA tables");
  rep.app->add_option("--input,-i", rep.inputs, "Run directory or rows file (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Subcommand* chosen = nullptr;
  for (auto& s : subs) {
    if (s->app->parsed()) chosen = s.get();
  }
  if (chosen == nullptr) return kExitConfig;

  ns_config* raw = nullptr;
  if (ns_config_create(&raw) != NS_OK) {
    std::fprintf(stderr, "error: %s\n", ns_last_error());
    return kExitIo;
  }
  std::unique_ptr<ns_config, decltype(&ns_config_destroy)> cfg(raw, &ns_config_destroy);

  if (chosen->values["out"].empty()) chosen->values["out"] = default_out;
  ns_status status = NS_OK;
  for (const auto& in : chosen->inputs) {
    if ((status = ns_config_set(cfg.get(), "input", in.c_str())) != NS_OK) break;
  }
  for (const auto& [key, value] : chosen->values) {
    if (status != NS_OK) break;
    if (value.empty()) continue;
    status = ns_config_set(cfg.get(), key.c_str(), value.c_str());
  }
  if (status == NS_OK) status = ns_run(cfg.get(), chosen->name.c_str());

  if (status != NS_OK) {
    std::fprintf(stderr, "error [%s]: %s\n", ns_status_name(status), ns_last_error());
    return exit_code_for(status);
  }
  std::printf("%s\n", ns_config_summary(cfg.get()));
  return 0;
}
