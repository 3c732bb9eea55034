#include "commands.hpp"

#include <glob.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "perturb.hpp"
#include "synth.hpp"

namespace nosense {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const auto x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, key + ": expected an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const auto x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, key + ": expected a number, got '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

PromptTemplates load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "templates: cannot open " + path);
  PromptTemplates t;
  try {
    const auto j = json::parse(in);
    if (j.contains("version")) t.version = j.at("version").get<std::string>();
    if (j.contains("ensemble")) t.ensemble = j.at("ensemble").get<std::vector<std::string>>();
    if (j.contains("basic")) t.basic = j.at("basic").get<std::string>();
    if (j.contains("joint")) t.joint = j.at("joint").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, "templates: " + std::string(e.what()));
  }
  t.validate();
  return t;
}

// Runs fn(i) for i in [0, n) on a small pool pulling from a shared counter.
// Each slot is written by exactly one worker.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  if (workers <= 1) {
    loop();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(loop);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, dir + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, path.string() + ": cannot open for writing");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) fail(ErrorCode::kIo, path.string() + ": write failed");
}

std::string zero_pad(std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld", static_cast<long long>(i));
  return buf;
}

// Rethrows the first recorded failure after outputs have been flushed.
struct FirstError {
  std::optional<Error> error;
  void record(const Error& e) {
    if (!error) error = e;
  }
  void rethrow() const {
    if (error) throw *error;
  }
};

}  // namespace

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<std::string> expand_globs(const std::vector<std::string>& patterns) {
  std::set<std::string> out;
  for (const auto& p : patterns) {
    glob_t g{};
    if (::glob(p.c_str(), 0, nullptr, &g) == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.insert(g.gl_pathv[i]);
    }
    globfree(&g);
  }
  return {out.begin(), out.end()};
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "input") {
    inputs.push_back(value);
  } else if (key == "out") {
    out_dir = value;
  } else if (key == "mode") {
    mode = parse_query_mode(value);
  } else if (key == "k") {
    const auto k = parse_int(key, value);
    if (k < 1) fail(ErrorCode::kConfig, "k must be >= 1");
    top_k = static_cast<std::size_t>(k);
  } else if (key == "repeats") {
    repeats.clear();
    for (const auto& item : split_list(value)) repeats.push_back(static_cast<int>(parse_int(key, item)));
  } else if (key == "threshold") {
    if (value == "adaptive") {
      surprise.rule = SurpriseConfig::Rule::kAdaptive;
    } else if (value == "fixed") {
      surprise.rule = SurpriseConfig::Rule::kFixed;
    } else {
      fail(ErrorCode::kConfig, "threshold must be adaptive|fixed");
    }
  } else if (key == "tau") {
    surprise.tau = parse_double(key, value);
  } else if (key == "sigma-c") {
    surprise.c = parse_double(key, value);
  } else if (key == "window") {
    const auto w = parse_int(key, value);
    if (w < 0) fail(ErrorCode::kConfig, "window must be >= 2");
    surprise.window = static_cast<std::size_t>(w);
  } else if (key == "floor") {
    surprise.floor = parse_double(key, value);
  } else if (key == "boundaries") {
    if (value != "surprise" && value != "ideal") fail(ErrorCode::kConfig, "boundaries must be surprise|ideal");
    ideal_boundaries = value == "ideal";
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "workers") {
    const auto w = parse_int(key, value);
    if (w < 0) fail(ErrorCode::kConfig, "workers must be >= 0");
    workers = static_cast<unsigned>(w);
  } else if (key == "templates") {
    templates_file = value;
    templates = load_templates(value);
  } else if (key == "count") {
    count = parse_int(key, value);
  } else if (key == "frames") {
    frames = parse_int(key, value);
  } else if (key == "dim") {
    const auto d = parse_int(key, value);
    if (d < 1 || d > static_cast<std::int64_t>(kEmbMaxDim)) fail(ErrorCode::kConfig, "dim must be in 1..65536");
    dim = static_cast<std::uint32_t>(d);
  } else if (key == "margin") {
    margin = parse_double(key, value);
  } else if (key == "noise") {
    noise = parse_double(key, value);
  } else if (key == "split") {
    split = value;
  } else if (key == "text-mode") {
    if (value != "injected" && value != "templated") fail(ErrorCode::kConfig, "text-mode must be injected|templated");
    text_mode = value == "injected" ? TextMode::kInjected : TextMode::kTemplated;
  } else if (key == "rooms-min") {
    rooms_min = static_cast<int>(parse_int(key, value));
  } else if (key == "rooms-max") {
    rooms_max = static_cast<int>(parse_int(key, value));
  } else if (key == "dwell") {
    dwell = parse_int(key, value);
  } else if (key == "target") {
    target_category = value;
  } else if (key == "synthetic-scenes") {
    synthetic_scenes = parse_int(key, value);
  } else {
    fail(ErrorCode::kConfig, "unknown option '" + key + "'");
  }
}

void RunConfig::validate(const std::string& subcommand) const {
  if (out_dir.empty()) fail(ErrorCode::kConfig, "no output directory given");
  if (subcommand == "run-vsr") {
    if (inputs.empty()) fail(ErrorCode::kConfig, "run-vsr needs at least one manifest glob");
    if (top_k < 1 || top_k > 4) fail(ErrorCode::kConfig, "run-vsr scores at most 4 retained frames (1 <= k <= 4)");
    templates.validate();
  } else if (subcommand == "run-vsc-repeat") {
    if (inputs.empty() && synthetic_scenes <= 0) {
      fail(ErrorCode::kConfig, "run-vsc-repeat needs manifest globs or --synthetic-scenes");
    }
    if (repeats.empty()) fail(ErrorCode::kConfig, "repeat sweep is empty");
    for (int k : repeats) {
      if (k < 1) fail(ErrorCode::kConfig, "repeat factors must be >= 1");
    }
    surprise.validate();
    if (synthetic_scenes > 0 && (rooms_min < 2 || rooms_max < rooms_min)) {
      fail(ErrorCode::kConfig, "synthetic scenes need 2 <= rooms-min <= rooms-max");
    }
  } else if (subcommand == "gen-vsr") {
    if (count < 1) fail(ErrorCode::kConfig, "count must be >= 1");
    templates.validate();
  } else if (subcommand == "gen-vsc") {
    if (count < 1) fail(ErrorCode::kConfig, "count must be >= 1");
    if (rooms_min < 1 || rooms_max < rooms_min) fail(ErrorCode::kConfig, "need 1 <= rooms-min <= rooms-max");
  } else if (subcommand == "report") {
    if (inputs.empty()) fail(ErrorCode::kConfig, "report needs at least one input");
  } else {
    fail(ErrorCode::kConfig, "unknown subcommand '" + subcommand + "'");
  }
}

json RunConfig::to_json() const {
  json j;
  j["inputs"] = inputs;
  j["mode"] = to_string(mode);
  j["k"] = top_k;
  j["repeats"] = repeats;
  j["surprise"] = {{"rule", surprise.rule == SurpriseConfig::Rule::kFixed ? "fixed" : "adaptive"},
                   {"tau", surprise.tau},
                   {"c", surprise.c},
                   {"window", surprise.window},
                   {"floor", surprise.floor},
                   {"boundaries", ideal_boundaries ? "ideal" : "surprise"}};
  j["seed"] = seed;
  j["templates"] = {{"version", templates.version},
                    {"ensemble", templates.ensemble},
                    {"basic", templates.basic},
                    {"joint", templates.joint}};
  j["gen"] = {{"count", count}, {"frames", frames}, {"dim", dim}, {"margin", margin}, {"noise", noise},
              {"split", split}, {"text_mode", text_mode == TextMode::kInjected ? "injected" : "templated"},
              {"rooms_min", rooms_min}, {"rooms_max", rooms_max}, {"dwell", dwell}, {"target", target_category},
              {"synthetic_scenes", synthetic_scenes}};
  return j;
}

// ---------------------------------------------------------------- run-vsr --

std::string cmd_run_vsr(const RunConfig& cfg) {
  cfg.validate("run-vsr");
  const auto paths = expand_globs(cfg.inputs);
  if (paths.empty()) fail(ErrorCode::kConfig, "no manifests match the given globs");
  ensure_dir(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "run_config.json", cfg.to_json().dump(2) + "\n");

  struct Outcome {
    std::vector<std::pair<std::string, json>> rows;  // (instance id, row)
    std::optional<Error> error;
  };
  std::vector<Outcome> outcomes(paths.size());
  const EngineConfig engine{cfg.top_k};
  parallel_for(paths.size(), cfg.workers, [&](std::size_t i) {
    try {
      const auto lm = load_manifest(paths[i]);
      for (const auto& mq : lm.manifest.questions) {
        const auto queries = queries_for(lm, mq, cfg.mode, cfg.templates);
        FileFrameSource source(lm.embedding_path, lm.manifest.fps);
        const auto diag = answer_vsr(source, mq.question, queries, engine);
        json retained = json::array();
        for (const auto& [t, s] : diag.retained) retained.push_back({{"t", t}, {"s", s}});
        json row{{"schema_version", kRowSchemaVersion},
                 {"kind", "vsr"},
                 {"video_id", lm.manifest.video_id},
                 {"question_id", mq.question.question_id},
                 {"split", lm.manifest.split},
                 {"mode", to_string(cfg.mode)},
                 {"retained_frames", std::move(retained)},
                 {"scores", diag.scores.scores},
                 {"k_hat", diag.scores.answer},
                 {"gold", mq.question.gold_option},
                 {"correct", diag.scores.answer == mq.question.gold_option}};
        outcomes[i].rows.emplace_back(lm.manifest.video_id + "/" + mq.question.question_id, std::move(row));
      }
    } catch (const Error& e) {
      outcomes[i].rows.clear();
      outcomes[i].error = e;
    } catch (const std::exception& e) {
      outcomes[i].rows.clear();
      outcomes[i].error = Error(ErrorCode::kIo, paths[i] + ": " + e.what());
    }
  });

  std::vector<std::pair<std::string, json>> rows;
  FirstError first;
  for (auto& o : outcomes) {
    if (o.error) first.record(*o.error);
    for (auto& r : o.rows) rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  EvalReport report;
  {
    auto out = open_out(fs::path(cfg.out_dir) / "vsr_rows.jsonl");
    for (const auto& [id, row] : rows) {
      out << row.dump() << '\n';
      const bool correct = row["correct"].get<bool>();
      report.add({id, {row["split"].get<std::string>(), to_string(cfg.mode), 1}, row["k_hat"].get<int>(),
                  row["gold"].get<int>(), correct ? 1.0 : 0.0});
    }
  }
  const auto agg = report.aggregates();
  report.set_aggregates(agg);
  report.check_consistent();
  {
    auto out = open_out(fs::path(cfg.out_dir) / "vsr_accuracy.csv");
    out << "split,mode,n,accuracy\n";
    std::map<std::string, std::size_t> counts;
    for (const auto& r : report.rows()) ++counts[r.condition.split];
    for (const auto& [cond, acc] : agg) {
      out << cond.split << ',' << cond.mode << ',' << counts[cond.split] << ',' << format_metric(acc) << '\n';
    }
  }
  first.rethrow();

  std::size_t correct = 0;
  for (const auto& r : report.rows()) correct += r.score > 0.5 ? 1 : 0;
  const double acc = rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size());
  return "run-vsr: " + std::to_string(rows.size()) + " questions from " + std::to_string(paths.size()) +
         " manifests, mode " + to_string(cfg.mode) + ", accuracy " + format_metric(acc);
}

// --------------------------------------------------------- run-vsc-repeat --

namespace {

std::vector<CountingInstance> counting_instances(const RunConfig& cfg, std::size_t& manifest_count) {
  std::vector<CountingInstance> out;
  if (!cfg.inputs.empty()) {
    const auto paths = expand_globs(cfg.inputs);
    if (paths.empty()) fail(ErrorCode::kConfig, "no manifests match the given globs");
    manifest_count = paths.size();
    for (const auto& p : paths) {
      const auto lm = load_manifest(p);
      if (!lm.manifest.counting) fail(ErrorCode::kSchema, p + ": no counting section");
      const auto& c = *lm.manifest.counting;
      if (c.frames.empty()) fail(ErrorCode::kMissingMetadata, p + ": counting.frames annotations are required");
      CountingInstance inst;
      inst.instance_id = lm.manifest.video_id;
      inst.stream = load_stream(lm);
      inst.target_category = c.target_category;
      inst.gold = c.gold_count;
      inst.scene = c.scene;
      out.push_back(std::move(inst));
    }
  }
  for (std::int64_t i = 0; i < cfg.synthetic_scenes; ++i) {
    VscSynthParams p;
    p.seed = cfg.seed + static_cast<std::uint64_t>(i);
    p.rooms = cfg.rooms_min + static_cast<int>(p.seed % static_cast<std::uint64_t>(cfg.rooms_max - cfg.rooms_min + 1));
    p.dwell_frames = cfg.dwell;
    p.dim = std::max<std::uint32_t>(cfg.dim, static_cast<std::uint32_t>(p.rooms));
    p.noise = 0.0;
    p.target_category = cfg.target_category;
    auto scene = gen_vsc_scene(p);
    CountingInstance inst;
    inst.instance_id = "synthetic-" + zero_pad(i);
    inst.stream = std::move(scene.stream);
    inst.stream.video_id = inst.instance_id;
    inst.target_category = cfg.target_category;
    inst.gold = scene.gold;
    inst.scene = std::move(scene.scene);
    out.push_back(std::move(inst));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  return out;
}

}  // namespace

std::string cmd_run_vsc_repeat(const RunConfig& cfg) {
  cfg.validate("run-vsc-repeat");
  std::size_t manifest_count = 0;
  const auto instances = counting_instances(cfg, manifest_count);
  ensure_dir(cfg.out_dir);
  write_text(fs::path(cfg.out_dir) / "run_config.json", cfg.to_json().dump(2) + "\n");

  const SurpriseConfig surprise = cfg.surprise;
  const bool ideal = cfg.ideal_boundaries;
  auto boundaries_of = [surprise, ideal](const FrameStream& s) {
    return ideal ? ideal_boundaries(s) : surprise_signal(s, surprise).boundaries;
  };
  const std::vector<std::pair<std::string, CountingModel>> models{
      {"oracle", [](const CountingInstance& x) { return unique_count_oracle(x.stream, x.target_category); }},
      {"segcount",
       [boundaries_of](const CountingInstance& x) {
         return segment_count(x.stream, x.target_category, boundaries_of(x.stream)).prediction;
       }},
  };

  struct Cell {
    std::int64_t pred = 0;
    double mra = 0.0;
    bool holds = false;
    std::string error;
  };
  // cells[instance][model][k-slot]
  std::vector<std::vector<std::vector<Cell>>> cells(
      instances.size(), std::vector<std::vector<Cell>>(models.size(), std::vector<Cell>(cfg.repeats.size())));
  std::vector<std::vector<std::string>> traces(instances.size(), std::vector<std::string>(cfg.repeats.size()));

  parallel_for(instances.size(), cfg.workers, [&](std::size_t i) {
    const std::span<const CountingInstance> one(&instances[i], 1);
    for (std::size_t ki = 0; ki < cfg.repeats.size(); ++ki) {
      const int k = cfg.repeats[ki];
      const auto invariance = vsc_repeat_case(k);
      for (std::size_t m = 0; m < models.size(); ++m) {
        const auto rep = run_invariance(invariance, models[m].second, one);
        const auto& row = rep.rows.front();
        cells[i][m][ki] = {row.pred_after, row.mra_after, row.holds, row.error};
      }
      try {
        const auto repeated = repeat_stream(instances[i].stream, k);
        const auto seg = segment_count(repeated, instances[i].target_category, boundaries_of(repeated));
        std::string lines;
        for (const auto& s : seg.segments) {
          lines += json{{"instance_id", instances[i].instance_id}, {"k", k}, {"segment_index", s.segment_index},
                        {"start_t", s.start_t}, {"end_t", s.end_t}, {"count", s.count}}
                       .dump() +
                   "\n";
        }
        traces[i][ki] = std::move(lines);
      } catch (const Error&) {
        // the error is already reported on the model row
      }
    }
  });

  FirstError first;
  json plot{{"config", cfg.to_json()}, {"models", json::object()}};
  auto rows_out = open_out(fs::path(cfg.out_dir) / "vsc_rows.jsonl");
  for (std::size_t m = 0; m < models.size(); ++m) {
    const auto& name = models[m].first;
    auto csv = open_out(fs::path(cfg.out_dir) / ("vsc_repeat_" + name + ".csv"));
    csv << "instance_id,k,pred,gold,mra\n";
    json ks = json::array(), mean_mra = json::array(), mean_pred = json::array(), violation = json::array();
    for (std::size_t ki = 0; ki < cfg.repeats.size(); ++ki) {
      double mra_sum = 0.0, pred_sum = 0.0;
      std::size_t n = 0, violated = 0;
      for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& c = cells[i][m][ki];
        if (!c.error.empty()) {
          first.record(Error(ErrorCode::kSchema, instances[i].instance_id + ": " + c.error));
          continue;
        }
        csv << instances[i].instance_id << ',' << cfg.repeats[ki] << ',' << c.pred << ',' << instances[i].gold << ','
            << format_metric(c.mra) << '\n';
        rows_out << json{{"schema_version", kRowSchemaVersion}, {"kind", "vsc"},       {"model", name},
                         {"instance_id", instances[i].instance_id},                  {"k", cfg.repeats[ki]},
                         {"pred", c.pred},                                            {"gold", instances[i].gold},
                         {"mra", c.mra}}
                        .dump()
                 << '\n';
        mra_sum += c.mra;
        pred_sum += static_cast<double>(c.pred);
        violated += c.holds ? 0 : 1;
        ++n;
      }
      ks.push_back(cfg.repeats[ki]);
      const double denom = n == 0 ? 1.0 : static_cast<double>(n);
      mean_mra.push_back(mra_sum / denom);
      mean_pred.push_back(pred_sum / denom);
      violation.push_back(static_cast<double>(violated) / denom);
    }
    plot["models"][name] = {{"k", ks}, {"mean_mra", mean_mra}, {"mean_pred", mean_pred}, {"violation_rate", violation}};
  }
  {
    auto out = open_out(fs::path(cfg.out_dir) / "vsc_segments.jsonl");
    for (const auto& per_instance : traces) {
      for (const auto& t : per_instance) out << t;
    }
  }
  write_text(fs::path(cfg.out_dir) / "vsc_plot.json", plot.dump(2) + "\n");
  first.rethrow();

  std::string summary = "run-vsc-repeat: " + std::to_string(instances.size()) + " scenes; mean MRA by k";
  for (std::size_t m = 0; m < models.size(); ++m) {
    summary += " | " + models[m].first + ":";
    const auto& mm = plot["models"][models[m].first]["mean_mra"];
    for (std::size_t ki = 0; ki < cfg.repeats.size(); ++ki) {
      summary += " k" + std::to_string(cfg.repeats[ki]) + "=" + format_metric(mm[ki].get<double>());
    }
  }
  return summary;
}

// -------------------------------------------------------------------- gen --

std::string cmd_gen_vsr(const RunConfig& cfg) {
  cfg.validate("gen-vsr");
  struct Pending {
    Manifest manifest;
    RawMatrix frames;
    RawMatrix text;
  };
  std::vector<Pending> pending(static_cast<std::size_t>(cfg.count));
  FirstError first;
  std::mutex mu;
  parallel_for(pending.size(), cfg.workers, [&](std::size_t i) {
    try {
      VsrSynthParams p;
      p.frames = cfg.frames;
      p.dim = cfg.dim;
      p.margin = cfg.margin;
      p.noise = cfg.noise;
      p.seed = cfg.seed + i;
      const auto inst = gen_vsr_instance(p);
      const std::string stem = "vsr_" + zero_pad(static_cast<std::int64_t>(i));
      Pending& out = pending[i];
      out.frames = inst.frames_raw;
      auto& m = out.manifest;
      m.video_id = stem;
      m.split = cfg.split;
      m.frame_count = cfg.frames;
      m.embedding_file = stem + ".emb";
      ManifestQuestion mq{inst.question, std::nullopt};
      TextTable table{stem + "_text.emb", {}};
      if (cfg.text_mode == TextMode::kInjected) {
        table.texts = {"<object>", "<aux1>", "<aux2>", "<aux3>", "<aux4>"};
        out.text = inst.text_raw;
        mq.injected = InjectedRows{0, {1, 2, 3, 4}};
      } else {
        out.text.dim = cfg.dim;
        for (auto& [text, row] : templated_text_table(inst, cfg.templates, p.seed)) {
          table.texts.push_back(text);
          out.text.append(row);
        }
      }
      m.text = std::move(table);
      m.questions.push_back(std::move(mq));
    } catch (const Error& e) {
      std::lock_guard lock(mu);
      first.record(e);
    }
  });
  first.rethrow();  // nothing has been written yet

  ensure_dir(cfg.out_dir);
  for (const auto& p : pending) {
    const fs::path dir(cfg.out_dir);
    write_embeddings(dir / p.manifest.embedding_file, p.frames);
    write_embeddings(dir / p.manifest.text->file, p.text);
    write_manifest(dir / (p.manifest.video_id + ".json"), p.manifest);
  }
  return "gen-vsr: wrote " + std::to_string(pending.size()) + " manifests to " + cfg.out_dir;
}

std::string cmd_gen_vsc(const RunConfig& cfg) {
  cfg.validate("gen-vsc");
  std::vector<std::pair<Manifest, RawMatrix>> pending;
  for (std::int64_t i = 0; i < cfg.count; ++i) {
    VscSynthParams p;
    p.seed = cfg.seed + static_cast<std::uint64_t>(i);
    p.rooms = cfg.rooms_min + static_cast<int>(p.seed % static_cast<std::uint64_t>(cfg.rooms_max - cfg.rooms_min + 1));
    p.dwell_frames = cfg.dwell;
    p.dim = cfg.dim;
    p.noise = cfg.noise;
    p.target_category = cfg.target_category;
    auto inst = gen_vsc_scene(p);
    Manifest m;
    m.video_id = "vsc_" + zero_pad(i);
    m.split = cfg.split;
    m.frame_count = static_cast<std::int64_t>(inst.stream.size());
    m.embedding_file = m.video_id + ".emb";
    CountingSpec spec;
    spec.target_category = cfg.target_category;
    spec.gold_count = inst.gold;
    spec.scene = inst.scene;
    for (const auto& f : inst.stream.frames) spec.frames.push_back(*f.annotation);
    m.counting = std::move(spec);
    pending.emplace_back(std::move(m), std::move(inst.frames_raw));
  }
  ensure_dir(cfg.out_dir);
  for (const auto& [m, frames] : pending) {
    write_embeddings(fs::path(cfg.out_dir) / m.embedding_file, frames);
    write_manifest(fs::path(cfg.out_dir) / (m.video_id + ".json"), m);
  }
  return "gen-vsc: wrote " + std::to_string(pending.size()) + " manifests to " + cfg.out_dir;
}

// ----------------------------------------------------------------- report --

std::string cmd_report(const RunConfig& cfg) {
  cfg.validate("report");
  std::vector<fs::path> files;
  for (const auto& in : cfg.inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      for (const auto& entry : fs::directory_iterator(in)) {
        const auto name = entry.path().filename().string();
        if (name.size() > 11 && name.ends_with("_rows.jsonl")) files.push_back(entry.path());
      }
    } else {
      for (const auto& p : expand_globs({in})) files.emplace_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  if (files.empty()) fail(ErrorCode::kConfig, "no *_rows.jsonl files found in the report inputs");

  std::map<std::string, std::map<std::string, std::pair<std::size_t, std::size_t>>> vsr;  // mode -> split -> (hit, n)
  std::set<std::string> splits;
  std::map<std::string, std::map<int, std::tuple<double, double, std::size_t>>> vsc;  // model -> k -> sums
  std::size_t row_count = 0;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) fail(ErrorCode::kIo, f.string() + ": cannot open");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto where = f.string() + ":" + std::to_string(lineno);
      json row;
      try {
        row = json::parse(line);
        if (!row.is_object() || row.value("schema_version", 0) != kRowSchemaVersion) {
          fail(ErrorCode::kSchema, where + ": unsupported row schema version");
        }
        const auto kind = row.at("kind").get<std::string>();
        if (kind == "vsr") {
          const auto mode = row.at("mode").get<std::string>();
          const auto split = row.at("split").get<std::string>();
          auto& cell = vsr[mode][split];
          cell.first += row.at("correct").get<bool>() ? 1 : 0;
          ++cell.second;
          splits.insert(split);
        } else if (kind == "vsc") {
          auto& [mra_sum, pred_sum, n] = vsc[row.at("model").get<std::string>()][row.at("k").get<int>()];
          mra_sum += row.at("mra").get<double>();
          pred_sum += static_cast<double>(row.at("pred").get<std::int64_t>());
          ++n;
        } else {
          fail(ErrorCode::kSchema, where + ": unknown row kind '" + kind + "'");
        }
      } catch (const json::exception& e) {
        fail(ErrorCode::kSchema, where + ": malformed row: " + e.what());
      }
      ++row_count;
    }
  }

  ensure_dir(cfg.out_dir);
  if (!vsr.empty()) {
    auto out = open_out(fs::path(cfg.out_dir) / "report_vsr_accuracy.csv");
    out << "mode";
    for (const auto& s : splits) out << ',' << s;
    out << '\n';
    for (const auto& [mode, by_split] : vsr) {
      out << mode;
      for (const auto& s : splits) {
        out << ',';
        if (auto it = by_split.find(s); it != by_split.end()) {
          out << format_metric(static_cast<double>(it->second.first) / static_cast<double>(it->second.second));
        }
      }
      out << '\n';
    }
  }
  if (!vsc.empty()) {
    std::set<int> ks;
    for (const auto& [model, by_k] : vsc) {
      for (const auto& [k, sums] : by_k) ks.insert(k);
    }
    auto write_table = [&](const std::string& name, bool mra_column) {
      auto out = open_out(fs::path(cfg.out_dir) / name);
      out << 'k';
      for (const auto& [model, by_k] : vsc) out << ',' << model;
      out << '\n';
      for (int k : ks) {
        out << k;
        for (const auto& [model, by_k] : vsc) {
          out << ',';
          if (auto it = by_k.find(k); it != by_k.end()) {
            const auto& [mra_sum, pred_sum, n] = it->second;
            out << format_metric((mra_column ? mra_sum : pred_sum) / static_cast<double>(n));
          }
        }
        out << '\n';
      }
    };
    write_table("report_vsc_mra.csv", true);
    write_table("report_vsc_count.csv", false);
  }
  return "report: merged " + std::to_string(row_count) + " rows from " + std::to_string(files.size()) + " files";
}

}  // namespace nosense
