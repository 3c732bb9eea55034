#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "error.hpp"
#include "segcount.hpp"

namespace nosense {

using nlohmann::json;

namespace {

[[noreturn]] void schema(const std::string& where, const std::string& what) {
  fail(ErrorCode::kSchema, where + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) schema(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) schema(join(where, key), "expected a string");
  return v.get<std::string>();
}

std::int64_t get_int(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number_integer()) schema(join(where, key), "expected an integer");
  return v.get<std::int64_t>();
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number()) schema(join(where, key), "expected a number");
  return v.get<double>();
}

const json& get_array(const json& obj, const std::string& key, const std::string& where, std::size_t exact = 0) {
  const auto& v = field(obj, key, where);
  if (!v.is_array()) schema(join(where, key), "expected an array");
  if (exact != 0 && v.size() != exact) schema(join(where, key), "expected " + std::to_string(exact) + " entries");
  return v;
}

std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

RecallQuestion question_from_json(const json& j, const std::string& where) {
  RecallQuestion q;
  q.question_id = get_string(j, "question_id", where);
  q.object_text = get_string(j, "object", where);
  const auto& aux = get_array(j, "auxiliaries", where, 4);
  for (std::size_t i = 0; i < 4; ++i) {
    if (!aux[i].is_string()) schema(at(join(where, "auxiliaries"), i), "expected a string");
    q.auxiliaries[i] = aux[i].get<std::string>();
  }
  const auto& opts = get_array(j, "options", where, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto path = at(join(where, "options"), k);
    if (!opts[k].is_array() || opts[k].size() != 4) schema(path, "expected 4 integers");
    for (std::size_t u = 0; u < 4; ++u) {
      if (!opts[k][u].is_number_integer()) schema(path, "expected 4 integers");
      q.options[k][u] = opts[k][u].get<int>();
    }
    if (!is_permutation_of_four(q.options[k])) schema(path, "not a permutation of {1,2,3,4}");
  }
  q.gold_option = static_cast<int>(get_int(j, "gold_option", where));
  if (j.contains("raw_question") && !j["raw_question"].is_null()) q.raw_question = get_string(j, "raw_question", where);
  try {
    q.validate();
  } catch (const Error& e) {
    schema(where, e.what());
  }
  return q;
}

json question_to_json(const RecallQuestion& q) {
  json j;
  j["question_id"] = q.question_id;
  j["object"] = q.object_text;
  j["auxiliaries"] = q.auxiliaries;
  j["options"] = json::array();
  for (const auto& p : q.options) j["options"].push_back(p);
  j["gold_option"] = q.gold_option;
  if (q.raw_question) j["raw_question"] = *q.raw_question;
  return j;
}

}  // namespace

json manifest_to_json(const Manifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["video_id"] = m.video_id;
  j["split"] = m.split;
  j["fps"] = m.fps;
  j["frame_count"] = m.frame_count;
  j["embedding_file"] = m.embedding_file;
  if (m.text) j["text_embeddings"] = {{"file", m.text->file}, {"texts", m.text->texts}};
  j["questions"] = json::array();
  for (const auto& mq : m.questions) {
    json q = question_to_json(mq.question);
    if (mq.injected) {
      q["injected"] = {{"object_row", mq.injected->object_row}, {"auxiliary_rows", mq.injected->aux_rows}};
    }
    j["questions"].push_back(std::move(q));
  }
  if (m.counting) {
    const auto& c = *m.counting;
    json cj{{"target_category", c.target_category}, {"gold_count", c.gold_count}};
    if (c.scene) {
      json rooms = json::array();
      for (const auto& r : c.scene->rooms) {
        json objs = json::array();
        for (const auto& o : r.objects) objs.push_back({{"instance_id", o.instance_id}, {"category", o.category}});
        rooms.push_back({{"room_id", r.room_id}, {"dwell_frames", r.dwell_frames}, {"objects", std::move(objs)}});
      }
      cj["scene"] = {{"rooms", std::move(rooms)}, {"repeat_factor", c.scene->repeat_factor}};
    }
    if (!c.frames.empty()) {
      json frames = json::array();
      for (const auto& f : c.frames) {
        json vis = json::array();
        for (const auto& o : f.visible) vis.push_back(o.instance_id);
        frames.push_back({{"room_id", f.room_id}, {"visible", std::move(vis)}});
      }
      cj["frames"] = std::move(frames);
    }
    j["counting"] = std::move(cj);
  }
  return j;
}

Manifest manifest_from_json(const json& j) {
  if (!j.is_object()) schema("$", "manifest must be a JSON object");
  Manifest m;
  if (j.contains("schema_version")) {
    m.schema_version = static_cast<int>(get_int(j, "schema_version", ""));
    if (m.schema_version != kManifestSchemaVersion) schema("schema_version", "unsupported version");
  }
  m.video_id = get_string(j, "video_id", "");
  if (j.contains("split")) m.split = get_string(j, "split", "");
  if (j.contains("fps")) m.fps = get_number(j, "fps", "");
  if (!(m.fps > 0.0)) schema("fps", "must be positive");
  m.frame_count = get_int(j, "frame_count", "");
  if (m.frame_count < 0) schema("frame_count", "must be >= 0");
  m.embedding_file = get_string(j, "embedding_file", "");

  if (j.contains("text_embeddings")) {
    const auto& t = j["text_embeddings"];
    TextTable table;
    table.file = get_string(t, "file", "text_embeddings");
    const auto& texts = get_array(t, "texts", "text_embeddings");
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (!texts[i].is_string()) schema(at("text_embeddings.texts", i), "expected a string");
      table.texts.push_back(texts[i].get<std::string>());
    }
    m.text = std::move(table);
  }

  if (j.contains("questions")) {
    const auto& qs = get_array(j, "questions", "");
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const auto where = at("questions", i);
      ManifestQuestion mq;
      mq.question = question_from_json(qs[i], where);
      if (qs[i].contains("injected")) {
        const auto& inj = qs[i]["injected"];
        const auto iw = join(where, "injected");
        InjectedRows rows;
        rows.object_row = get_int(inj, "object_row", iw);
        const auto& aux = get_array(inj, "auxiliary_rows", iw, 4);
        for (std::size_t a = 0; a < 4; ++a) {
          if (!aux[a].is_number_integer()) schema(at(join(iw, "auxiliary_rows"), a), "expected an integer");
          rows.aux_rows[a] = aux[a].get<std::int64_t>();
        }
        mq.injected = rows;
      }
      m.questions.push_back(std::move(mq));
    }
  }

  if (j.contains("counting") && !j["counting"].is_null()) {
    const auto& c = j["counting"];
    CountingSpec spec;
    spec.target_category = get_string(c, "target_category", "counting");
    spec.gold_count = get_int(c, "gold_count", "counting");
    if (spec.gold_count < 0) schema("counting.gold_count", "must be >= 0");
    std::map<std::string, ObjectInstance> by_id;
    if (c.contains("scene")) {
      CountingScene scene;
      scene.target_category = spec.target_category;
      const auto& sj = c["scene"];
      if (sj.contains("repeat_factor")) scene.repeat_factor = static_cast<int>(get_int(sj, "repeat_factor", "counting.scene"));
      const auto& rooms = get_array(sj, "rooms", "counting.scene");
      for (std::size_t r = 0; r < rooms.size(); ++r) {
        const auto rw = at("counting.scene.rooms", r);
        Room room;
        room.room_id = get_string(rooms[r], "room_id", rw);
        room.dwell_frames = get_int(rooms[r], "dwell_frames", rw);
        const auto& objs = get_array(rooms[r], "objects", rw);
        for (std::size_t o = 0; o < objs.size(); ++o) {
          const auto ow = at(join(rw, "objects"), o);
          ObjectInstance obj{get_string(objs[o], "instance_id", ow), get_string(objs[o], "category", ow)};
          by_id[obj.instance_id] = obj;
          room.objects.push_back(std::move(obj));
        }
        scene.rooms.push_back(std::move(room));
      }
      try {
        scene.validate();
      } catch (const Error& e) {
        schema("counting.scene", e.what());
      }
      if (unique_count_oracle(scene) != spec.gold_count) {
        schema("counting.gold_count", "disagrees with the unique count of the scene");
      }
      spec.scene = std::move(scene);
    }
    if (c.contains("frames")) {
      if (!spec.scene) schema("counting.frames", "frame annotations need counting.scene to resolve instances");
      const auto& frames = get_array(c, "frames", "counting");
      for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto fw = at("counting.frames", f);
        FrameAnnotation a;
        a.room_id = get_string(frames[f], "room_id", fw);
        const auto& vis = get_array(frames[f], "visible", fw);
        for (std::size_t v = 0; v < vis.size(); ++v) {
          if (!vis[v].is_string()) schema(at(join(fw, "visible"), v), "expected an instance id");
          auto it = by_id.find(vis[v].get<std::string>());
          if (it == by_id.end()) schema(at(join(fw, "visible"), v), "unknown instance id");
          a.visible.push_back(it->second);
        }
        spec.frames.push_back(std::move(a));
      }
      if (static_cast<std::int64_t>(spec.frames.size()) != m.frame_count) {
        schema("counting.frames", "expected one annotation per frame");
      }
    }
    m.counting = std::move(spec);
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out << manifest_to_json(m).dump(2) << '\n';
  if (!out) fail(ErrorCode::kIo, path.string() + ": write failed");
}

LoadedManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, path.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kSchema, path.string() + ": invalid JSON: " + e.what());
  }

  LoadedManifest lm;
  try {
    lm.manifest = manifest_from_json(j);
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
  lm.path = path;
  const auto dir = path.parent_path();
  lm.embedding_path = dir / lm.manifest.embedding_file;
  lm.header = read_embedding_header(lm.embedding_path);
  if (static_cast<std::uint64_t>(lm.manifest.frame_count) != lm.header.count) {
    fail(ErrorCode::kCountMismatch, path.string() + ": frame_count " + std::to_string(lm.manifest.frame_count) +
                                        " but " + lm.manifest.embedding_file + " holds " +
                                        std::to_string(lm.header.count) + " rows");
  }

  if (lm.manifest.text) {
    const auto text = read_embeddings(dir / lm.manifest.text->file);
    if (text.count() != lm.manifest.text->texts.size()) {
      fail(ErrorCode::kCountMismatch, path.string() + ": text table lists " +
                                          std::to_string(lm.manifest.text->texts.size()) + " strings but file holds " +
                                          std::to_string(text.count()) + " rows");
    }
    if (text.count() > 0 && text.dim != lm.header.dim) {
      fail(ErrorCode::kDimensionMismatch, path.string() + ": text and frame embeddings differ in dimension");
    }
    for (std::uint64_t i = 0; i < text.count(); ++i) {
      const auto row = text.row(i);
      lm.text_rows.emplace_back(row.begin(), row.end());
      lm.text_encoder.add(lm.manifest.text->texts[i], lm.text_rows.back());
    }
  }
  for (std::size_t i = 0; i < lm.manifest.questions.size(); ++i) {
    const auto& inj = lm.manifest.questions[i].injected;
    if (!inj) continue;
    const auto n = static_cast<std::int64_t>(lm.text_rows.size());
    auto bad = [n](std::int64_t r) { return r < 0 || r >= n; };
    if (bad(inj->object_row) || std::any_of(inj->aux_rows.begin(), inj->aux_rows.end(), bad)) {
      fail(ErrorCode::kSchema, path.string() + ": " + at("questions", i) + ".injected: row outside the text table");
    }
  }
  return lm;
}

FileFrameSource::FileFrameSource(const std::filesystem::path& path, double fps) : reader_(path), fps_(fps) {}

std::optional<FrameRecord> FileFrameSource::next() {
  if (!reader_.next(row_)) return std::nullopt;
  FrameRecord f;
  f.index = static_cast<std::int64_t>(reader_.rows_read());
  f.timestamp_s = static_cast<double>(f.index - 1) / fps_;
  f.embedding = normalize(std::span<const float>(row_));
  return f;
}

FrameStream load_stream(const LoadedManifest& lm) {
  FrameStream s;
  s.video_id = lm.manifest.video_id;
  s.fps = lm.manifest.fps;
  FileFrameSource source(lm.embedding_path, lm.manifest.fps);
  while (auto f = source.next()) s.frames.push_back(std::move(*f));
  if (lm.manifest.counting && !lm.manifest.counting->frames.empty()) {
    for (std::size_t i = 0; i < s.frames.size(); ++i) s.frames[i].annotation = lm.manifest.counting->frames[i];
  }
  return s;
}

QueryEmbeddings queries_for(const LoadedManifest& lm, const ManifestQuestion& mq, QueryMode mode,
                            const PromptTemplates& templates) {
  if (mq.injected) {
    QueryEmbeddings q;
    q.mode = mode;
    q.object = normalize(lm.text_rows.at(static_cast<std::size_t>(mq.injected->object_row)));
    for (std::size_t i = 0; i < 4; ++i) {
      q.aux[i] = normalize(lm.text_rows.at(static_cast<std::size_t>(mq.injected->aux_rows[i])));
    }
    return q;
  }
  return build_queries(mq.question, mode, templates, lm.text_encoder);
}

}  // namespace nosense
