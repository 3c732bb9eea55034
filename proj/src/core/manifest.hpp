#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "embedding_io.hpp"
#include "engine.hpp"
#include "types.hpp"

namespace nosense {

inline constexpr int kManifestSchemaVersion = 1;

// Text rows exported by the encoder sidecar: row i of `file` embeds texts[i].
struct TextTable {
  std::string file;
  std::vector<std::string> texts;
};

// Query vectors supplied directly as rows of the text table, bypassing
// template expansion (synthetic data).
struct InjectedRows {
  std::int64_t object_row = 0;
  std::array<std::int64_t, 4> aux_rows{};
};

struct ManifestQuestion {
  RecallQuestion question;
  std::optional<InjectedRows> injected;
};

struct CountingSpec {
  std::string target_category;
  std::int64_t gold_count = 0;
  std::optional<CountingScene> scene;
  std::vector<FrameAnnotation> frames;  // empty, or one per frame
};

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  std::string video_id;
  std::string split = "default";
  double fps = 1.0;
  std::int64_t frame_count = 0;
  std::string embedding_file;  // relative to the manifest's directory
  std::optional<TextTable> text;
  std::vector<ManifestQuestion> questions;
  std::optional<CountingSpec> counting;
};

nlohmann::json manifest_to_json(const Manifest& m);
// kSchema with a field path such as "questions[0].options[1]".
Manifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const Manifest& m);

struct LoadedManifest {
  Manifest manifest;
  std::filesystem::path path;
  std::filesystem::path embedding_path;
  EmbHeader header;
  TableTextEncoder text_encoder;
  std::vector<std::vector<double>> text_rows;
};

// Parses and validates the manifest, checks frame_count against the embedding
// file header (kCountMismatch) and loads the text table. Frame payloads are
// not read here.
LoadedManifest load_manifest(const std::filesystem::path& path);

// Streams frames straight from the embedding file, normalizing each row.
class FileFrameSource final : public FrameSource {
 public:
  FileFrameSource(const std::filesystem::path& path, double fps);
  std::optional<FrameRecord> next() override;
  std::uint64_t rows_read() const { return reader_.rows_read(); }

 private:
  EmbeddingReader reader_;
  double fps_;
  std::vector<float> row_;
};

// Whole stream in memory, with counting annotations attached when present.
FrameStream load_stream(const LoadedManifest& lm);

QueryEmbeddings queries_for(const LoadedManifest& lm, const ManifestQuestion& mq, QueryMode mode,
                            const PromptTemplates& templates);

}  // namespace nosense
