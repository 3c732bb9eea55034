#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

namespace nosense {

// EMB1 layout, all integers little-endian:
//   "EMB1" | dtype u8 (0 = float32) | dim u32 | count u64 | payload | crc32 u32
// payload is count*dim float32 values, row-major. The CRC covers the payload
// bytes only.
inline constexpr std::size_t kEmbHeaderBytes = 17;
inline constexpr std::uint32_t kEmbMaxDim = 1u << 16;

constexpr std::uint64_t emb_file_size(std::uint32_t dim, std::uint64_t count) {
  return kEmbHeaderBytes + 4ull * dim * count + 4;
}

// Raw (unnormalized) encoder output, row-major.
struct RawMatrix {
  std::uint32_t dim = 0;
  std::vector<float> data;

  std::uint64_t count() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> row(std::uint64_t i) const {
    return std::span<const float>(data).subspan(i * dim, dim);
  }
  void append(std::span<const float> row);  // kMixedDimensions on mismatch
};

void write_embeddings(const std::filesystem::path& path, const RawMatrix& rows);
void write_embeddings(const std::filesystem::path& path, const std::vector<std::vector<float>>& rows,
                      std::uint32_t dim_if_empty = 0);

RawMatrix read_embeddings(const std::filesystem::path& path);

struct EmbHeader {
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
};

// Validates magic, dtype and file length only; the payload is not read.
EmbHeader read_embedding_header(const std::filesystem::path& path);

// Single-pass row reader. The CRC is checked after the last row is consumed,
// so a caller must drain the reader to get the integrity guarantee.
class EmbeddingReader {
 public:
  explicit EmbeddingReader(const std::filesystem::path& path);

  const EmbHeader& header() const { return header_; }
  std::uint64_t rows_read() const { return rows_read_; }

  // Returns false once every row has been read and the CRC verified.
  bool next(std::vector<float>& row);

 private:
  std::ifstream in_;
  EmbHeader header_;
  std::uint64_t rows_read_ = 0;
  unsigned long crc_ = 0;
  bool done_ = false;
  std::vector<unsigned char> buffer_;
};

}  // namespace nosense
