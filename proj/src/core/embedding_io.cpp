#include "embedding_io.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <string>

#include "error.hpp"

namespace nosense {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};
constexpr std::uint8_t kDtypeFloat32 = 0;

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>((value >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

unsigned long crc_update(unsigned long crc, const unsigned char* data, std::size_t n) {
  // zlib takes uInt lengths; payloads can exceed 4 GiB.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return crc;
}

EmbHeader parse_header(std::ifstream& in, const std::filesystem::path& path) {
  std::array<unsigned char, kEmbHeaderBytes> hdr{};
  in.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
  if (in.gcount() < 4) fail(ErrorCode::kTruncated, path.string() + ": shorter than the magic");
  if (std::memcmp(hdr.data(), kMagic.data(), 4) != 0) fail(ErrorCode::kBadMagic, path.string() + ": bad magic");
  if (in.gcount() != static_cast<std::streamsize>(hdr.size())) {
    fail(ErrorCode::kTruncated, path.string() + ": truncated header");
  }
  if (hdr[4] != kDtypeFloat32) {
    fail(ErrorCode::kUnsupportedDtype, path.string() + ": unsupported dtype " + std::to_string(hdr[4]));
  }
  EmbHeader h;
  h.dim = get_le<std::uint32_t>(hdr.data() + 5);
  h.count = get_le<std::uint64_t>(hdr.data() + 9);
  if (h.dim > kEmbMaxDim) fail(ErrorCode::kSchema, path.string() + ": dim exceeds 65536");

  std::error_code ec;
  const auto actual = std::filesystem::file_size(path, ec);
  if (ec) fail(ErrorCode::kIo, path.string() + ": " + ec.message());
  if (h.dim == 0 && h.count != 0) fail(ErrorCode::kSchema, path.string() + ": zero dimension with non-zero count");
  // Compare against the real size before count drives any allocation; the
  // division keeps a hostile count from overflowing the length formula.
  if (h.dim > 0 && h.count > actual / (4ull * h.dim)) {
    fail(ErrorCode::kTruncated, path.string() + ": payload shorter than header count");
  }
  const auto expected = emb_file_size(h.dim, h.count);
  if (actual < expected) fail(ErrorCode::kTruncated, path.string() + ": file shorter than header implies");
  if (actual > expected) fail(ErrorCode::kTruncated, path.string() + ": trailing bytes after checksum");
  return h;
}

}  // namespace

void RawMatrix::append(std::span<const float> r) {
  if (dim == 0 && data.empty()) dim = static_cast<std::uint32_t>(r.size());
  if (r.size() != dim) fail(ErrorCode::kMixedDimensions, "row of dimension " + std::to_string(r.size()) +
                                                             " in matrix of dimension " + std::to_string(dim));
  data.insert(data.end(), r.begin(), r.end());
}

void write_embeddings(const std::filesystem::path& path, const RawMatrix& rows) {
  if (rows.dim > kEmbMaxDim) fail(ErrorCode::kInvalidArgument, "dimension exceeds 65536");
  if (rows.dim == 0 && !rows.data.empty()) fail(ErrorCode::kMixedDimensions, "zero dimension with payload");
  if (rows.dim != 0 && rows.data.size() % rows.dim != 0) fail(ErrorCode::kMixedDimensions, "ragged payload");

  std::vector<unsigned char> bytes;
  bytes.reserve(emb_file_size(rows.dim, rows.count()));
  bytes.insert(bytes.end(), kMagic.begin(), kMagic.end());
  bytes.push_back(kDtypeFloat32);
  put_le<std::uint32_t>(bytes, rows.dim);
  put_le<std::uint64_t>(bytes, rows.count());
  for (float v : rows.data) put_le<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(v));
  const auto crc = crc_update(crc32(0L, Z_NULL, 0), bytes.data() + kEmbHeaderBytes, bytes.size() - kEmbHeaderBytes);
  put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(crc));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, path.string() + ": write failed");
}

void write_embeddings(const std::filesystem::path& path, const std::vector<std::vector<float>>& rows,
                      std::uint32_t dim_if_empty) {
  RawMatrix m;
  m.dim = rows.empty() ? dim_if_empty : static_cast<std::uint32_t>(rows.front().size());
  for (const auto& r : rows) m.append(r);
  write_embeddings(path, m);
}

EmbHeader read_embedding_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, path.string() + ": cannot open");
  return parse_header(in, path);
}

EmbeddingReader::EmbeddingReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) fail(ErrorCode::kIo, path.string() + ": cannot open");
  header_ = parse_header(in_, path);
  crc_ = crc32(0L, Z_NULL, 0);
  buffer_.resize(4ull * header_.dim);
}

bool EmbeddingReader::next(std::vector<float>& row) {
  if (done_) return false;
  if (rows_read_ == header_.count || header_.dim == 0) {
    std::array<unsigned char, 4> tail{};
    in_.read(reinterpret_cast<char*>(tail.data()), 4);
    if (in_.gcount() != 4) fail(ErrorCode::kTruncated, "missing checksum");
    if (get_le<std::uint32_t>(tail.data()) != static_cast<std::uint32_t>(crc_)) {
      fail(ErrorCode::kCrcMismatch, "payload checksum mismatch");
    }
    done_ = true;
    return false;
  }
  in_.read(reinterpret_cast<char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
  if (in_.gcount() != static_cast<std::streamsize>(buffer_.size())) fail(ErrorCode::kTruncated, "truncated payload");
  crc_ = crc_update(crc_, buffer_.data(), buffer_.size());
  row.resize(header_.dim);
  for (std::uint32_t i = 0; i < header_.dim; ++i) {
    row[i] = std::bit_cast<float>(get_le<std::uint32_t>(buffer_.data() + 4ull * i));
  }
  ++rows_read_;
  return true;
}

RawMatrix read_embeddings(const std::filesystem::path& path) {
  EmbeddingReader reader(path);
  RawMatrix m;
  m.dim = reader.header().dim;
  m.data.reserve(static_cast<std::size_t>(reader.header().dim) * reader.header().count);
  std::vector<float> row;
  while (reader.next(row)) m.data.insert(m.data.end(), row.begin(), row.end());
  return m;
}

}  // namespace nosense
