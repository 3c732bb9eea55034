#include "embedding_io.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "error.hpp"

namespace nosense {
namespace {

namespace fs = std::filesystem;

class EmbeddingIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("nosense_emb_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::vector<unsigned char> bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  void put_bytes(const fs::path& p, const std::vector<unsigned char>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }

  ErrorCode read_error(const fs::path& p) {
    try {
      read_embeddings(p);
    } catch (const Error& e) {
      return e.code();
    }
    ADD_FAILURE() << "read succeeded";
    return ErrorCode::kInvalidArgument;
  }

  fs::path dir_;
};

TEST_F(EmbeddingIoTest, EmptyFileIs21Bytes) {
  RawMatrix m;
  m.dim = 4;
  write_embeddings(dir_ / "e.emb", m);
  EXPECT_EQ(fs::file_size(dir_ / "e.emb"), 21u);
  const auto back = read_embeddings(dir_ / "e.emb");
  EXPECT_EQ(back.dim, 4u);
  EXPECT_EQ(back.count(), 0u);
}

TEST_F(EmbeddingIoTest, TwoRowsDimThreeIs45Bytes) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(fs::file_size(dir_ / "e.emb"), 45u);
  EXPECT_EQ(emb_file_size(3, 2), 45u);
}

// Bytes cross-checked with Python's struct and zlib.crc32.
TEST_F(EmbeddingIoTest, ExactByteLayout) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1.0f, -2.0f}});
  const std::vector<unsigned char> expected{0x45, 0x4d, 0x42, 0x31, 0x00, 0x02, 0x00, 0x00, 0x00, 0x01,
                                            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80,
                                            0x3f, 0x00, 0x00, 0x00, 0xc0, 0x56, 0x26, 0x87, 0xc3};
  EXPECT_EQ(bytes(dir_ / "e.emb"), expected);
}

TEST_F(EmbeddingIoTest, RoundTripIsBitExactForRandomPayloads) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    RawMatrix m;
    m.dim = 1 + static_cast<std::uint32_t>(rng() % 50);
    const auto count = rng() % 40;
    for (std::uint64_t i = 0; i < count * m.dim; ++i) {
      // Arbitrary bit patterns except NaNs, whose payload bits are not
      // guaranteed to survive float copies.
      float f;
      do {
        f = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
      } while (std::isnan(f));
      m.data.push_back(f);
    }
    write_embeddings(dir_ / "r.emb", m);
    const auto back = read_embeddings(dir_ / "r.emb");
    ASSERT_EQ(back.dim, m.dim);
    ASSERT_EQ(back.data.size(), m.data.size());
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      ASSERT_EQ(std::bit_cast<std::uint32_t>(back.data[i]), std::bit_cast<std::uint32_t>(m.data[i]));
    }
  }
}

TEST_F(EmbeddingIoTest, CorruptPayloadFailsCrc) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2, 3}, {4, 5, 6}});
  auto b = bytes(dir_ / "e.emb");
  b[20] ^= 0x01;
  put_bytes(dir_ / "e.emb", b);
  EXPECT_EQ(read_error(dir_ / "e.emb"), ErrorCode::kCrcMismatch);
}

TEST_F(EmbeddingIoTest, BadMagic) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2}});
  auto b = bytes(dir_ / "e.emb");
  b[0] = 'X';
  b[1] = 'E';
  b[2] = 'M';
  b[3] = 'B';
  put_bytes(dir_ / "e.emb", b);
  EXPECT_EQ(read_error(dir_ / "e.emb"), ErrorCode::kBadMagic);
}

TEST_F(EmbeddingIoTest, TruncatedAndTrailing) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2}, {3, 4}});
  auto b = bytes(dir_ / "e.emb");
  auto shorter = b;
  shorter.resize(b.size() - 3);
  put_bytes(dir_ / "s.emb", shorter);
  EXPECT_EQ(read_error(dir_ / "s.emb"), ErrorCode::kTruncated);
  auto longer = b;
  longer.push_back(0);
  put_bytes(dir_ / "l.emb", longer);
  EXPECT_EQ(read_error(dir_ / "l.emb"), ErrorCode::kTruncated);
  put_bytes(dir_ / "h.emb", {'E', 'M', 'B', '1', 0, 2});
  EXPECT_EQ(read_error(dir_ / "h.emb"), ErrorCode::kTruncated);
}

TEST_F(EmbeddingIoTest, HugeCountIsRejectedBeforeAllocation) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2}});
  auto b = bytes(dir_ / "e.emb");
  for (int i = 9; i < 17; ++i) b[static_cast<std::size_t>(i)] = 0xff;  // count = 2^64 - 1
  put_bytes(dir_ / "e.emb", b);
  EXPECT_EQ(read_error(dir_ / "e.emb"), ErrorCode::kTruncated);
}

TEST_F(EmbeddingIoTest, UnsupportedDtype) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2}});
  auto b = bytes(dir_ / "e.emb");
  b[4] = 1;
  put_bytes(dir_ / "e.emb", b);
  EXPECT_EQ(read_error(dir_ / "e.emb"), ErrorCode::kUnsupportedDtype);
}

TEST_F(EmbeddingIoTest, MixedDimensionsRejected) {
  try {
    write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2}, {1, 2, 3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMixedDimensions);
  }
  EXPECT_FALSE(fs::exists(dir_ / "e.emb"));
}

TEST_F(EmbeddingIoTest, WriteToMissingDirectoryIsIoError) {
  try {
    write_embeddings(dir_ / "missing" / "e.emb", std::vector<std::vector<float>>{{1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST_F(EmbeddingIoTest, StreamingReaderChecksCrcAtEnd) {
  write_embeddings(dir_ / "e.emb", std::vector<std::vector<float>>{{1, 2}, {3, 4}, {5, 6}});
  EmbeddingReader reader(dir_ / "e.emb");
  EXPECT_EQ(reader.header().count, 3u);
  std::vector<float> row;
  int n = 0;
  while (reader.next(row)) ++n;
  EXPECT_EQ(n, 3);
  EXPECT_FALSE(reader.next(row));
}

}  // namespace
}  // namespace nosense
