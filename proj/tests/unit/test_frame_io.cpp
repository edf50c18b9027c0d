#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "noseheat/error.hpp"
#include "noseheat/frame_io.hpp"
#include "noseheat/synth.hpp"
#include "test_util.hpp"

using namespace noseheat;

namespace {

FrameSequence small_sequence(std::size_t w, std::size_t h, std::size_t n, float base = 30.0f) {
  FrameSequence s;
  s.nominal_rate = 8.7f;
  for (std::size_t k = 0; k < n; ++k) {
    ThermalFrame f;
    f.width = w;
    f.height = h;
    f.timestamp = static_cast<double>(k) / 8.7;
    for (std::size_t i = 0; i < w * h; ++i) f.temps.push_back(base + 0.25f * static_cast<float>(i + k));
    s.frames.push_back(f);
  }
  return s;
}

std::vector<std::byte> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), {});
  std::vector<std::byte> out(raw.size());
  std::memcpy(out.data(), raw.data(), raw.size());
  return out;
}

void expect_code(ErrorCode code, auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(FrameIo, TwoFrameRoundTripIsByteIdentical) {
  testutil::TempDir dir;
  const auto seq = small_sequence(4, 4, 2);
  write_sequence(seq, dir / "a.nhtf");
  const auto back = read_sequence(dir / "a.nhtf");
  EXPECT_EQ(back, seq);
  write_sequence(back, dir / "b.nhtf");
  EXPECT_EQ(file_bytes(dir / "a.nhtf"), file_bytes(dir / "b.nhtf"));
}

TEST(FrameIo, HeaderLayoutIsLittleEndian) {
  const auto bytes = encode_nhtf(small_sequence(3, 2, 5));
  ASSERT_GE(bytes.size(), kNhtfHeaderBytes);
  EXPECT_EQ(std::memcmp(bytes.data(), "NHTF", 4), 0);
  auto u16 = [&](std::size_t at) {
    return static_cast<unsigned>(bytes[at]) | static_cast<unsigned>(bytes[at + 1]) << 8;
  };
  EXPECT_EQ(u16(4), 1u);
  EXPECT_EQ(u16(6), 3u);
  EXPECT_EQ(u16(8), 2u);
  EXPECT_EQ(u16(10) | u16(12) << 16, 5u);
  float rate;
  std::memcpy(&rate, bytes.data() + 14, 4);
  EXPECT_EQ(rate, 8.7f);
  EXPECT_EQ(bytes.size(), 18u + 5u * (8u + 6u * 4u));
}

TEST(FrameIo, SinglePixelFileSize) {
  testutil::TempDir dir;
  FrameSequence s;
  s.nominal_rate = 1.0f;
  s.frames.push_back({1, 1, 0.0, {30.0f}});
  write_sequence(s, dir / "one.nhtf");
  EXPECT_EQ(std::filesystem::file_size(dir / "one.nhtf"), 18u + 8u + 4u);
}

TEST(FrameIo, GeneratedSceneRoundTrip) {
  testutil::TempDir dir;
  SceneSpec spec;
  spec.duration = 2.0;
  spec.pixel_noise_sd = 0.1;
  spec.path.velocity = {1.0, 0.5};
  const auto scene = gen_sequence(spec);
  ASSERT_EQ(scene.sequence.width(), 160u);
  ASSERT_EQ(scene.sequence.height(), 120u);
  write_sequence(scene.sequence, dir / "s.nhtf");
  EXPECT_EQ(read_sequence(dir / "s.nhtf"), scene.sequence);
  write_sequence(scene.sequence, dir / "s2.nhtf");
  EXPECT_EQ(file_bytes(dir / "s.nhtf"), file_bytes(dir / "s2.nhtf"));
}

TEST(FrameIo, CsvBundleRoundTrip) {
  testutil::TempDir dir;
  auto seq = small_sequence(5, 3, 4);
  seq.frames[2].temps[7] = 31.123456789f;
  write_csv_bundle(seq, dir / "bundle");
  EXPECT_TRUE(std::filesystem::exists(dir / "bundle" / "index.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "bundle" / "frame_000003.csv"));
  const auto back = read_sequence(dir / "bundle");
  ASSERT_EQ(back.size(), seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) {
    EXPECT_EQ(back.frames[k].temps, seq.frames[k].temps);
    EXPECT_EQ(back.frames[k].timestamp, seq.frames[k].timestamp);
  }
  EXPECT_NEAR(back.nominal_rate, 8.7f, 1e-4);
}

TEST(FrameIo, HeaderClaimsMoreFramesThanPresent) {
  auto bytes = encode_nhtf(small_sequence(4, 4, 10));
  bytes.resize(bytes.size() - (8 + 16 * 4));
  expect_code(ErrorCode::DimensionMismatch, [&] { decode_nhtf(bytes); });
}

TEST(FrameIo, Rejections) {
  auto good = encode_nhtf(small_sequence(2, 2, 3));

  auto bad_magic = good;
  bad_magic[0] = std::byte{'X'};
  expect_code(ErrorCode::BadMagic, [&] { decode_nhtf(bad_magic); });

  auto bad_version = good;
  bad_version[4] = std::byte{2};
  expect_code(ErrorCode::BadMagic, [&] { decode_nhtf(bad_version); });

  auto backwards = small_sequence(2, 2, 3);
  backwards.frames[2].timestamp = backwards.frames[1].timestamp;
  expect_code(ErrorCode::NonMonotonicTime, [&] { encode_nhtf(backwards); });
  // Same defect injected directly into the bytes.
  auto time_bytes = good;
  const std::size_t record = 8 + 4 * 4;
  std::memcpy(time_bytes.data() + 18 + 2 * record, time_bytes.data() + 18 + record, 8);
  expect_code(ErrorCode::NonMonotonicTime, [&] { decode_nhtf(time_bytes); });

  auto hot = good;
  const float v = 151.0f;
  std::memcpy(hot.data() + 18 + 8, &v, 4);
  expect_code(ErrorCode::OutOfRangeTemp, [&] { decode_nhtf(hot); });
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(hot.data() + 18 + 8, &nan, 4);
  expect_code(ErrorCode::OutOfRangeTemp, [&] { decode_nhtf(hot); });

  FrameSequence empty;
  empty.nominal_rate = 1.0f;
  testutil::TempDir dir;
  expect_code(ErrorCode::InvalidSequence, [&] { write_sequence(empty, dir / "e.nhtf"); });

  auto mixed = small_sequence(2, 2, 2);
  mixed.frames[1] = small_sequence(3, 2, 1).frames[0];
  mixed.frames[1].timestamp = 1.0;
  expect_code(ErrorCode::DimensionMismatch, [&] { validate(mixed); });

  expect_code(ErrorCode::IoFailure, [&] { read_sequence(dir / "missing.nhtf"); });
}

TEST(FrameIo, MissingFileMessageNamesPath) {
  try {
    read_sequence("/nonexistent/where.nhtf");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/where.nhtf"), std::string::npos);
  }
}

// Every byte stream either decodes to a valid sequence or raises one
// classified Error; nothing else escapes.
TEST(FrameIo, DecodeIsTotalOverRandomBytes) {
  std::mt19937_64 rng(42);
  const auto good = encode_nhtf(small_sequence(3, 3, 4));
  int parsed = 0;
  for (int trial = 0; trial < 4000; ++trial) {
    std::vector<std::byte> bytes;
    if (trial % 2 == 0) {
      bytes.resize(rng() % 80);
      for (auto& b : bytes) b = static_cast<std::byte>(rng());
      if (trial % 4 == 0 && bytes.size() >= 6) {
        std::memcpy(bytes.data(), "NHTF\x01\x00", 6);
      }
    } else {
      bytes = good;
      const int flips = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < flips; ++i) bytes[rng() % bytes.size()] = static_cast<std::byte>(rng());
      if (rng() % 3 == 0) bytes.resize(rng() % (bytes.size() + 1));
    }
    try {
      const auto seq = decode_nhtf(bytes);
      validate(seq);
      ++parsed;
    } catch (const Error&) {
    } catch (...) {
      FAIL() << "unclassified exception on trial " << trial;
    }
  }
  EXPECT_GT(parsed, 0);
}
