// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/tensor_file.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include "test_util.hpp"

namespace lofiq {
namespace {

using testing::code_of;

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

// Hand-assembled file, independent of encode_tensors.
std::vector<std::uint8_t> handmade(const std::string& header,
                                   const std::vector<std::uint32_t>& words,
                                   std::uint32_t version = 1, const char* magic = "LQT1") {
  std::vector<std::uint8_t> b(magic, magic + 4);
  put_u32(b, version);
  put_u64(b, header.size());
  b.insert(b.end(), header.begin(), header.end());
  for (auto w : words) put_u32(b, w);
  return b;
}

TEST(TensorFileTest, ReadsHandmadeF32File) {
  const auto bytes = handmade(
      R"({"tensors":[{"name":"a","dtype":"f32","shape":[2,2],"offset":0}]})",
      {std::bit_cast<std::uint32_t>(1.0f), std::bit_cast<std::uint32_t>(2.0f),
       std::bit_cast<std::uint32_t>(3.0f), std::bit_cast<std::uint32_t>(4.0f)});
  const auto ts = decode_tensors(bytes);
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts[0].shape(), (Shape{2, 2}));
  EXPECT_EQ(std::vector<double>(ts[0].data().begin(), ts[0].data().end()),
            (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(ts[0].name(), "a");
}

TEST(TensorFileTest, EncodesExactLayout) {
  const Tensor t({1}, {1.5}, "a");
  const auto bytes = encode_tensors(std::span(&t, 1), DType::kF32);
  const std::string header = R"({"tensors":[{"dtype":"f32","name":"a","offset":0,"shape":[1]}]})";
  const auto expected = handmade(header, {0x3FC00000u});
  EXPECT_EQ(bytes, expected);
}

TEST(TensorFileTest, EmptyList) {
  const auto bytes = encode_tensors({}, DType::kF64);
  EXPECT_TRUE(decode_tensors(bytes).empty());
  EXPECT_TRUE(decode_tensors(handmade(R"({"tensors":[]})", {})).empty());
}

TEST(TensorFileTest, NanPayloadNamesTensor) {
  const auto bytes = handmade(
      R"({"tensors":[{"name":"bad","dtype":"f32","shape":[2],"offset":0}]})",
      {0x3F800000u, 0x7FC00000u});
  try {
    decode_tensors(bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteValue);
    EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
  }
}

TEST(TensorFileTest, RoundTripsSimpleValuesAsF32) {
  const Tensor t({2}, {1.5, -2.25});
  const auto back = decode_tensors(encode_tensors(std::span(&t, 1), DType::kF32));
  EXPECT_EQ(back[0][0], 1.5);
  EXPECT_EQ(back[0][1], -2.25);
}

TEST(TensorFileTest, NarrowsOneThirdToNearestFloat) {
  const Tensor t({1}, {1.0 / 3.0});
  const auto back = decode_tensors(encode_tensors(std::span(&t, 1), DType::kF32));
  // Nearest binary32 to 1/3, from an independent float conversion.
  EXPECT_EQ(back[0][0], 0.3333333432674408);
}

TEST(TensorFileTest, F64RoundTripIsBitIdentical) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Tensor> ts;
    for (int k = 0; k < 3; ++k) {
      std::vector<double> d(7 + k);
      for (auto& v : d) {
        do {
          v = std::bit_cast<double>(bits(rng));
        } while (!std::isfinite(v));
      }
      ts.emplace_back(Shape{d.size()}, d, "t" + std::to_string(k));
    }
    const auto bytes = encode_tensors(ts, DType::kF64);
    const auto back = decode_tensors(bytes);
    ASSERT_EQ(back.size(), ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
      for (std::size_t i = 0; i < ts[k].size(); ++i)
        EXPECT_EQ(std::bit_cast<std::uint64_t>(back[k][i]), std::bit_cast<std::uint64_t>(ts[k][i]));
    }
    EXPECT_EQ(encode_tensors(back, DType::kF64), bytes);
  }
}

TEST(TensorFileTest, RejectsMalformedFiles) {
  EXPECT_EQ(code_of([] { decode_tensors(handmade("{}", {}, 1, "NOPE")); }), ErrorCode::kBadMagic);
  EXPECT_EQ(code_of([] { decode_tensors(std::vector<std::uint8_t>{'L', 'Q'}); }),
            ErrorCode::kBadMagic);
  EXPECT_EQ(code_of([] { decode_tensors(handmade(R"({"tensors":[]})", {}, 2)); }),
            ErrorCode::kBadVersion);
  EXPECT_EQ(code_of([] { decode_tensors(handmade("{not json", {})); }), ErrorCode::kHeaderParse);
  EXPECT_EQ(code_of([] {
              decode_tensors(handmade(
                  R"({"tensors":[{"name":"a","dtype":"f16","shape":[1],"offset":0}]})", {0}));
            }),
            ErrorCode::kHeaderParse);
  EXPECT_EQ(code_of([] {
              decode_tensors(handmade(
                  R"({"tensors":[{"name":"a","dtype":"f32","shape":[4],"offset":0}]})", {0, 0}));
            }),
            ErrorCode::kOffsetOutOfBounds);
  // Overlapping entries.
  EXPECT_EQ(code_of([] {
              decode_tensors(handmade(
                  R"({"tensors":[{"name":"a","dtype":"f32","shape":[2],"offset":0},)"
                  R"({"name":"b","dtype":"f32","shape":[2],"offset":4}]})",
                  {0, 0, 0, 0}));
            }),
            ErrorCode::kOffsetOutOfBounds);
  // Header length pointing past the end.
  auto b = handmade(R"({"tensors":[]})", {});
  b[8] = 0xFF;
  EXPECT_EQ(code_of([&] { decode_tensors(b); }), ErrorCode::kHeaderParse);
}

TEST(TensorFileTest, F32OverflowRejected) {
  const Tensor t({1}, {1e300});
  EXPECT_EQ(code_of([&] { encode_tensors(std::span(&t, 1), DType::kF32); }),
            ErrorCode::kNonFiniteValue);
}

TEST(TensorFileTest, SaveLoadAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "lofiq_tf_test";
  std::filesystem::create_directories(dir);
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6}, "x");
  save_tensors(std::span(&t, 1), dir / "x.lqt", DType::kF64);
  const auto back = load_tensors(dir / "x.lqt");
  EXPECT_EQ(back[0].shape(), t.shape());
  EXPECT_EQ(code_of([&] { load_tensors(dir / "missing.lqt"); }), ErrorCode::kIoError);
  EXPECT_EQ(code_of([&] { save_tensors(std::span(&t, 1), dir / "no" / "such" / "x", DType::kF32); }),
            ErrorCode::kIoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace lofiq
