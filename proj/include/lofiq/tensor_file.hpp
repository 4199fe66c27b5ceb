// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lofiq/tensor.hpp"

namespace lofiq {

// Binary tensor container:
//
//   bytes 0..3   magic "LQT1"
//   bytes 4..7   version, u32 little-endian (= 1)
//   bytes 8..15  header length in bytes, u64 little-endian
//   header       UTF-8 JSON {"tensors":[{"dtype","name","offset","shape"}]}
//   payload      raw little-endian row-major data; offsets are relative to
//                the first payload byte
enum class DType { kF32, kF64 };

inline constexpr char kTensorFileMagic[4] = {'L', 'Q', 'T', '1'};
inline constexpr std::uint32_t kTensorFileVersion = 1;

std::vector<std::uint8_t> encode_tensors(std::span<const Tensor> tensors, DType dtype);
std::vector<Tensor> decode_tensors(std::span<const std::uint8_t> bytes);

/// Writes `tensors` to `path`. Narrowing to f32 rounds to nearest even; a value
/// outside the f32 range is rejected as non-finite.
void save_tensors(std::span<const Tensor> tensors, const std::filesystem::path& path,
                  DType dtype);
std::vector<Tensor> load_tensors(const std::filesystem::path& path);

}  // namespace lofiq
