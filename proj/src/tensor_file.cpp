// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/tensor_file.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "json.hpp"
#include "lofiq/error.hpp"

namespace lofiq {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

std::size_t dtype_width(DType d) { return d == DType::kF32 ? 4 : 8; }
const char* dtype_name(DType d) { return d == DType::kF32 ? "f32" : "f64"; }

std::string tensor_label(const Tensor& t, std::size_t index) {
  return t.name().empty() ? "tensor_" + std::to_string(index) : t.name();
}

}  // namespace

std::vector<std::uint8_t> encode_tensors(std::span<const Tensor> tensors, DType dtype) {
  const std::size_t width = dtype_width(dtype);
  nlohmann::json entries = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Tensor& t = tensors[i];
    entries.push_back({{"name", tensor_label(t, i)},
                       {"dtype", dtype_name(dtype)},
                       {"shape", t.shape()},
                       {"offset", offset}});
    offset += static_cast<std::uint64_t>(t.size() * width);
  }
  const std::string header = nlohmann::json{{"tensors", entries}}.dump();

  std::vector<std::uint8_t> out;
  out.reserve(16 + header.size() + offset);
  out.insert(out.end(), std::begin(kTensorFileMagic), std::end(kTensorFileMagic));
  put_le<std::uint32_t>(out, kTensorFileVersion);
  put_le<std::uint64_t>(out, header.size());
  out.insert(out.end(), header.begin(), header.end());

  for (std::size_t i = 0; i < tensors.size(); ++i) {
    for (double v : tensors[i].data()) {
      if (dtype == DType::kF64) {
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
      } else {
        // static_cast rounds to nearest even under the default FP environment.
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) {
          throw Error(ErrorCode::kNonFiniteValue,
                      "tensor '" + tensor_label(tensors[i], i) + "' value " +
                          std::to_string(v) + " overflows f32");
        }
        put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
      }
    }
  }
  return out;
}

std::vector<Tensor> decode_tensors(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kTensorFileMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "missing LQT1 magic");
  }
  if (bytes.size() < 16) throw Error(ErrorCode::kHeaderParse, "truncated preamble");
  const auto version = get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kTensorFileVersion) {
    throw Error(ErrorCode::kBadVersion, "unsupported version " + std::to_string(version));
  }
  const auto header_len = get_le<std::uint64_t>(bytes.data() + 8);
  if (header_len > bytes.size() - 16) {
    throw Error(ErrorCode::kHeaderParse, "header length exceeds file size");
  }
  const auto* header_begin = reinterpret_cast<const char*>(bytes.data() + 16);
  const std::span<const std::uint8_t> payload = bytes.subspan(16 + header_len);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_begin, header_begin + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kHeaderParse, e.what());
  }

  struct Entry {
    std::string name;
    DType dtype;
    Shape shape;
    std::uint64_t offset;
  };
  std::vector<Entry> entries;
  try {
    const auto& list = header.at("tensors");
    if (!list.is_array()) throw Error(ErrorCode::kHeaderParse, "'tensors' is not an array");
    for (const auto& item : list) {
      Entry e;
      e.name = item.at("name").get<std::string>();
      const auto dtype = item.at("dtype").get<std::string>();
      if (dtype == "f32") {
        e.dtype = DType::kF32;
      } else if (dtype == "f64") {
        e.dtype = DType::kF64;
      } else {
        throw Error(ErrorCode::kHeaderParse, "tensor '" + e.name + "' has dtype " + dtype);
      }
      e.shape = item.at("shape").get<Shape>();
      e.offset = item.at("offset").get<std::uint64_t>();
      entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kHeaderParse, ex.what());
  }

  std::vector<Tensor> tensors;
  tensors.reserve(entries.size());
  std::uint64_t previous_end = 0;
  for (const Entry& e : entries) {
    if (e.shape.empty()) throw Error(ErrorCode::kHeaderParse, "tensor '" + e.name + "' has rank 0");
    std::uint64_t count = 1;
    for (std::size_t d : e.shape) {
      if (d == 0 || count > std::numeric_limits<std::uint64_t>::max() / d / 8) {
        throw Error(ErrorCode::kHeaderParse, "tensor '" + e.name + "' has an invalid shape");
      }
      count *= d;
    }
    const std::uint64_t width = dtype_width(e.dtype);
    const std::uint64_t nbytes = count * width;
    if (e.offset < previous_end || e.offset > payload.size() ||
        nbytes > payload.size() - e.offset) {
      throw Error(ErrorCode::kOffsetOutOfBounds,
                  "tensor '" + e.name + "' at offset " + std::to_string(e.offset) +
                      " overlaps or exceeds the payload");
    }
    previous_end = e.offset + nbytes;

    std::vector<double> data(count);
    const std::uint8_t* p = payload.data() + e.offset;
    for (std::uint64_t i = 0; i < count; ++i, p += width) {
      data[i] = e.dtype == DType::kF64
                    ? std::bit_cast<double>(get_le<std::uint64_t>(p))
                    : static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)));
    }
    tensors.emplace_back(e.shape, std::move(data), e.name);
  }
  return tensors;
}

void save_tensors(std::span<const Tensor> tensors, const std::filesystem::path& path,
                  DType dtype) {
  const auto bytes = encode_tensors(tensors, dtype);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<Tensor> load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensors(bytes);
}

}  // namespace lofiq
