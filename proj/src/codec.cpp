// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/codec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "lofiq/error.hpp"
#include "lofiq/quant_hif8.hpp"
#include "lofiq/quant_mx.hpp"
#include "lofiq/quant_nvfp4.hpp"

namespace lofiq {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad(std::string_view selector, const std::string& why) {
  throw Error(ErrorCode::kUnknownFormat, "format '" + std::string(selector) + "': " + why);
}

double parse_double(std::string_view selector, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) bad(selector, "bad number '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    bad(selector, "bad number '" + v + "'");
  }
}

std::size_t parse_size(std::string_view selector, const std::string& v) {
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(selector, "bad integer '" + v + "'");
  return n;
}

struct MxAlias {
  const char* name;
  const char* element;
};

constexpr MxAlias kMxAliases[] = {
    {"mxfp8-e4m3", "e4m3"}, {"mxfp8-e5m2", "e5m2"}, {"mxfp6-e3m2", "e3m2"},
    {"mxfp6-e2m3", "e2m3"}, {"mxfp4", "e2m1"},      {"mxint8", "int8"},
};

}  // namespace

Role parse_role(std::string_view s) {
  const std::string r = lower(s);
  if (r == "weight") return Role::kWeight;
  if (r == "activation") return Role::kActivation;
  if (r == "kv") return Role::kKv;
  throw Error(ErrorCode::kInvalidArgument, "unknown role '" + std::string(s) + "'");
}

const char* to_string(Role role) {
  switch (role) {
    case Role::kWeight: return "weight";
    case Role::kActivation: return "activation";
    case Role::kKv: return "kv";
  }
  return "weight";
}

const char* role_granularity(Role role) {
  return role == Role::kWeight ? "per-channel" : "per-token";
}

Codec Codec::parse(std::string_view selector) {
  Codec c;
  c.name_ = trim(selector);
  const auto parts = split(c.name_, ':');
  const std::string family = lower(parts.front());
  std::size_t first_param = 1;

  if (family == "int8" || family == "int4") {
    c.family_ = CodecFamily::kInt;
    c.bits_ = family == "int8" ? 8 : 4;
  } else if (family == "e4m3" || family == "e5m2" || family == "e3m2" || family == "e2m3" ||
             family == "e2m1") {
    c.family_ = CodecFamily::kCast;
    c.element_ = family;
    c.cast_codebook_ = enumerate(builtin_spec(family));
  } else if (family == "mx") {
    if (parts.size() < 2) bad(selector, "mx needs an element type, e.g. mx:e2m1");
    c.family_ = CodecFamily::kMx;
    c.element_ = lower(parts[1]);
    c.k_ = kMxDefaultBlockSize;
    first_param = 2;
  } else if (family == "nvfp4") {
    c.family_ = CodecFamily::kNvfp4;
    c.k_ = kNvfp4BlockSize;
  } else if (family == "hif8") {
    c.family_ = CodecFamily::kHif8;
    c.eps_ = kHif8DefaultEps;
  } else if (family == "hif8-scaled") {
    c.family_ = CodecFamily::kHif8Scaled;
    c.eps_ = kHif8ScaledDefaultEps;
  } else if (family == "hif4") {
    c.family_ = CodecFamily::kHif4;
    c.k_ = kHif4BlockSize;
  } else {
    bool found = false;
    for (const auto& alias : kMxAliases) {
      if (family == alias.name) {
        c.family_ = CodecFamily::kMx;
        c.element_ = alias.element;
        c.k_ = kMxDefaultBlockSize;
        found = true;
      }
    }
    if (!found) bad(selector, "unknown family '" + parts.front() + "'");
  }
  if (c.family_ == CodecFamily::kMx) {
    try {
      mx_element_spec(c.element_);
    } catch (const Error&) {
      bad(selector, "unknown MX element '" + c.element_ + "'");
    }
  }

  for (std::size_t i = first_param; i < parts.size(); ++i) {
    const std::string& p = parts[i];
    const auto eq = p.find('=');
    const std::string key = eq == std::string::npos ? p : p.substr(0, eq);
    const std::string value = eq == std::string::npos ? std::string() : p.substr(eq + 1);
    const std::string lkey = lower(key);
    if (lkey == "axis" && !value.empty()) {
      c.axis_ = parse_size(selector, value);
    } else if (c.family_ == CodecFamily::kInt && (lkey == "sym" || lkey == "asym") && value.empty()) {
      c.int_mode_ = lkey == "sym" ? IntMode::kSymmetric : IntMode::kAsymmetric;
    } else if (c.family_ == CodecFamily::kMx && key == "k" && !value.empty()) {
      c.k_ = parse_size(selector, value);
      if (c.k_ == 0) bad(selector, "block size must be positive");
    } else if (c.family_ == CodecFamily::kHif8Scaled && key == "K" && !value.empty()) {
      c.hif8_k_ = parse_double(selector, value);
      if (!(*c.hif8_k_ > 0)) bad(selector, "K must be positive");
    } else if ((c.family_ == CodecFamily::kHif8 || c.family_ == CodecFamily::kHif8Scaled) &&
               lkey == "eps" && !value.empty()) {
      c.eps_ = parse_double(selector, value);
      if (!(c.eps_ > 0)) bad(selector, "eps must be positive");
    } else if (c.family_ == CodecFamily::kHif4 && lkey == "threshold") {
      const std::string v = lower(value);
      if (v == "literal") {
        c.threshold_ = Hif4Threshold::kLiteral;
      } else if (v == "half") {
        c.threshold_ = Hif4Threshold::kHalfRange;
      } else {
        bad(selector, "threshold must be literal or half");
      }
    } else {
      bad(selector, "unexpected parameter '" + p + "'");
    }
  }
  return c;
}

std::size_t Codec::block_size() const noexcept {
  switch (family_) {
    case CodecFamily::kMx:
    case CodecFamily::kNvfp4:
    case CodecFamily::kHif4:
      return k_;
    default:
      return 1;
  }
}

std::size_t Codec::resolve_axis(const Tensor& t) const {
  return axis_ ? *axis_ : t.rank() - 1;
}

Tensor Codec::fake_quantize(const Tensor& t, std::size_t axis, Role role) const {
  switch (family_) {
    case CodecFamily::kInt: {
      const IntMode mode = int_mode_.value_or(role == Role::kWeight ? IntMode::kSymmetric
                                                                    : IntMode::kAsymmetric);
      return int_dequantize(mode == IntMode::kSymmetric ? int_quantize_symmetric(t, axis, bits_)
                                                        : int_quantize_asymmetric(t, axis, bits_));
    }
    case CodecFamily::kCast: {
      t.extent(axis);
      std::vector<double> out(t.size());
      const auto data = t.data();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = cast_codebook_->project(data[i]);
      return Tensor(t.shape(), std::move(out), t.name());
    }
    case CodecFamily::kMx:
      return mx_dequantize(mx_quantize(t, axis, mx_element_spec(element_), k_));
    case CodecFamily::kNvfp4:
      return nvfp4_dequantize(nvfp4_quantize(t, axis));
    case CodecFamily::kHif8:
      t.extent(axis);
      return hif8_quantize(t, eps_);
    case CodecFamily::kHif8Scaled: {
      const double k = hif8_k_.value_or(role == Role::kWeight       ? kHif8KWeight
                                        : role == Role::kActivation ? kHif8KActivation
                                                                    : kHif8KKv);
      return hif8_scaled_dequantize(hif8_scaled_quantize(t, axis, k, eps_));
    }
    case CodecFamily::kHif4:
      return hif4_dequantize(hif4_quantize(t, axis, threshold_));
  }
  throw Error(ErrorCode::kUnknownFormat, name_);
}

std::string Codec::granularity(Role role) const {
  if (family_ == CodecFamily::kCast || family_ == CodecFamily::kHif8) return "per-tensor";
  return role_granularity(role);
}

ConfigEcho Codec::config(Role role) const {
  ConfigEcho echo;
  switch (family_) {
    case CodecFamily::kInt:
      echo.emplace_back("bits", bits_);
      echo.emplace_back("symmetric",
                        int_mode_.value_or(role == Role::kWeight ? IntMode::kSymmetric
                                                                 : IntMode::kAsymmetric) ==
                                IntMode::kSymmetric
                            ? 1.0
                            : 0.0);
      break;
    case CodecFamily::kMx:
    case CodecFamily::kNvfp4:
    case CodecFamily::kHif4:
      echo.emplace_back("k", static_cast<double>(k_));
      break;
    case CodecFamily::kHif8Scaled:
      echo.emplace_back("K", hif8_k_.value_or(role == Role::kWeight       ? kHif8KWeight
                                              : role == Role::kActivation ? kHif8KActivation
                                                                          : kHif8KKv));
      echo.emplace_back("eps", eps_);
      break;
    case CodecFamily::kHif8:
      echo.emplace_back("eps", eps_);
      break;
    case CodecFamily::kCast:
      break;
  }
  return echo;
}

std::vector<Codec> parse_codec_list(std::string_view comma_separated) {
  std::vector<Codec> codecs;
  for (const auto& item : split(comma_separated, ',')) {
    if (trim(item).empty()) continue;
    codecs.push_back(Codec::parse(item));
  }
  if (codecs.empty()) throw Error(ErrorCode::kUnknownFormat, "no formats given");
  return codecs;
}

}  // namespace lofiq
