// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/codebook.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "lofiq/error.hpp"

namespace lofiq {

std::optional<double> FpFormatSpec::decode_magnitude(unsigned code) const {
  const unsigned total = 1u << (exponent_bits + mantissa_bits);
  if (code >= total) return std::nullopt;
  const unsigned e = code >> mantissa_bits;
  const unsigned m = code & ((1u << mantissa_bits) - 1u);
  if (has_inf) {
    if (exponent_bits > 0 && e == (1u << exponent_bits) - 1u) return std::nullopt;
  } else if (code >= total - static_cast<unsigned>(nan_encodings)) {
    return std::nullopt;
  }
  if (e == 0 && has_subnormals) {
    return std::ldexp(static_cast<double>(m), 1 - bias - mantissa_bits);
  }
  return std::ldexp(static_cast<double>((1u << mantissa_bits) + m),
                    static_cast<int>(e) - bias - mantissa_bits);
}

double FpFormatSpec::max_finite() const {
  for (unsigned c = (1u << (exponent_bits + mantissa_bits)); c-- > 0;) {
    if (auto v = decode_magnitude(c)) return *v;
  }
  return 0.0;
}

double FpFormatSpec::min_normal() const {
  return std::ldexp(1.0, has_subnormals ? 1 - bias : -bias);
}

double FpFormatSpec::min_subnormal() const {
  return has_subnormals ? std::ldexp(1.0, 1 - bias - mantissa_bits) : std::ldexp(1.0, -bias);
}

std::size_t FpFormatSpec::finite_value_count() const {
  const std::size_t total = std::size_t{1} << (exponent_bits + mantissa_bits);
  const std::size_t reserved =
      has_inf ? (std::size_t{1} << mantissa_bits) : static_cast<std::size_t>(nan_encodings);
  const std::size_t zero = has_subnormals ? 1 : 0;
  const std::size_t positive = total - reserved - zero;
  return (is_signed ? 2 * positive : positive) + zero;
}

FpFormatSpec builtin_spec(std::string_view name) {
  std::string key(name);
  for (char& c : key) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  //                name     x  y  signed  bias  inf    nan  subnormals
  if (key == "E5M2") return {"E5M2", 5, 2, true, 15, true, 0, true};
  if (key == "E4M3") return {"E4M3", 4, 3, true, 7, false, 1, true};
  if (key == "E3M2") return {"E3M2", 3, 2, true, 3, false, 0, true};
  if (key == "E2M3") return {"E2M3", 2, 3, true, 1, false, 0, true};
  if (key == "E2M1") return {"E2M1", 2, 1, true, 1, false, 0, true};
  if (key == "E8M0") return {"E8M0", 8, 0, false, 127, false, 1, false};
  if (key == "E6M2U" || key == "E6M2") return {"E6M2U", 6, 2, false, 48, false, 1, false};
  throw Error(ErrorCode::kUnknownFormat, "unknown format '" + std::string(name) + "'");
}

Codebook::Codebook(std::string name, std::vector<double> values, double min_normal)
    : name_(std::move(name)), values_(std::move(values)), min_normal_(min_normal) {
  if (values_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty codebook " + name_);
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (!(values_[i - 1] < values_[i])) {
      throw Error(ErrorCode::kInvalidArgument, "codebook " + name_ + " is not strictly increasing");
    }
  }
  signed_ = values_.front() < 0;
  if (signed_) {
    for (std::size_t i = 0, j = values_.size() - 1; i < j; ++i, --j) {
      if (values_[i] != -values_[j]) {
        throw Error(ErrorCode::kInvalidArgument, "signed codebook " + name_ + " is not symmetric");
      }
    }
  }
  for (double v : values_) {
    if (v >= 0) magnitudes_.push_back(v);
  }
  const double lo = min_positive();
  if (lo > 0) {
    lo_binade_ = std::ilogb(lo);
    const int hi = std::ilogb(magnitudes_.back()) + 1;
    for (int k = lo_binade_; k <= hi; ++k) {
      const auto it = std::lower_bound(magnitudes_.begin(), magnitudes_.end(), std::ldexp(1.0, k));
      binade_start_.push_back(static_cast<std::size_t>(it - magnitudes_.begin()));
    }
    for (std::size_t b = 0; b + 1 < binade_start_.size(); ++b) {
      const std::size_t i = binade_start_[b], j = binade_start_[b + 1];
      const double base = std::ldexp(1.0, lo_binade_ + static_cast<int>(b));
      double step = 0;
      if (j > i && magnitudes_[i] == base) {
        step = j - i == 1 ? base : magnitudes_[i + 1] - magnitudes_[i];
        for (std::size_t m = i + 1; m < j; ++m) {
          if (magnitudes_[m] - magnitudes_[m - 1] != step) step = 0;
        }
        int e = 0;
        if (step != 0 && std::frexp(step, &e) != 0.5) step = 0;
      }
      binade_step_.push_back(step);
    }
  }
}

double Codebook::min_positive() const noexcept {
  for (double v : magnitudes_) {
    if (v > 0) return v;
  }
  return 0.0;
}

bool Codebook::contains(double v) const {
  return std::binary_search(values_.begin(), values_.end(), v);
}

double Codebook::project_magnitude(double a) const {
  const auto first = magnitudes_.begin();
  const auto last = magnitudes_.end();
  if (a >= magnitudes_.back()) return magnitudes_.back();
  // The first member above a lies in a's binade or is the next binade's first.
  auto from = first, to = last;
  if (!binade_start_.empty()) {
    const int k = a > 0 ? std::ilogb(a) : lo_binade_ - 1;
    if (k >= lo_binade_ && binade_step_[k - lo_binade_] != 0) {
      // Uniform grid from 2^k: the neighbours follow from one division, exact
      // because the step is a power of two.
      const double step = binade_step_[k - lo_binade_];
      const std::size_t n = static_cast<std::size_t>((a - std::ldexp(1.0, k)) / step);
      const std::size_t idx = binade_start_[k - lo_binade_] + n;
      const double below = a - magnitudes_[idx];
      const double above = magnitudes_[idx + 1] - a;
      if (below < above) return magnitudes_[idx];
      if (above < below) return magnitudes_[idx + 1];
      return idx % 2 == 0 ? magnitudes_[idx] : magnitudes_[idx + 1];
    }
    const std::size_t i = k < lo_binade_ ? 0 : binade_start_[k - lo_binade_];
    const std::size_t j = k < lo_binade_ ? binade_start_[0] : binade_start_[k - lo_binade_ + 1];
    from = first + i;
    to = first + std::min(j + 1, magnitudes_.size());
  }
  const auto hi = std::upper_bound(from, to, a);
  if (hi == first) return *first;
  const auto lo = hi - 1;
  // Neighbours are within a factor of two of each other (or lo == 0), so
  // both differences are exact.
  const double below = a - *lo;
  const double above = *hi - a;
  if (below < above) return *lo;
  if (above < below) return *hi;
  return ((lo - first) % 2 == 0) ? *lo : *hi;
}

double Codebook::project(double x) const {
  if (!signed_) return project_magnitude(x > 0 ? x : 0.0);
  const double r = project_magnitude(std::fabs(x));
  if (r == 0.0) return 0.0;
  return x < 0 ? -r : r;
}

FormatExtremes Codebook::extremes() const {
  FormatExtremes ex;
  ex.max_normal = max_finite();
  ex.min_normal = min_normal_;
  ex.min_subnormal = min_positive();
  for (double v : magnitudes_) {
    if (v > 0 && v < min_normal_) ex.max_subnormal = v;
  }
  return ex;
}

Codebook enumerate(const FpFormatSpec& spec) {
  std::vector<double> values;
  const unsigned total = 1u << (spec.exponent_bits + spec.mantissa_bits);
  for (unsigned c = 0; c < total; ++c) {
    if (auto v = spec.decode_magnitude(c)) {
      values.push_back(*v);
      if (spec.is_signed && *v != 0.0) values.push_back(-*v);
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return Codebook(spec.name, std::move(values), spec.min_normal());
}

std::size_t density_in_interval(const Codebook& cb, double lo, double hi) {
  if (lo > hi) throw Error(ErrorCode::kInvalidArgument, "interval lower bound exceeds upper bound");
  const auto v = cb.values();
  const auto first = std::lower_bound(v.begin(), v.end(), lo);
  const auto last = std::upper_bound(v.begin(), v.end(), hi);
  return first < last ? static_cast<std::size_t>(last - first) : 0;
}

EmpiricalCdf::EmpiricalCdf(const Tensor& t) {
  if (t.empty()) throw Error(ErrorCode::kEmptyTensor, "CDF of an empty tensor");
  sorted_.reserve(t.size());
  for (double v : t.data()) sorted_.push_back(std::fabs(v));
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::fraction_at(double magnitude) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), magnitude);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::quantile(double q) const {
  if (q <= 0) return 0.0;
  if (q >= 1) return sorted_.back();
  const double n = static_cast<double>(sorted_.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted_.size());
  return sorted_[rank - 1];
}

std::vector<CdfPoint> empirical_cdf(const Tensor& t, std::size_t n_points) {
  if (n_points < 2) throw Error(ErrorCode::kInvalidArgument, "n_points must be at least 2");
  const EmpiricalCdf cdf(t);
  std::vector<CdfPoint> points;
  points.reserve(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double q = static_cast<double>(i) / static_cast<double>(n_points - 1);
    const double m = cdf.quantile(q);
    points.push_back({m, cdf.fraction_at(m)});
  }
  return points;
}

}  // namespace lofiq
