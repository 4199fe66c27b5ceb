// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lofiq/tensor.hpp"

namespace lofiq {

/// Declarative description of an ExMy floating-point layout.
///
/// Codepoints are read as sign-magnitude words. With `has_inf` the whole
/// all-ones exponent is reserved (IEEE style); otherwise the top
/// `nan_encodings` magnitude codepoints are reserved (OCP style). Without
/// subnormals the zero exponent field encodes 2^(-bias) * (1 + m) and the
/// format has no zero (E8M0, E6M2U).
struct FpFormatSpec {
  std::string name;
  int exponent_bits = 0;
  int mantissa_bits = 0;
  bool is_signed = true;
  int bias = 0;
  bool has_inf = false;
  int nan_encodings = 0;
  bool has_subnormals = true;

  double max_finite() const;
  double min_normal() const;
  /// Smallest positive value; equals min_normal() for formats without subnormals.
  double min_subnormal() const;
  /// Analytic count of distinct finite values (+0 and -0 counted once).
  std::size_t finite_value_count() const;

  /// Value of the magnitude codepoint, or nullopt when it is reserved.
  std::optional<double> decode_magnitude(unsigned code) const;
};

/// E5M2, E4M3, E3M2, E2M3, E2M1, E8M0 and E6M2U (case-insensitive).
FpFormatSpec builtin_spec(std::string_view name);

struct FormatExtremes {
  double max_normal = 0;
  double min_normal = 0;
  double max_subnormal = 0;
  double min_subnormal = 0;
};

/// Complete finite value set of a format, sorted ascending.
///
/// Projection is round-to-nearest. Inputs beyond the largest magnitude clip to
/// it. Ties go to the neighbour whose magnitude codepoint is even, which for
/// formats with mantissa bits is the even mantissa.
class Codebook {
 public:
  /// `values` must be strictly increasing. `min_normal` marks the
  /// normal/subnormal boundary used by extremes().
  Codebook(std::string name, std::vector<double> values, double min_normal);

  const std::string& name() const noexcept { return name_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_signed() const noexcept { return signed_; }
  double max_finite() const noexcept { return values_.back(); }
  /// Smallest strictly positive member.
  double min_positive() const noexcept;
  bool contains(double v) const;

  double project(double x) const;

  FormatExtremes extremes() const;

 private:
  double project_magnitude(double a) const;

  std::string name_;
  std::vector<double> values_;
  std::vector<double> magnitudes_;  // non-negative members, ascending
  // binade_start_[k - lo_binade_]: first magnitude index >= 2^k.
  int lo_binade_ = 0;
  std::vector<std::size_t> binade_start_;
  // Member spacing inside binade k when it is a uniform grid starting at 2^k, else 0.
  std::vector<double> binade_step_;
  double min_normal_ = 0;
  bool signed_ = false;
};

Codebook enumerate(const FpFormatSpec& spec);

inline double project(const Codebook& cb, double x) { return cb.project(x); }

/// Number of members v with lo <= v <= hi.
std::size_t density_in_interval(const Codebook& cb, double lo, double hi);

struct CdfPoint {
  double magnitude = 0;
  double fraction = 0;
};

/// CDF of |values| of a tensor.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(const Tensor& t);

  /// Fraction of elements with |v| <= magnitude.
  double fraction_at(double magnitude) const;
  /// Smallest sample magnitude m with fraction_at(m) >= q (0 for q <= 0).
  double quantile(double q) const;
  std::size_t count() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// Samples the CDF of |t| at n_points evenly spaced quantile levels
/// 0, 1/(n-1), ..., 1. Each point is (quantile magnitude, CDF at it).
std::vector<CdfPoint> empirical_cdf(const Tensor& t, std::size_t n_points);

}  // namespace lofiq
