// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lofiq {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major tensor of 64-bit reals.
///
/// Immutable after construction. The constructor rejects empty extents, a
/// data length that disagrees with the shape, and any NaN or infinity.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, std::string name = {});

  static Tensor zeros(Shape shape, std::string name = {});

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(std::size_t axis) const;
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  const std::string& name() const noexcept { return name_; }

  Tensor with_name(std::string name) const;
  Tensor reshaped(Shape shape) const;

  // Releases the buffer; used by kernels that build a new tensor from an old one.
  std::vector<double> release() && { return std::move(data_); }

 private:
  Shape shape_;
  std::vector<double> data_;
  std::string name_;
};

/// Partition of one tensor axis into contiguous blocks.
///
/// The tensor is seen as `lanes` independent 1-D vectors running along `axis`
/// (one per combination of the other indices). Each lane is cut into
/// `block_count` blocks of `block_size` elements. Blocks are numbered
/// lane-major: block id = lane * block_count + position along the axis.
class BlockView {
 public:
  BlockView(const Shape& shape, std::size_t axis, std::size_t block_size);

  std::size_t axis() const noexcept { return axis_; }
  std::size_t block_size() const noexcept { return block_size_; }
  std::size_t block_count() const noexcept { return block_count_; }
  std::size_t lane_count() const noexcept { return outer_ * inner_; }
  std::size_t total_blocks() const noexcept { return lane_count() * block_count_; }
  std::size_t stride() const noexcept { return inner_; }

  /// Flat index of the first element of `block`.
  std::size_t base(std::size_t block) const noexcept {
    const std::size_t lane = block / block_count_;
    const std::size_t pos = block % block_count_;
    const std::size_t o = lane / inner_;
    const std::size_t i = lane % inner_;
    return (o * extent_ + pos * block_size_) * inner_ + i;
  }

  /// Flat index of element `j` (0 <= j < block_size) of `block`.
  std::size_t index(std::size_t block, std::size_t j) const noexcept {
    return base(block) + j * inner_;
  }

 private:
  std::size_t axis_ = 0;
  std::size_t block_size_ = 1;
  std::size_t block_count_ = 1;
  std::size_t outer_ = 1;
  std::size_t extent_ = 1;
  std::size_t inner_ = 1;
};

BlockView block_view(const Tensor& t, std::size_t axis, std::size_t block_size);

/// Whole-lane grouping: one group per 1-D vector along `axis`.
BlockView lane_view(const Tensor& t, std::size_t axis);

}  // namespace lofiq
