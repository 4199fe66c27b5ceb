// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/tensor.hpp"

#include <cmath>
#include <sstream>

#include "lofiq/error.hpp"

namespace lofiq {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, std::string name)
    : shape_(std::move(shape)), data_(std::move(data)), name_(std::move(name)) {
  if (shape_.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "tensor '" + name_ + "' has rank 0");
  }
  for (std::size_t d : shape_) {
    if (d == 0) {
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor '" + name_ + "' has a zero extent " + shape_to_string(shape_));
    }
  }
  if (shape_size(shape_) != data_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor '" + name_ + "' shape " + shape_to_string(shape_) + " needs " +
                    std::to_string(shape_size(shape_)) + " values, got " +
                    std::to_string(data_.size()));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "tensor '" + name_ + "' element " + std::to_string(i) + " is not finite");
    }
  }
}

Tensor Tensor::zeros(Shape shape, std::string name) {
  const std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), std::move(name));
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw Error(ErrorCode::kAxisOutOfRange, "axis " + std::to_string(axis) +
                                                " out of range for rank " +
                                                std::to_string(shape_.size()));
  }
  return shape_[axis];
}

Tensor Tensor::with_name(std::string name) const {
  Tensor t = *this;
  t.name_ = std::move(name);
  return t;
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_, name_);
}

BlockView::BlockView(const Shape& shape, std::size_t axis, std::size_t block_size)
    : axis_(axis), block_size_(block_size) {
  if (axis >= shape.size()) {
    throw Error(ErrorCode::kAxisOutOfRange, "axis " + std::to_string(axis) +
                                                " out of range for rank " +
                                                std::to_string(shape.size()));
  }
  if (block_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "block size must be positive");
  }
  extent_ = shape[axis];
  if (extent_ % block_size != 0) {
    throw Error(ErrorCode::kNotDivisible, "extent " + std::to_string(extent_) +
                                              " of axis " + std::to_string(axis) +
                                              " is not a multiple of block size " +
                                              std::to_string(block_size));
  }
  block_count_ = extent_ / block_size;
  outer_ = 1;
  for (std::size_t d = 0; d < axis; ++d) outer_ *= shape[d];
  inner_ = 1;
  for (std::size_t d = axis + 1; d < shape.size(); ++d) inner_ *= shape[d];
}

BlockView block_view(const Tensor& t, std::size_t axis, std::size_t block_size) {
  return BlockView(t.shape(), axis, block_size);
}

BlockView lane_view(const Tensor& t, std::size_t axis) {
  return BlockView(t.shape(), axis, t.extent(axis));
}

}  // namespace lofiq
