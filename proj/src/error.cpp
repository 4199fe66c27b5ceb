// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#include "lofiq/error.hpp"

namespace lofiq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kHeaderParse: return "HeaderParse";
    case ErrorCode::kOffsetOutOfBounds: return "OffsetOutOfBounds";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kAxisOutOfRange: return "AxisOutOfRange";
    case ErrorCode::kNotDivisible: return "NotDivisible";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnknownFormat: return "UnknownFormat";
    case ErrorCode::kEmptyTensor: return "EmptyTensor";
    case ErrorCode::kRankOutOfRange: return "RankOutOfRange";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kZeroSignal: return "ZeroSignal";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace lofiq
