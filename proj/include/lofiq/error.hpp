// Copyright 2026 The lofiq Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lofiq {

enum class ErrorCode {
  kBadMagic,
  kBadVersion,
  kHeaderParse,
  kOffsetOutOfBounds,
  kNonFiniteValue,
  kIoError,
  kAxisOutOfRange,
  kNotDivisible,
  kShapeMismatch,
  kLengthMismatch,
  kUnknownFormat,
  kEmptyTensor,
  kRankOutOfRange,
  kNonConvergence,
  kZeroSignal,
  kInvalidArgument,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace lofiq
