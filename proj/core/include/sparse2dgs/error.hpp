// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace s2dgs {

enum class ErrorKind {
  kIo,               // missing/unreadable/unwritable file
  kParse,            // malformed file contents
  kInvalidArgument,  // precondition or invariant violated by the caller
  kNumeric,          // non-finite values during optimization
  kPipeline,         // a stage could not produce its output
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message)
      : Error(ErrorKind::kParse, message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorKind::kInvalidArgument, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message)
      : Error(ErrorKind::kNumeric, message) {}
};

class PipelineError : public Error {
 public:
  explicit PipelineError(const std::string& message)
      : Error(ErrorKind::kPipeline, message) {}
};

}  // namespace s2dgs
