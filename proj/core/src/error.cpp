// Copyright 2026 The sparse2dgs Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparse2dgs/error.hpp"

namespace s2dgs {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kPipeline: return "pipeline";
  }
  return "unknown";
}

}  // namespace s2dgs
