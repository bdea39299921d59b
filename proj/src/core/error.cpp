// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/error.hpp"

namespace dernet {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::invalid_mesh: return "invalid mesh";
    case ErrorCode::invalid_config: return "invalid config";
    case ErrorCode::parse: return "parse error";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::nonconvergence: return "nonconvergence";
    case ErrorCode::solver: return "solver failure";
    case ErrorCode::contact: return "contact failure";
    case ErrorCode::numerical: return "numerical error";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::singularity: return "singularity";
  }
  return "unknown error";
}

}  // namespace dernet
