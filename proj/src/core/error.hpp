// Copyright 2026 The dernet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace dernet {

enum class ErrorCode {
  invalid_argument = 1,
  invalid_mesh,
  invalid_config,
  parse,
  io,
  nonconvergence,
  solver,
  contact,
  numerical,
  domain,
  singularity,
};

const char* to_string(ErrorCode code);

/// Base class of every exception thrown by the core library. The C API maps
/// `code()` one-to-one onto `dernet_status`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidMeshError : public Error {
 public:
  explicit InvalidMeshError(const std::string& message)
      : Error(ErrorCode::invalid_mesh, message) {}
};

class InvalidConfigError : public Error {
 public:
  explicit InvalidConfigError(const std::string& message)
      : Error(ErrorCode::invalid_config, message) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& message)
      : Error(ErrorCode::parse,
              source + ":" + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, int iterations,
                      double residual_norm)
      : Error(ErrorCode::nonconvergence, message),
        iterations_(iterations),
        residual_norm_(residual_norm) {}

  int iterations() const noexcept { return iterations_; }
  double residual_norm() const noexcept { return residual_norm_; }

 private:
  int iterations_;
  double residual_norm_;
};

}  // namespace dernet
