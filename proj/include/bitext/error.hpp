// Copyright 2026 The bitext-align Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bitext {

/// Process exit codes shared by every CLI subcommand.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kProvider = 3,
  kValidation = 4,
};

/// Base of every error raised by the library. Each subclass knows which
/// exit code the CLI should report for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

// -- provider / network ------------------------------------------------------

class ProviderError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kProvider; }
};

class AuthError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class RateLimitError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// -- data validation ---------------------------------------------------------

class ValidationError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kValidation; }
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CacheCorruption : public ValidationError {
 public:
  CacheCorruption(const std::string& path, std::size_t line,
                  const std::string& what)
      : ValidationError("cache corruption in " + path + " at line " +
                        std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NormalizationError : public ValidationError {
 public:
  explicit NormalizationError(std::size_t row)
      : ValidationError("cannot normalize row " + std::to_string(row) +
                        ": L2 norm below 1e-12"),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class EmptyTargetError : public ValidationError {
 public:
  EmptyTargetError() : ValidationError("target matrix has no rows") {}
};

class IndexOutOfBounds : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LineCountMismatch : public ValidationError {
 public:
  LineCountMismatch(std::size_t src_lines, std::size_t tgt_lines)
      : ValidationError("line count mismatch: source has " +
                        std::to_string(src_lines) + " lines, target has " +
                        std::to_string(tgt_lines)),
        src_lines_(src_lines),
        tgt_lines_(tgt_lines) {}
  std::size_t src_lines() const noexcept { return src_lines_; }
  std::size_t tgt_lines() const noexcept { return tgt_lines_; }

 private:
  std::size_t src_lines_;
  std::size_t tgt_lines_;
};

class EmptyPairs : public ValidationError {
 public:
  EmptyPairs() : ValidationError("no alignment pairs to summarize") {}
};

class InvalidLabel : public ValidationError {
 public:
  InvalidLabel(std::size_t line, const std::string& value)
      : ValidationError("invalid label '" + value + "' on line " +
                        std::to_string(line) + " (expected 1..5)"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace bitext
