/*
 * Copyright 2026 The FlexLP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace flex {

// Every failure raised by the library derives from Error. The kind maps
// one-to-one onto the CLI exit codes.
enum class ErrorKind {
  input,       // bad arguments or malformed data
  shape,       // tensor shape mismatch
  config,      // invalid configuration
  dependency,  // missing upstream artifact
  numeric,     // NaN / divergence
  validation,  // invariant violated in persisted data
  degenerate,  // split bucket left empty
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::input, w) {}
};

struct ShapeError : Error {
  ShapeError(const std::string& op, const std::string& detail)
      : Error(ErrorKind::shape, "shape error in " + op + ": " + detail) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};

struct DependencyError : Error {
  explicit DependencyError(const std::string& w)
      : Error(ErrorKind::dependency, w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::numeric, w) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& w)
      : Error(ErrorKind::validation, w) {}
};

struct DegenerateSplitError : Error {
  explicit DegenerateSplitError(const std::string& bucket)
      : Error(ErrorKind::degenerate, "degenerate split: bucket '" + bucket +
                                         "' received zero edges"),
        bucket_(bucket) {}
  const std::string& bucket() const noexcept { return bucket_; }

 private:
  std::string bucket_;
};

/// Process exit code for an error kind (0 is reserved for success).
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::input:
    case ErrorKind::shape:
      return 2;
    case ErrorKind::dependency:
      return 3;
    case ErrorKind::numeric:
      return 4;
    case ErrorKind::validation:
    case ErrorKind::degenerate:
      return 5;
  }
  return 1;
}

}  // namespace flex
