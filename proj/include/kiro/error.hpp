/*
 * Copyright 2026 The KIRO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
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
#include <string_view>

namespace kiro {

enum class ErrorCode {
  InvalidArgument,
  EmptyDistribution,
  EmptyCohort,
  DegenerateFit,
  InsufficientData,
  KindMismatch,
  UnknownIndicator,
  NetworkError,
  ParseError,
  UnknownWiki,
  NoData,
  HardFailure,
  SchemaVersionMismatch,
  FileNotFound,
  Conflict,
  SchemaViolation,
  IntegrityError,
  IoError,
  BindError,
  StoreUnavailable,
  ConfigError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the core library. The code is stable and maps
/// one-to-one onto the C API status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace kiro
