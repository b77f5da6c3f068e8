/*
 * Copyright 2026 The lexattr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LEXATTR_ERRORS_H_
#define LEXATTR_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexattr {

// Every failure the library reports carries one of these kinds so callers
// (and the CLI exit-code mapping) can branch without parsing messages.
enum class ErrorKind {
  kEmptyInput,
  kShapeError,
  kNotConverged,
  kVersionMismatch,
  kProtocolError,
  kTimeout,
  kOracleReportedError,
  kMaskUnavailable,
  kNonFiniteGradient,
  kUnsupportedOracle,
  kDegenerateEndpoints,
  kAlignmentGap,
  kZeroAgency,
  kAllZeroAfterPolish,
  kEmptyClassTable,
  kAllLinesMalformed,
  kValidation,
  kIo,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }
  // The message without the kind prefix.
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

// True for failures that originate in a gradient oracle (local or remote).
bool IsOracleFailure(ErrorKind kind);

}  // namespace lexattr

#endif  // LEXATTR_ERRORS_H_
