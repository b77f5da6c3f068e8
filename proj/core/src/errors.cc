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

#include "lexattr/errors.h"

namespace lexattr {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kShapeError: return "ShapeError";
    case ErrorKind::kNotConverged: return "NotConverged";
    case ErrorKind::kVersionMismatch: return "VersionMismatch";
    case ErrorKind::kProtocolError: return "ProtocolError";
    case ErrorKind::kTimeout: return "Timeout";
    case ErrorKind::kOracleReportedError: return "OracleReportedError";
    case ErrorKind::kMaskUnavailable: return "MaskUnavailable";
    case ErrorKind::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::kUnsupportedOracle: return "UnsupportedOracle";
    case ErrorKind::kDegenerateEndpoints: return "DegenerateEndpoints";
    case ErrorKind::kAlignmentGap: return "AlignmentGap";
    case ErrorKind::kZeroAgency: return "ZeroAgency";
    case ErrorKind::kAllZeroAfterPolish: return "AllZeroAfterPolish";
    case ErrorKind::kEmptyClassTable: return "EmptyClassTable";
    case ErrorKind::kAllLinesMalformed: return "AllLinesMalformed";
    case ErrorKind::kValidation: return "Validation";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind),
      message_(message) {}

bool IsOracleFailure(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kVersionMismatch:
    case ErrorKind::kProtocolError:
    case ErrorKind::kTimeout:
    case ErrorKind::kOracleReportedError:
    case ErrorKind::kNonFiniteGradient:
    case ErrorKind::kUnsupportedOracle:
      return true;
    default:
      return false;
  }
}

}  // namespace lexattr
