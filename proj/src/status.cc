// Copyright 2026 The iMRC Engine Authors.
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

#include "imrc/status.h"

namespace imrc {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "parse_error";
    case ErrorCode::kSchemaError: return "schema_error";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMaskViolation: return "mask_violation";
    case ErrorCode::kLifecycle: return "lifecycle";
    case ErrorCode::kNoSession: return "no_session";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kBadRequest: return "bad_request";
  }
  return "unknown";
}

}  // namespace imrc
