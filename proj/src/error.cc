// Copyright 2026 The TArC Annotator Authors.
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

#include "tarc/error.h"

namespace tarc {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedLine: return "MALFORMED_LINE";
    case ErrorCode::kInvalidClass: return "INVALID_CLASS";
    case ErrorCode::kInvalidField: return "INVALID_FIELD";
    case ErrorCode::kSentinelViolation: return "SENTINEL_VIOLATION";
    case ErrorCode::kNonArabicCoda: return "NON_ARABIC_CODA";
    case ErrorCode::kSubtagMismatch: return "SUBTAG_MISMATCH";
    case ErrorCode::kEmptySentence: return "EMPTY_SENTENCE";
    case ErrorCode::kDuplicateId: return "DUPLICATE_ID";
    case ErrorCode::kTargetTooSmall: return "TARGET_TOO_SMALL";
    case ErrorCode::kMissingGold: return "MISSING_GOLD";
    case ErrorCode::kSchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::kDiverged: return "DIVERGED";
    case ErrorCode::kCheckpointNotFound: return "CHECKPOINT_NOT_FOUND";
    case ErrorCode::kCheckpointInvalid: return "CHECKPOINT_INVALID";
    case ErrorCode::kBlockShapeMismatch: return "BLOCK_SHAPE_MISMATCH";
    case ErrorCode::kPlanDiscontinuity: return "PLAN_DISCONTINUITY";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kBusy: return "BUSY";
    case ErrorCode::kInvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string &detail,
             std::optional<CellLocation> loc)
    : std::runtime_error(std::string(code_name(code)) + ": " + detail),
      code_(code),
      detail_(detail),
      location_(std::move(loc)) {}

}  // namespace tarc
