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

#ifndef TARC_ERROR_H_
#define TARC_ERROR_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tarc {

enum class ErrorCode {
  kMalformedLine,
  kInvalidClass,
  kInvalidField,
  kSentinelViolation,
  kNonArabicCoda,
  kSubtagMismatch,
  kEmptySentence,
  kDuplicateId,
  kTargetTooSmall,
  kMissingGold,
  kSchemaMismatch,
  kDiverged,
  kCheckpointNotFound,
  kCheckpointInvalid,
  kBlockShapeMismatch,
  kPlanDiscontinuity,
  kNotFound,
  kBusy,
  kInvalidConfig,
  kInvalidArgument,
  kIo,
};

// Upper-case wire name, e.g. "SENTINEL_VIOLATION".
std::string_view code_name(ErrorCode code);

// Coordinates of a single annotation cell. Used to point the correction UI
// at the offending cell.
struct CellLocation {
  std::string sentence_id;
  int token = -1;
  std::string level;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &detail,
        std::optional<CellLocation> loc = std::nullopt);

  ErrorCode code() const { return code_; }
  const std::string &detail() const { return detail_; }
  const std::optional<CellLocation> &location() const { return location_; }

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<CellLocation> location_;
};

}  // namespace tarc

#endif  // TARC_ERROR_H_
