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

#ifndef TARC_CHECKPOINT_H_
#define TARC_CHECKPOINT_H_

#include <string>
#include <string_view>

#include "tarc/config.h"
#include "tarc/model.h"

namespace tarc::nn {

// Layout, all integers little-endian:
//   8 bytes   magic "TARCCKPT"
//   u32       format version (1)
//   u64       header length H
//   H bytes   UTF-8 JSON header: config, vocabularies, tensor manifest
//             [{name, kind, rows, cols, offset}], free-form metadata
//   payload   IEEE-754 binary64 values, row-major, at manifest offsets
//             counted from the start of the payload
inline constexpr std::string_view kCheckpointMagic = "TARCCKPT";
inline constexpr uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Model &model, const Json &metadata = Json::object());

// Rebuilds the model and checks every manifest entry against the shapes the
// stored config implies. Throws kCheckpointInvalid.
Model decode_checkpoint(std::string_view bytes, Json *metadata = nullptr);

void save_checkpoint(const std::string &path, const Model &model,
                     const Json &metadata = Json::object());
// Throws kCheckpointNotFound when the file does not exist.
Model load_checkpoint(const std::string &path, Json *metadata = nullptr);

}  // namespace tarc::nn

#endif  // TARC_CHECKPOINT_H_
