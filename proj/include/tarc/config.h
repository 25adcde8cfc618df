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

#ifndef TARC_CONFIG_H_
#define TARC_CONFIG_H_

#include <json.hpp>

#include <string>

#include "tarc/dataset.h"
#include "tarc/model.h"
#include "tarc/train.h"

namespace tarc {

using Json = nlohmann::ordered_json;

// Readers start from the defaults and override the keys present. Unknown
// keys and ill-typed values throw kInvalidConfig.
Json model_config_to_json(const nn::ModelConfig &config);
nn::ModelConfig model_config_from_json(const Json &doc);

Json schedule_to_json(const nn::TrainSchedule &schedule);
nn::TrainSchedule schedule_from_json(const Json &doc);

Json split_spec_to_json(const SplitSpec &spec);
SplitSpec split_spec_from_json(const Json &doc);

// Throws kInvalidConfig with the parser message on malformed input, kIo
// when the file cannot be read.
Json parse_json(std::string_view text);
Json read_json_file(const std::string &path);

}  // namespace tarc

#endif  // TARC_CONFIG_H_
