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

#ifndef TARC_LOSS_H_
#define TARC_LOSS_H_

#include <array>
#include <optional>
#include <span>

#include "tarc/corpus.h"
#include "tarc/dataset.h"
#include "tarc/model.h"

namespace tarc::nn {

struct LossBundle {
  // nullopt for tasks the cascade does not produce.
  std::array<std::optional<double>, kNumLevels> task;
  double global = 0.0;
};

// Mean of -log p(row t, next[t]) over rows whose next symbol is not PAD;
// zero when every symbol is PAD. Rows beyond next.size() are ignored.
double sequence_loss(const Matrix &distributions, std::span<const int> next);

// Targets are framed BOS ... EOS; step t predicts target[t + 1]. The global
// loss adds task losses in cascade order.
LossBundle compute_global_loss(const CascadeOutput &output, const TargetStreams &targets);

}  // namespace tarc::nn

#endif  // TARC_LOSS_H_
