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

#include "tarc/loss.h"

#include <cmath>

#include "tarc/error.h"

namespace tarc::nn {

double sequence_loss(const Matrix &distributions, std::span<const int> next) {
  double total = 0.0;
  size_t count = 0;
  for (size_t t = 0; t < next.size(); ++t) {
    if (next[t] == kPad) continue;
    if (static_cast<Eigen::Index>(t) >= distributions.rows() ||
        next[t] >= distributions.cols() || next[t] < 0) {
      throw Error(ErrorCode::kInvalidArgument, "target outside the distribution");
    }
    total -= std::log(distributions(static_cast<Eigen::Index>(t), next[t]));
    ++count;
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

LossBundle compute_global_loss(const CascadeOutput &output, const TargetStreams &targets) {
  LossBundle bundle;
  for (const TaskOutput &t : output.tasks) {
    const auto &target = targets[level_index(t.task)];
    if (!target.has_value() || target->size() < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no target stream for " + std::string(level_name(t.task)));
    }
    const double loss =
        sequence_loss(t.distributions, std::span<const int>(*target).subspan(1));
    bundle.task[level_index(t.task)] = loss;
    bundle.global += loss;
  }
  return bundle;
}

}  // namespace tarc::nn
