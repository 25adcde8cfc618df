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

#ifndef TARC_GRADCHECK_H_
#define TARC_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tarc/dataset.h"
#include "tarc/model.h"

namespace tarc::nn {

// |a - n| / max(|a|, |n|, 1e-6)
double relative_error(double analytic, double numeric);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_coordinate;
  size_t coordinates = 0;
  size_t tensors_covered = 0;
};

// Central differences of the teacher-forced global loss (dropout off) at
// `samples` random coordinates, visiting every tensor at least once.
// Parameter values are restored afterwards.
GradCheckResult check_gradients(Model &model, const EncodedExample &example, double epsilon,
                                size_t samples = 200, uint64_t seed = 1);

}  // namespace tarc::nn

#endif  // TARC_GRADCHECK_H_
