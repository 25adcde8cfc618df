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

#include "tarc/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "tarc/rng.h"

namespace tarc::nn {

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

namespace {

double loss_at(const Model &model, const EncodedExample &example) {
  Tape tape(false);
  const CascadeGraph g = build_cascade(tape, nullptr, model, example, GraphOptions{});
  return tape.value(g.global_loss)(0, 0);
}

}  // namespace

GradCheckResult check_gradients(Model &model, const EncodedExample &example, double epsilon,
                                size_t samples, uint64_t seed) {
  Parameters &params = model.params;
  params.zero_grad();
  {
    Tape tape;
    const CascadeGraph g = build_cascade(tape, &params, model, example, GraphOptions{});
    tape.backward(g.global_loss);
  }

  GradCheckResult result;
  Rng rng(seed);
  std::vector<Tensor> &tensors = params.tensors();
  const size_t total = std::max(samples, tensors.size());
  for (size_t i = 0; i < total; ++i) {
    Tensor &t = tensors[i % tensors.size()];
    const Eigen::Index k =
        static_cast<Eigen::Index>(rng.below(static_cast<uint64_t>(t.value.size())));
    double &theta = t.value.data()[k];
    const double saved = theta;
    theta = saved + epsilon;
    const double up = loss_at(model, example);
    theta = saved - epsilon;
    const double down = loss_at(model, example);
    theta = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double err = relative_error(t.grad.data()[k], numeric);
    if (err > result.max_relative_error || result.coordinates == 0) {
      result.max_relative_error = std::max(result.max_relative_error, err);
      if (err >= result.max_relative_error) {
        result.worst_coordinate = t.name + "[" + std::to_string(k) + "]";
      }
    }
    ++result.coordinates;
  }
  result.tensors_covered = std::min(total, tensors.size());
  return result;
}

}  // namespace tarc::nn
