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

#ifndef TARC_TRAIN_H_
#define TARC_TRAIN_H_

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tarc/dataset.h"
#include "tarc/model.h"

namespace tarc::nn {

struct TrainSchedule {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Global L2 norm over all gradients; 0 disables clipping.
  double clip_norm = 5.0;
  int epochs = 30;
  // Epochs without dev improvement before stopping; 0 never stops early.
  int patience = 5;
  size_t batch_size = 16;
  // Probability of feeding the gold previous symbol to a decoder.
  double teacher_forcing = 1.0;
  // Batch order, dropout masks and scheduled sampling.
  uint64_t seed = 1;

  // Throws kInvalidConfig.
  void validate() const;
  bool operator==(const TrainSchedule &) const = default;
};

struct EpochLog {
  int epoch = 0;
  std::array<std::optional<double>, kNumLevels> task_loss;
  double global_loss = 0.0;
  std::optional<double> dev_loss;
  bool operator==(const EpochLog &) const = default;
};

struct TrainLog {
  std::vector<Level> order;
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  bool early_stopped = false;
  bool stopped_by_callback = false;

  // Header plus one row per epoch; fixed 9-digit precision.
  std::string to_tsv() const;
};

// Return true to stop after this epoch.
using EpochCallback = std::function<bool(const EpochLog &, const Model &)>;

// Mean teacher-forced losses over a data set, dropout off.
EpochLog evaluate_loss(const Model &model, const std::vector<EncodedExample> &examples);

// Epoch 0 records the loss of the initial parameters. Training losses of
// later epochs are means over the epoch's updates. On return the model holds
// the parameters of the best epoch by dev loss (train loss without a dev
// set). Throws kDiverged when a loss or gradient becomes non-finite.
TrainLog train(Model &model, const std::vector<EncodedExample> &train_set,
               const std::vector<EncodedExample> &dev_set, const TrainSchedule &schedule,
               const EpochCallback &on_epoch = {});

}  // namespace tarc::nn

#endif  // TARC_TRAIN_H_
