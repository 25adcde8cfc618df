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

#include "tarc/train.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "tarc/error.h"

namespace tarc::nn {

void TrainSchedule::validate() const {
  auto fail = [](const std::string &what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) fail("learning rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail("adam betas must be in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) fail("adam epsilon must be > 0");
  if (!(clip_norm >= 0.0)) fail("clip norm must be >= 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (patience < 0) fail("patience must be >= 0");
  if (batch_size == 0) fail("batch size must be > 0");
  if (!(teacher_forcing >= 0.0 && teacher_forcing <= 1.0)) {
    fail("teacher forcing ratio must be in [0, 1]");
  }
}

std::string TrainLog::to_tsv() const {
  std::ostringstream out;
  out << "epoch";
  for (Level level : order) out << '\t' << level_name(level);
  out << "\tglobal\tdev_global\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return std::string(buf);
  };
  for (const EpochLog &e : epochs) {
    out << e.epoch;
    for (Level level : order) {
      const auto &v = e.task_loss[level_index(level)];
      out << '\t' << (v ? num(*v) : "-");
    }
    out << '\t' << num(e.global_loss) << '\t' << (e.dev_loss ? num(*e.dev_loss) : "-") << '\n';
  }
  return out.str();
}

namespace {

struct LossSums {
  std::array<double, kNumLevels> task{};
  double global = 0.0;
  size_t count = 0;

  void add(const Tape &tape, const CascadeGraph &g, const std::vector<Level> &order) {
    for (Level level : order) {
      task[level_index(level)] += tape.value(g.task_loss[level_index(level)])(0, 0);
    }
    global += tape.value(g.global_loss)(0, 0);
    ++count;
  }

  EpochLog mean(int epoch, const std::vector<Level> &order) const {
    EpochLog log;
    log.epoch = epoch;
    const double n = count > 0 ? static_cast<double>(count) : 1.0;
    for (Level level : order) log.task_loss[level_index(level)] = task[level_index(level)] / n;
    log.global_loss = global / n;
    return log;
  }
};

class Adam {
 public:
  Adam(const Parameters &params, const TrainSchedule &s) : s_(s) {
    for (const Tensor &t : params.tensors()) {
      m_.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
      v_.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
    }
  }

  void step(Parameters &params) {
    ++t_;
    const double c1 = 1.0 - std::pow(s_.beta1, t_);
    const double c2 = 1.0 - std::pow(s_.beta2, t_);
    auto &tensors = params.tensors();
    for (size_t i = 0; i < tensors.size(); ++i) {
      Tensor &p = tensors[i];
      m_[i] = s_.beta1 * m_[i] + (1.0 - s_.beta1) * p.grad;
      v_[i] = s_.beta2 * v_[i] + (1.0 - s_.beta2) * p.grad.cwiseProduct(p.grad);
      const auto m_hat = m_[i].array() / c1;
      const auto v_hat = v_[i].array() / c2;
      p.value.array() -= s_.learning_rate * m_hat / (v_hat.sqrt() + s_.adam_epsilon);
    }
  }

 private:
  const TrainSchedule &s_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  int t_ = 0;
};

// Scheduled sampling: every decoder input after BOS is the gold symbol with
// probability `ratio`, otherwise the argmax of the previous teacher-forced
// step.
TargetStreams sampled_inputs(const Model &model, const EncodedExample &example, double ratio,
                             Rng &rng) {
  TargetStreams inputs;
  const CascadeOutput tf = forward_cascade(model, example, DecodeMode::kTeacherForced);
  for (const TaskOutput &task : tf.tasks) {
    const std::vector<int> &gold = *example.targets[level_index(task.task)];
    std::vector<int> in(gold.begin(), gold.end() - 1);
    for (size_t t = 1; t < in.size(); ++t) {
      if (in[t] == kPad) continue;
      if (rng.uniform01() >= ratio) in[t] = task.symbols[t - 1];
    }
    inputs[level_index(task.task)] = std::move(in);
  }
  return inputs;
}

double clip(Parameters &params, double max_norm) {
  double sq = 0.0;
  for (const Tensor &t : params.tensors()) sq += t.grad.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (Tensor &t : params.tensors()) t.grad *= factor;
  }
  return norm;
}

void check_finite(double value, int epoch, const char *what) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kDiverged,
                std::string(what) + " became non-finite in epoch " + std::to_string(epoch));
  }
}

}  // namespace

EpochLog evaluate_loss(const Model &model, const std::vector<EncodedExample> &examples) {
  LossSums sums;
  for (const EncodedExample &ex : examples) {
    Tape tape(false);
    const CascadeGraph g = build_cascade(tape, nullptr, model, ex, GraphOptions{});
    sums.add(tape, g, model.config.decoder_order);
  }
  return sums.mean(0, model.config.decoder_order);
}

TrainLog train(Model &model, const std::vector<EncodedExample> &train_set,
               const std::vector<EncodedExample> &dev_set, const TrainSchedule &schedule,
               const EpochCallback &on_epoch) {
  schedule.validate();
  if (train_set.empty()) throw Error(ErrorCode::kInvalidArgument, "training set is empty");
  const std::vector<Level> &order = model.config.decoder_order;

  TrainLog log;
  log.order = order;
  auto score = [](const EpochLog &e) { return e.dev_loss ? *e.dev_loss : e.global_loss; };

  EpochLog initial = evaluate_loss(model, train_set);
  if (!dev_set.empty()) initial.dev_loss = evaluate_loss(model, dev_set).global_loss;
  check_finite(initial.global_loss, 0, "training loss");
  log.epochs.push_back(initial);
  if (on_epoch && on_epoch(initial, model)) {
    log.stopped_by_callback = true;
    return log;
  }

  Parameters best = model.params;
  double best_score = score(initial);
  int since_best = 0;
  Adam adam(model.params, schedule);
  Rng rng(schedule.seed);

  for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
    LossSums sums;
    const auto batches = make_batches(train_set, schedule.batch_size, rng.next());
    for (const std::vector<size_t> &batch : batches) {
      model.params.zero_grad();
      for (size_t idx : batch) {
        const EncodedExample &ex = train_set[idx];
        TargetStreams mixed;
        GraphOptions opt;
        opt.train = true;
        opt.dropout_rng = &rng;
        if (schedule.teacher_forcing < 1.0) {
          mixed = sampled_inputs(model, ex, schedule.teacher_forcing, rng);
          opt.decoder_inputs = &mixed;
        }
        Tape tape;
        const CascadeGraph g = build_cascade(tape, &model.params, model, ex, opt);
        check_finite(tape.value(g.global_loss)(0, 0), epoch, "training loss");
        sums.add(tape, g, order);
        tape.backward(g.global_loss);
      }
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (Tensor &t : model.params.tensors()) t.grad *= inv;
      check_finite(clip(model.params, schedule.clip_norm), epoch, "gradient norm");
      adam.step(model.params);
    }

    EpochLog entry = sums.mean(epoch, order);
    if (!dev_set.empty()) {
      entry.dev_loss = evaluate_loss(model, dev_set).global_loss;
      check_finite(*entry.dev_loss, epoch, "dev loss");
    }
    log.epochs.push_back(entry);

    if (score(entry) < best_score) {
      best_score = score(entry);
      best = model.params;
      log.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (on_epoch && on_epoch(entry, model)) {
      log.stopped_by_callback = true;
      break;
    }
    if (schedule.patience > 0 && since_best >= schedule.patience) {
      log.early_stopped = true;
      break;
    }
  }
  // A callback stop keeps the parameters it inspected.
  if (!log.stopped_by_callback) model.params = std::move(best);
  return log;
}

}  // namespace tarc::nn
