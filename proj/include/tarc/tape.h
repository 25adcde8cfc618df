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

#ifndef TARC_TAPE_H_
#define TARC_TAPE_H_

#include <Eigen/Dense>

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tarc/rng.h"

namespace tarc::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

enum class TensorKind {
  kWeight,     // dense projection, Xavier-initialized
  kEmbedding,  // lookup table, Xavier-initialized
  kBias,       // zero-initialized
  kGain,       // layer-norm scale, one-initialized
};

struct Tensor {
  std::string name;
  TensorKind kind = TensorKind::kWeight;
  Matrix value;
  Matrix grad;
};

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  bool valid() const { return id_ >= 0; }
  int id() const { return id_; }

 private:
  friend class Tape;
  explicit Var(int id) : id_(id) {}
  int id_ = -1;
};

// Reverse-mode differentiation over row-major matrices. Rows are time steps,
// columns are features. A tape built with record=false only evaluates.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var constant(Matrix value);
  // Gradients reaching this node are added to tensor.grad on backward().
  Var param(Tensor &tensor);
  // References tensor.value without copying; no gradient.
  Var fixed(const Tensor &tensor);

  const Matrix &value(Var v) const {
    const Node &n = nodes_[static_cast<size_t>(v.id_)];
    return n.ref != nullptr ? *n.ref : n.value;
  }
  const Matrix &grad(Var v) const { return nodes_[static_cast<size_t>(v.id_)].grad; }
  size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  // a * b^T
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  // a + row, row broadcast over every row of a.
  Var add_row(Var a, Var row);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var relu(Var a);
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var a, int begin, int count);
  // Row-wise softmax; with causal=true entry (i, j) is masked for j > i.
  Var softmax_rows(Var a, bool causal = false);
  Var layer_norm(Var a, Var gain, Var bias, double eps = 1e-5);
  // Rows of table selected by ids.
  Var embed(Var table, std::span<const int> ids);
  // Inverted dropout; identity when rate is 0.
  Var dropout(Var a, double rate, Rng &rng);

  // Single-layer LSTM over all rows of xw (T x 4H, input projection and bias
  // already applied). Gate layout [input, forget, cell, output]. h0 and c0
  // are 1 x H. Returns the T x H hidden states in input order; with reverse
  // the recurrence runs from the last row to the first. When final_cell is
  // non-null it receives the cell state after the last processed step.
  Var lstm(Var xw, Var w_hh, Var h0, Var c0, bool reverse,
           Matrix *final_cell = nullptr);

  // Mean over non-pad rows of -log softmax(logits)[row, target]. 1 x 1; zero
  // when every target is pad.
  Var cross_entropy(Var logits, std::span<const int> targets, int pad);
  // Mean over rows of -sum_j p_ij log softmax(logits)_ij.
  Var soft_cross_entropy(Var logits, const Matrix &target_probs);
  // Sum of 1 x 1 values, accumulated left to right.
  Var sum(std::span<const Var> scalars);

  void backward(Var root);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Tensor *param = nullptr;
    const Matrix *ref = nullptr;
    std::function<void(Tape &)> back;
  };

  Var push(Matrix value, bool needs_grad, std::function<void(Tape &)> back = {});
  // Id the next pushed node will get; ops capture it for their backward.
  Var next() const { return Var(static_cast<int>(nodes_.size())); }
  bool needs(Var v) const { return nodes_[static_cast<size_t>(v.id_)].needs_grad; }
  Matrix &grad_ref(Var v);
  Node &node(Var v) { return nodes_[static_cast<size_t>(v.id_)]; }

  bool record_;
  // deque: references returned by value() survive later pushes.
  std::deque<Node> nodes_;
  std::unordered_map<const Tensor *, int> params_;
};

// One LSTM step shared by the tape op and incremental decoding. gates holds
// the pre-activations (1 x 4H) and is overwritten with activations.
void lstm_cell(Eigen::Ref<RowVector> gates, const RowVector &c_prev, RowVector &h,
               RowVector &c);

void softmax_inplace(Eigen::Ref<RowVector> row);

}  // namespace tarc::nn

#endif  // TARC_TAPE_H_
