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

#ifndef TARC_MODEL_H_
#define TARC_MODEL_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tarc/corpus.h"
#include "tarc/dataset.h"
#include "tarc/tape.h"
#include "tarc/vocab.h"

namespace tarc::nn {

enum class Backbone { kRecurrent, kSelfAttention };
enum class InitScheme { kXavier, kBaselineDefault };

std::string_view backbone_name(Backbone backbone);
std::optional<Backbone> parse_backbone(std::string_view name);
std::string_view init_scheme_name(InitScheme scheme);
std::optional<InitScheme> parse_init_scheme(std::string_view name);

// cl, lm, ar, tk, pos; ar is dropped when CODA is the input.
std::vector<Level> default_decoder_order(InputMode mode);

struct ModelConfig {
  Backbone backbone = Backbone::kRecurrent;
  int embedding_size = 64;
  int hidden_size = 128;
  int encoder_layers = 2;
  int decoder_layers = 1;
  // Self-attention layers only; the decoder attention bank is single-head.
  int heads = 1;
  // Feed-forward width of self-attention layers; 0 means 4 * hidden_size.
  int ffn_size = 0;
  InputMode input_mode = InputMode::kArabizi;
  std::vector<Level> decoder_order = default_decoder_order(InputMode::kArabizi);
  double dropout = 0.1;
  uint64_t seed = 1;
  InitScheme init = InitScheme::kXavier;

  int ffn_width() const { return ffn_size > 0 ? ffn_size : 4 * hidden_size; }
  // Throws kInvalidConfig.
  void validate() const;
  bool operator==(const ModelConfig &) const = default;
};

// Named tensors in creation order. The tensor list is fixed after init so
// addresses stay valid for tapes built over it.
class Parameters {
 public:
  Tensor &add(std::string name, TensorKind kind, int rows, int cols);
  const Tensor *find(std::string_view name) const;
  Tensor &get(std::string_view name);
  const Tensor &get(std::string_view name) const;

  std::vector<Tensor> &tensors() { return tensors_; }
  const std::vector<Tensor> &tensors() const { return tensors_; }
  size_t count() const;
  void zero_grad();

 private:
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, size_t> index_;
};

double xavier_limit(int fan_in, int fan_out);

Parameters init_params(const ModelConfig &config, const Vocabularies &vocabs);

struct Model {
  ModelConfig config;
  Vocabularies vocabs;
  Parameters params;
};

Model make_model(const ModelConfig &config, const Vocabularies &vocabs);

// Names of the sequences a decoder attends over: "encoder" followed by
// every earlier decoder in cascade order.
std::vector<std::string> attention_sources(const ModelConfig &config, Level task);
// Attention mechanisms actually instantiated for a decoder.
size_t attention_bank_size(const Parameters &params, Level task);

enum class DecodeMode { kTeacherForced, kFree };

struct TaskOutput {
  Level task = Level::kClass;
  // Argmax per step. In FREE mode the generated sequence, ending with EOS
  // unless the length cap was hit.
  std::vector<int> symbols;
  Matrix distributions;  // steps x vocabulary
  Matrix states;         // steps x hidden, visible to later decoders
  std::vector<Matrix> attention;  // one steps x source-length map per source
  bool length_cap_hit = false;
};

struct CascadeOutput {
  Matrix encoder_states;
  std::vector<TaskOutput> tasks;  // cascade order
  const TaskOutput *find(Level task) const;
};

// FREE decoding stops at EOS or after 3 x input length symbols.
size_t free_length_cap(const EncodedExample &example);

// forced_inputs (FREE mode only) replaces argmax feedback with the given
// decoder input streams; used to check incremental decoding against the
// teacher-forced graph.
CascadeOutput forward_cascade(const Model &model, const EncodedExample &example,
                              DecodeMode mode,
                              const TargetStreams *forced_inputs = nullptr);

struct GraphOptions {
  bool train = false;
  Rng *dropout_rng = nullptr;
  // Decoder inputs per level; defaults to the gold targets without EOS.
  const TargetStreams *decoder_inputs = nullptr;
};

struct CascadeGraph {
  Var encoder_states;
  std::vector<Var> states;   // cascade order
  std::vector<Var> logits;   // cascade order
  std::vector<std::vector<Var>> attention;
  std::array<Var, kNumLevels> task_loss;
  Var global_loss;
};

// Teacher-forced graph with per-task losses. Passing a mutable Parameters
// routes gradients into it.
CascadeGraph build_cascade(Tape &tape, Parameters *trainable, const Model &model,
                           const EncodedExample &example, const GraphOptions &options);

}  // namespace tarc::nn

#endif  // TARC_MODEL_H_
