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

#include "tarc/model.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "tarc/error.h"
#include "tarc/rng.h"

namespace tarc::nn {

std::string_view backbone_name(Backbone backbone) {
  return backbone == Backbone::kRecurrent ? "recurrent" : "self_attention";
}

std::optional<Backbone> parse_backbone(std::string_view name) {
  if (name == "recurrent" || name == "lstm") return Backbone::kRecurrent;
  if (name == "self_attention" || name == "transformer") return Backbone::kSelfAttention;
  return std::nullopt;
}

std::string_view init_scheme_name(InitScheme scheme) {
  return scheme == InitScheme::kXavier ? "xavier" : "baseline_default";
}

std::optional<InitScheme> parse_init_scheme(std::string_view name) {
  if (name == "xavier") return InitScheme::kXavier;
  if (name == "baseline_default") return InitScheme::kBaselineDefault;
  return std::nullopt;
}

std::vector<Level> default_decoder_order(InputMode mode) {
  if (mode == InputMode::kAr) {
    return {Level::kClass, Level::kLemma, Level::kTokenization, Level::kPos};
  }
  return {Level::kClass, Level::kLemma, Level::kCoda, Level::kTokenization, Level::kPos};
}

void ModelConfig::validate() const {
  auto fail = [](const std::string &what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (embedding_size <= 0 || hidden_size <= 0) fail("layer sizes must be positive");
  if (encoder_layers <= 0 || decoder_layers <= 0) fail("layer counts must be positive");
  if (backbone == Backbone::kRecurrent && hidden_size % 2 != 0) {
    fail("recurrent hidden size must be even (two encoder directions)");
  }
  if (backbone == Backbone::kSelfAttention && (heads <= 0 || hidden_size % heads != 0)) {
    fail("hidden size must be a multiple of the head count");
  }
  if (ffn_size < 0) fail("ffn size must not be negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (decoder_order.empty()) fail("decoder order is empty");
  std::set<Level> seen;
  for (Level level : decoder_order) {
    if (!seen.insert(level).second) {
      fail("decoder order repeats " + std::string(level_name(level)));
    }
    if (level == Level::kCoda && input_mode == InputMode::kAr) {
      fail("ar decoder is not available with ar input");
    }
  }
  if (seen.count(Level::kClass) != 0 && decoder_order.front() != Level::kClass) {
    fail("cl must be the first decoder");
  }
}

Tensor &Parameters::add(std::string name, TensorKind kind, int rows, int cols) {
  if (index_.count(name) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate tensor " + name);
  }
  index_.emplace(name, tensors_.size());
  Tensor t;
  t.name = std::move(name);
  t.kind = kind;
  t.value = Matrix::Zero(rows, cols);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

const Tensor *Parameters::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &tensors_[it->second];
}

Tensor &Parameters::get(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotFound, "no tensor named " + std::string(name));
  }
  return tensors_[it->second];
}

const Tensor &Parameters::get(std::string_view name) const {
  return const_cast<Parameters *>(this)->get(name);
}

size_t Parameters::count() const {
  size_t n = 0;
  for (const Tensor &t : tensors_) n += static_cast<size_t>(t.value.size());
  return n;
}

void Parameters::zero_grad() {
  for (Tensor &t : tensors_) {
    if (t.grad.size() == 0) {
      t.grad = Matrix::Zero(t.value.rows(), t.value.cols());
    } else {
      t.grad.setZero();
    }
  }
}

double xavier_limit(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

namespace {

std::string task_prefix(Level task) { return "decoder." + std::string(level_name(task)); }

void add_linear(Parameters &p, const std::string &prefix, int in, int out) {
  p.add(prefix + ".w", TensorKind::kWeight, in, out);
  p.add(prefix + ".b", TensorKind::kBias, 1, out);
}

void add_lstm(Parameters &p, const std::string &prefix, int in, int hidden) {
  p.add(prefix + ".w_ih", TensorKind::kWeight, in, 4 * hidden);
  p.add(prefix + ".w_hh", TensorKind::kWeight, hidden, 4 * hidden);
  p.add(prefix + ".b", TensorKind::kBias, 1, 4 * hidden);
}

void add_layer_norm(Parameters &p, const std::string &prefix, int size) {
  p.add(prefix + ".gain", TensorKind::kGain, 1, size);
  p.add(prefix + ".bias", TensorKind::kBias, 1, size);
}

void add_self_attention_layer(Parameters &p, const std::string &prefix, int hidden,
                              int ffn) {
  for (const char *name : {"q", "k", "v", "o"}) {
    add_linear(p, prefix + ".attn." + name, hidden, hidden);
  }
  add_layer_norm(p, prefix + ".ln1", hidden);
  add_linear(p, prefix + ".ffn1", hidden, ffn);
  add_linear(p, prefix + ".ffn2", ffn, hidden);
  add_layer_norm(p, prefix + ".ln2", hidden);
}

int task_vocab_size(const Vocabularies &vocabs, Level task) {
  return static_cast<int>(vocabs.get(stream_for(task)).size());
}

void fill(Tensor &t, InitScheme scheme, Rng &rng) {
  const int rows = static_cast<int>(t.value.rows());
  const int cols = static_cast<int>(t.value.cols());
  switch (t.kind) {
    case TensorKind::kBias:
      t.value.setZero();
      return;
    case TensorKind::kGain:
      t.value.setOnes();
      return;
    case TensorKind::kEmbedding:
      if (scheme == InitScheme::kBaselineDefault) {
        for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] = rng.normal();
        return;
      }
      break;
    case TensorKind::kWeight:
      break;
  }
  // Rows are the input side of x * W.
  const double limit = scheme == InitScheme::kXavier
                           ? xavier_limit(rows, cols)
                           : 1.0 / std::sqrt(static_cast<double>(rows));
  for (Eigen::Index i = 0; i < t.value.size(); ++i) {
    t.value.data()[i] = rng.uniform(-limit, limit);
  }
}

}  // namespace

Parameters init_params(const ModelConfig &config, const Vocabularies &vocabs) {
  config.validate();
  Parameters p;
  const int e = config.embedding_size;
  const int h = config.hidden_size;
  const int in_vocab = static_cast<int>(vocabs.get(input_stream(config.input_mode)).size());
  p.add("encoder.embed", TensorKind::kEmbedding, in_vocab, e);
  if (config.backbone == Backbone::kRecurrent) {
    for (int l = 0; l < config.encoder_layers; ++l) {
      const int in = l == 0 ? e : h;
      const std::string prefix = "encoder.l" + std::to_string(l);
      add_lstm(p, prefix + ".fw", in, h / 2);
      add_lstm(p, prefix + ".bw", in, h / 2);
    }
  } else {
    add_linear(p, "encoder.proj", e, h);
    for (int l = 0; l < config.encoder_layers; ++l) {
      add_self_attention_layer(p, "encoder.l" + std::to_string(l), h, config.ffn_width());
    }
  }
  for (size_t pos = 0; pos < config.decoder_order.size(); ++pos) {
    const Level task = config.decoder_order[pos];
    const std::string prefix = task_prefix(task);
    const int vocab = task_vocab_size(vocabs, task);
    p.add(prefix + ".embed", TensorKind::kEmbedding, vocab, e);
    if (config.backbone == Backbone::kRecurrent) {
      for (int l = 0; l < config.decoder_layers; ++l) {
        add_lstm(p, prefix + ".l" + std::to_string(l), l == 0 ? e : h, h);
      }
    } else {
      add_linear(p, prefix + ".proj", e, h);
      for (int l = 0; l < config.decoder_layers; ++l) {
        add_self_attention_layer(p, prefix + ".l" + std::to_string(l), h,
                                 config.ffn_width());
      }
    }
    for (size_t j = 0; j <= pos; ++j) {
      p.add(prefix + ".attn." + std::to_string(j) + ".query", TensorKind::kWeight, h, h);
    }
    add_linear(p, prefix + ".fuse", static_cast<int>(pos + 2) * h, h);
    add_linear(p, prefix + ".out", h, vocab);
  }
  Rng rng(config.seed);
  for (Tensor &t : p.tensors()) fill(t, config.init, rng);
  return p;
}

Model make_model(const ModelConfig &config, const Vocabularies &vocabs) {
  Model m;
  m.config = config;
  m.vocabs = vocabs;
  m.params = init_params(config, vocabs);
  return m;
}

std::vector<std::string> attention_sources(const ModelConfig &config, Level task) {
  std::vector<std::string> out{"encoder"};
  for (Level level : config.decoder_order) {
    if (level == task) return out;
    out.emplace_back(level_name(level));
  }
  throw Error(ErrorCode::kInvalidArgument,
              "task " + std::string(level_name(task)) + " is not enabled");
}

size_t attention_bank_size(const Parameters &params, Level task) {
  const std::string prefix = task_prefix(task) + ".attn.";
  size_t n = 0;
  for (const Tensor &t : params.tensors()) {
    if (t.name.starts_with(prefix) && t.name.ends_with(".query")) ++n;
  }
  return n;
}

const TaskOutput *CascadeOutput::find(Level task) const {
  for (const TaskOutput &t : tasks) {
    if (t.task == task) return &t;
  }
  return nullptr;
}

size_t free_length_cap(const EncodedExample &example) { return 3 * example.input.size(); }

namespace {

Matrix positions(Eigen::Index rows, Eigen::Index cols, Eigen::Index offset = 0) {
  Matrix pe(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double pos = static_cast<double>(r + offset);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double rate =
          std::pow(10000.0, static_cast<double>(c - c % 2) / static_cast<double>(cols));
      pe(r, c) = c % 2 == 0 ? std::sin(pos / rate) : std::cos(pos / rate);
    }
  }
  return pe;
}

// Teacher-forced graph construction.
class Builder {
 public:
  Builder(Tape &tape, Parameters *trainable, const Model &model, const GraphOptions &opt)
      : tape_(tape), trainable_(trainable), model_(model), cfg_(model.config), opt_(opt) {}

  Var p(const std::string &name) {
    if (trainable_ != nullptr) return tape_.param(trainable_->get(name));
    return tape_.fixed(model_.params.get(name));
  }

  Var drop(Var x) {
    if (!opt_.train || opt_.dropout_rng == nullptr || cfg_.dropout <= 0.0) return x;
    return tape_.dropout(x, cfg_.dropout, *opt_.dropout_rng);
  }

  Var linear(Var x, const std::string &prefix) {
    return tape_.add_row(tape_.matmul(x, p(prefix + ".w")), p(prefix + ".b"));
  }

  Var lstm(Var x, const std::string &prefix, int hidden, bool reverse) {
    Var xw = tape_.add_row(tape_.matmul(x, p(prefix + ".w_ih")), p(prefix + ".b"));
    Var zero = tape_.constant(Matrix::Zero(1, hidden));
    return tape_.lstm(xw, p(prefix + ".w_hh"), zero, zero, reverse);
  }

  Var self_attention(Var x, const std::string &prefix, bool causal) {
    const int h = cfg_.hidden_size;
    const int heads = cfg_.heads;
    const int d = h / heads;
    Var q = linear(x, prefix + ".attn.q");
    Var k = linear(x, prefix + ".attn.k");
    Var v = linear(x, prefix + ".attn.v");
    std::vector<Var> ctx;
    for (int i = 0; i < heads; ++i) {
      Var qh = heads == 1 ? q : tape_.slice_cols(q, i * d, d);
      Var kh = heads == 1 ? k : tape_.slice_cols(k, i * d, d);
      Var vh = heads == 1 ? v : tape_.slice_cols(v, i * d, d);
      Var scores = tape_.scale(tape_.matmul_nt(qh, kh), 1.0 / std::sqrt(double(d)));
      ctx.push_back(tape_.matmul(tape_.softmax_rows(scores, causal), vh));
    }
    Var c = heads == 1 ? ctx[0] : tape_.concat_cols(ctx);
    Var a = drop(linear(c, prefix + ".attn.o"));
    Var x1 = tape_.layer_norm(tape_.add(x, a), p(prefix + ".ln1.gain"), p(prefix + ".ln1.bias"));
    Var f = drop(linear(tape_.relu(linear(x1, prefix + ".ffn1")), prefix + ".ffn2"));
    return tape_.layer_norm(tape_.add(x1, f), p(prefix + ".ln2.gain"), p(prefix + ".ln2.bias"));
  }

  Var project_with_positions(Var emb, const std::string &prefix) {
    Var x = linear(emb, prefix + ".proj");
    const Matrix &xv = tape_.value(x);
    return tape_.add(x, tape_.constant(positions(xv.rows(), xv.cols())));
  }

  Var encoder(const std::vector<int> &input) {
    Var x = drop(tape_.embed(p("encoder.embed"), input));
    if (cfg_.backbone == Backbone::kRecurrent) {
      for (int l = 0; l < cfg_.encoder_layers; ++l) {
        const std::string prefix = "encoder.l" + std::to_string(l);
        const int half = cfg_.hidden_size / 2;
        std::array<Var, 2> dirs{lstm(x, prefix + ".fw", half, false),
                                lstm(x, prefix + ".bw", half, true)};
        x = tape_.concat_cols(dirs);
        if (l + 1 < cfg_.encoder_layers) x = drop(x);
      }
      return x;
    }
    x = project_with_positions(x, "encoder");
    for (int l = 0; l < cfg_.encoder_layers; ++l) {
      x = self_attention(x, "encoder.l" + std::to_string(l), false);
    }
    return x;
  }

  struct Decoded {
    Var states;
    Var logits;
    std::vector<Var> attention;
  };

  Decoded decoder(Level task, const std::vector<int> &inputs, const std::vector<Var> &sources) {
    const std::string prefix = task_prefix(task);
    const int h = cfg_.hidden_size;
    Var x = drop(tape_.embed(p(prefix + ".embed"), inputs));
    if (cfg_.backbone == Backbone::kRecurrent) {
      for (int l = 0; l < cfg_.decoder_layers; ++l) {
        x = lstm(x, prefix + ".l" + std::to_string(l), h, false);
        if (l + 1 < cfg_.decoder_layers) x = drop(x);
      }
    } else {
      x = project_with_positions(x, prefix);
      for (int l = 0; l < cfg_.decoder_layers; ++l) {
        x = self_attention(x, prefix + ".l" + std::to_string(l), true);
      }
    }
    Decoded out;
    std::vector<Var> parts{x};
    const double scale = 1.0 / std::sqrt(static_cast<double>(h));
    for (size_t j = 0; j < sources.size(); ++j) {
      Var q = tape_.matmul(x, p(prefix + ".attn." + std::to_string(j) + ".query"));
      Var a = tape_.softmax_rows(tape_.scale(tape_.matmul_nt(q, sources[j]), scale));
      out.attention.push_back(a);
      parts.push_back(tape_.matmul(a, sources[j]));
    }
    out.states = tape_.tanh(linear(tape_.concat_cols(parts), prefix + ".fuse"));
    out.logits = linear(drop(out.states), prefix + ".out");
    return out;
  }

 private:
  Tape &tape_;
  Parameters *trainable_;
  const Model &model_;
  const ModelConfig &cfg_;
  const GraphOptions &opt_;
};

const std::vector<int> &task_target(const EncodedExample &example, Level task) {
  const auto &t = example.targets[level_index(task)];
  if (!t.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "example " + example.sentence_id +
                                                 " has no " + std::string(level_name(task)) +
                                                 " stream");
  }
  if (t->size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "target stream shorter than BOS EOS");
  }
  return *t;
}

int argmax(const RowVector &row) {
  int best = 0;
  for (Eigen::Index i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = static_cast<int>(i);
  }
  return best;
}

// Plain-matrix evaluation used by incremental decoding.
struct Weights {
  const Parameters &params;
  const Matrix &operator()(const std::string &name) const { return params.get(name).value; }

  RowVector linear(const RowVector &x, const std::string &prefix) const {
    RowVector y = x * (*this)(prefix + ".w");
    y += (*this)(prefix + ".b");
    return y;
  }

  RowVector layer_norm(const RowVector &x, const std::string &prefix) const {
    const double mu = x.mean();
    const double var = (x.array() - mu).square().mean();
    RowVector y = (x.array() - mu) / std::sqrt(var + 1e-5);
    y.array() *= (*this)(prefix + ".gain").row(0).array();
    y += (*this)(prefix + ".bias");
    return y;
  }
};

struct KvCache {
  Matrix k;
  Matrix v;
};

RowVector self_attention_step(const Weights &w, const std::string &prefix, int heads,
                              const RowVector &x, KvCache &cache, Eigen::Index t) {
  const Eigen::Index h = x.size();
  const Eigen::Index d = h / heads;
  if (cache.k.rows() <= t) {
    const Eigen::Index rows = std::max<Eigen::Index>(2 * (t + 1), 16);
    cache.k.conservativeResize(rows, h);
    cache.v.conservativeResize(rows, h);
  }
  const RowVector q = w.linear(x, prefix + ".attn.q");
  cache.k.row(t) = w.linear(x, prefix + ".attn.k");
  cache.v.row(t) = w.linear(x, prefix + ".attn.v");
  RowVector ctx(h);
  for (int i = 0; i < heads; ++i) {
    RowVector scores = q.segment(i * d, d) * cache.k.block(0, i * d, t + 1, d).transpose();
    scores /= std::sqrt(static_cast<double>(d));
    softmax_inplace(scores);
    ctx.segment(i * d, d) = scores * cache.v.block(0, i * d, t + 1, d);
  }
  const RowVector x1 = w.layer_norm(x + w.linear(ctx, prefix + ".attn.o"), prefix + ".ln1");
  const RowVector f =
      w.linear(w.linear(x1, prefix + ".ffn1").cwiseMax(0.0), prefix + ".ffn2");
  return w.layer_norm(x1 + f, prefix + ".ln2");
}

TaskOutput decode_free(const Model &model, Level task, const std::vector<Matrix> &sources,
                       size_t cap, const std::vector<int> *forced) {
  const ModelConfig &cfg = model.config;
  const Weights w{model.params};
  const std::string prefix = task_prefix(task);
  const int h = cfg.hidden_size;
  const Matrix &embed = w(prefix + ".embed");
  const double scale = 1.0 / std::sqrt(static_cast<double>(h));

  std::vector<RowVector> hs(cfg.decoder_layers, RowVector::Zero(h));
  std::vector<RowVector> cs(cfg.decoder_layers, RowVector::Zero(h));
  std::vector<KvCache> caches(cfg.decoder_layers);

  const size_t steps = forced != nullptr ? forced->size() - 1 : cap;
  std::vector<RowVector> dist_rows, state_rows;
  std::vector<std::vector<RowVector>> attn_rows(sources.size());
  TaskOutput out;
  out.task = task;
  int symbol = kBos;
  for (size_t t = 0; t < steps; ++t) {
    const int in = forced != nullptr ? (*forced)[t] : symbol;
    RowVector x = embed.row(in);
    if (cfg.backbone == Backbone::kRecurrent) {
      for (int l = 0; l < cfg.decoder_layers; ++l) {
        const std::string lp = prefix + ".l" + std::to_string(l);
        RowVector pre = x * w(lp + ".w_ih");
        pre += w(lp + ".b");
        pre.noalias() += hs[l] * w(lp + ".w_hh");
        RowVector hn, cn;
        lstm_cell(pre, cs[l], hn, cn);
        hs[l] = hn;
        cs[l] = cn;
        x = hn;
      }
    } else {
      x = w.linear(x, prefix + ".proj") + positions(1, h, static_cast<Eigen::Index>(t));
      for (int l = 0; l < cfg.decoder_layers; ++l) {
        x = self_attention_step(w, prefix + ".l" + std::to_string(l), cfg.heads, x, caches[l],
                                static_cast<Eigen::Index>(t));
      }
    }
    RowVector fused_in(static_cast<Eigen::Index>(h * (sources.size() + 1)));
    fused_in.head(h) = x;
    for (size_t j = 0; j < sources.size(); ++j) {
      RowVector scores = (x * w(prefix + ".attn." + std::to_string(j) + ".query")) *
                         sources[j].transpose();
      scores *= scale;
      softmax_inplace(scores);
      fused_in.segment(static_cast<Eigen::Index>(h * (j + 1)), h) = scores * sources[j];
      attn_rows[j].push_back(std::move(scores));
    }
    RowVector state = w.linear(fused_in, prefix + ".fuse").array().tanh().matrix();
    RowVector probs = w.linear(state, prefix + ".out");
    softmax_inplace(probs);
    symbol = argmax(probs);
    out.symbols.push_back(symbol);
    dist_rows.push_back(std::move(probs));
    state_rows.push_back(std::move(state));
    if (forced == nullptr && symbol == kEos) break;
  }
  if (forced == nullptr && (out.symbols.empty() || out.symbols.back() != kEos)) {
    out.length_cap_hit = true;
  }
  auto stack = [](const std::vector<RowVector> &rows, Eigen::Index cols) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
    for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
    return m;
  };
  out.distributions = stack(dist_rows, embed.rows());
  out.states = stack(state_rows, h);
  for (size_t j = 0; j < sources.size(); ++j) {
    out.attention.push_back(stack(attn_rows[j], sources[j].rows()));
  }
  return out;
}

}  // namespace

CascadeGraph build_cascade(Tape &tape, Parameters *trainable, const Model &model,
                           const EncodedExample &example, const GraphOptions &options) {
  Builder b(tape, trainable, model, options);
  CascadeGraph g;
  g.encoder_states = b.encoder(example.input);
  std::vector<Var> sources{g.encoder_states};
  std::vector<Var> losses;
  for (Level task : model.config.decoder_order) {
    const std::vector<int> &target = task_target(example, task);
    std::vector<int> inputs(target.begin(), target.end() - 1);
    if (options.decoder_inputs != nullptr) {
      const auto &override_inputs = (*options.decoder_inputs)[level_index(task)];
      if (override_inputs.has_value()) {
        if (override_inputs->size() + 1 != target.size()) {
          throw Error(ErrorCode::kInvalidArgument, "decoder input length mismatch");
        }
        inputs = *override_inputs;
      }
    }
    Builder::Decoded d = b.decoder(task, inputs, sources);
    const std::span<const int> next(target.data() + 1, target.size() - 1);
    Var loss = tape.cross_entropy(d.logits, next, kPad);
    g.task_loss[level_index(task)] = loss;
    losses.push_back(loss);
    g.states.push_back(d.states);
    g.logits.push_back(d.logits);
    g.attention.push_back(std::move(d.attention));
    sources.push_back(d.states);
  }
  g.global_loss = tape.sum(losses);
  return g;
}

CascadeOutput forward_cascade(const Model &model, const EncodedExample &example,
                              DecodeMode mode, const TargetStreams *forced_inputs) {
  CascadeOutput out;
  if (mode == DecodeMode::kTeacherForced) {
    Tape tape(false);
    const CascadeGraph g = build_cascade(tape, nullptr, model, example, GraphOptions{});
    out.encoder_states = tape.value(g.encoder_states);
    for (size_t i = 0; i < model.config.decoder_order.size(); ++i) {
      TaskOutput t;
      t.task = model.config.decoder_order[i];
      t.distributions = tape.value(g.logits[i]);
      for (Eigen::Index r = 0; r < t.distributions.rows(); ++r) {
        softmax_inplace(t.distributions.row(r));
        t.symbols.push_back(argmax(t.distributions.row(r)));
      }
      t.states = tape.value(g.states[i]);
      for (Var a : g.attention[i]) t.attention.push_back(tape.value(a));
      out.tasks.push_back(std::move(t));
    }
    return out;
  }

  {
    Tape tape(false);
    GraphOptions opt;
    Builder b(tape, nullptr, model, opt);
    out.encoder_states = tape.value(b.encoder(example.input));
  }
  std::vector<Matrix> sources{out.encoder_states};
  const size_t cap = free_length_cap(example);
  for (Level task : model.config.decoder_order) {
    const std::vector<int> *forced = nullptr;
    if (forced_inputs != nullptr && (*forced_inputs)[level_index(task)].has_value()) {
      forced = &*(*forced_inputs)[level_index(task)];
    }
    TaskOutput t = decode_free(model, task, sources, cap, forced);
    sources.push_back(t.states);
    out.tasks.push_back(std::move(t));
  }
  return out;
}

}  // namespace tarc::nn
