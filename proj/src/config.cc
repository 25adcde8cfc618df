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

#include "tarc/config.h"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "tarc/error.h"

namespace tarc {

namespace {

[[noreturn]] void bad(const std::string &what) { throw Error(ErrorCode::kInvalidConfig, what); }

// Field reader that rejects keys nobody asked for.
class Fields {
 public:
  Fields(const Json &doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc.is_object()) bad(where_ + ": expected an object");
  }

  void done() const {
    for (const auto &item : doc_.items()) {
      if (!seen_.count(item.key())) bad(where_ + ": unknown key '" + item.key() + "'");
    }
  }

  const Json *get(const std::string &key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  template <typename T>
  void number(const std::string &key, T &out) {
    const Json *v = get(key);
    if (v == nullptr) return;
    if (!v->is_number()) bad(where_ + "." + key + ": expected a number");
    if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer()) bad(where_ + "." + key + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0) {
          bad(where_ + "." + key + ": expected a non-negative integer");
        }
      }
    }
    out = v->get<T>();
  }

  std::optional<std::string> text(const std::string &key) {
    const Json *v = get(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) bad(where_ + "." + key + ": expected a string");
    return v->get<std::string>();
  }

  const std::string &where() const { return where_; }

 private:
  const Json &doc_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

Json model_config_to_json(const nn::ModelConfig &c) {
  Json order = Json::array();
  for (Level level : c.decoder_order) order.push_back(std::string(level_name(level)));
  return Json{{"backbone", std::string(nn::backbone_name(c.backbone))},
              {"embedding_size", c.embedding_size},
              {"hidden_size", c.hidden_size},
              {"encoder_layers", c.encoder_layers},
              {"decoder_layers", c.decoder_layers},
              {"heads", c.heads},
              {"ffn_size", c.ffn_size},
              {"input_mode", std::string(input_mode_name(c.input_mode))},
              {"decoder_order", order},
              {"dropout", c.dropout},
              {"seed", c.seed},
              {"init", std::string(nn::init_scheme_name(c.init))}};
}

nn::ModelConfig model_config_from_json(const Json &doc) {
  nn::ModelConfig c;
  {
    Fields f(doc, "model");
    if (auto v = f.text("backbone")) {
      auto b = nn::parse_backbone(*v);
      if (!b) bad("model.backbone: unknown backbone '" + *v + "'");
      c.backbone = *b;
    }
    f.number("embedding_size", c.embedding_size);
    f.number("hidden_size", c.hidden_size);
    f.number("encoder_layers", c.encoder_layers);
    f.number("decoder_layers", c.decoder_layers);
    f.number("heads", c.heads);
    f.number("ffn_size", c.ffn_size);
    if (auto v = f.text("input_mode")) {
      auto m = parse_input_mode(*v);
      if (!m) bad("model.input_mode: unknown mode '" + *v + "'");
      c.input_mode = *m;
    }
    c.decoder_order = nn::default_decoder_order(c.input_mode);
    if (const Json *v = f.get("decoder_order")) {
      if (!v->is_array()) bad("model.decoder_order: expected an array");
      c.decoder_order.clear();
      for (const Json &item : *v) {
        if (!item.is_string()) bad("model.decoder_order: expected task names");
        auto level = parse_level(item.get<std::string>());
        if (!level) bad("model.decoder_order: unknown task '" + item.get<std::string>() + "'");
        c.decoder_order.push_back(*level);
      }
    }
    f.number("dropout", c.dropout);
    f.number("seed", c.seed);
    if (auto v = f.text("init")) {
      auto s = nn::parse_init_scheme(*v);
      if (!s) bad("model.init: unknown scheme '" + *v + "'");
      c.init = *s;
    }
    f.done();
  }
  c.validate();
  return c;
}

Json schedule_to_json(const nn::TrainSchedule &s) {
  return Json{{"learning_rate", s.learning_rate}, {"beta1", s.beta1},
              {"beta2", s.beta2},                 {"adam_epsilon", s.adam_epsilon},
              {"clip_norm", s.clip_norm},         {"epochs", s.epochs},
              {"patience", s.patience},           {"batch_size", s.batch_size},
              {"teacher_forcing", s.teacher_forcing}, {"seed", s.seed}};
}

nn::TrainSchedule schedule_from_json(const Json &doc) {
  nn::TrainSchedule s;
  {
    Fields f(doc, "schedule");
    f.number("learning_rate", s.learning_rate);
    f.number("beta1", s.beta1);
    f.number("beta2", s.beta2);
    f.number("adam_epsilon", s.adam_epsilon);
    f.number("clip_norm", s.clip_norm);
    f.number("epochs", s.epochs);
    f.number("patience", s.patience);
    f.number("batch_size", s.batch_size);
    f.number("teacher_forcing", s.teacher_forcing);
    f.number("seed", s.seed);
    f.done();
  }
  s.validate();
  return s;
}

Json split_spec_to_json(const SplitSpec &s) {
  return Json{{"mode", s.mode == SplitMode::kGenre ? "genre" : "global"},
              {"ratios", Json::array({s.train, s.dev, s.test})},
              {"seed", s.seed}};
}

SplitSpec split_spec_from_json(const Json &doc) {
  SplitSpec s;
  {
    Fields f(doc, "split");
    if (auto v = f.text("mode")) {
      if (*v == "genre") {
        s.mode = SplitMode::kGenre;
      } else if (*v == "global") {
        s.mode = SplitMode::kGlobal;
      } else {
        bad("split.mode: expected 'genre' or 'global'");
      }
    }
    if (const Json *v = f.get("ratios")) {
      if (!v->is_array() || v->size() != 3) bad("split.ratios: expected three numbers");
      for (const Json &r : *v) {
        if (!r.is_number()) bad("split.ratios: expected three numbers");
      }
      s.train = (*v)[0].get<double>();
      s.dev = (*v)[1].get<double>();
      s.test = (*v)[2].get<double>();
    }
    f.number("seed", s.seed);
    f.done();
  }
  try {
    s.validate();
  } catch (const Error &e) {
    bad("split: " + e.detail());
  }
  return s;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error &e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
}

Json read_json_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

}  // namespace tarc
