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

#include "tarc/predict.h"

#include <algorithm>

#include "tarc/error.h"
#include "tarc/utf8.h"

namespace tarc::nn {

std::vector<std::optional<std::string>> split_units(const Vocabulary &vocab,
                                                    std::span<const int> symbols,
                                                    size_t token_count, bool &align_error) {
  std::vector<std::string> raw(1);
  for (int id : symbols) {
    if (id == kEos) break;
    if (id == kTokSep) {
      raw.emplace_back();
    } else if (id >= kNumSpecials) {
      raw.back() += vocab.symbol(id);
    }
  }
  if (raw.size() != token_count) align_error = true;
  std::vector<std::optional<std::string>> units(token_count);
  for (size_t i = 0; i < token_count && i < raw.size(); ++i) {
    if (!raw[i].empty()) units[i] = std::move(raw[i]);
  }
  return units;
}

SentencePrediction predict_sentence(const Model &model, const Sentence &sentence) {
  EncodedExample example;
  example.sentence_id = sentence.id;
  example.token_count = sentence.tokens.size();
  example.input = encode_input(sentence, model.vocabs, model.config.input_mode);
  const CascadeOutput out = forward_cascade(model, example, DecodeMode::kFree);

  SentencePrediction pred;
  for (const TaskOutput &task : out.tasks) {
    const Vocabulary &vocab = model.vocabs.get(stream_for(task.task));
    pred.units[level_index(task.task)] =
        split_units(vocab, task.symbols, sentence.tokens.size(), pred.align_error);
  }
  return pred;
}

namespace {

bool storable(Level level, const std::string &value) {
  if (value.empty() || value == kEmptyValue) return false;
  if (value.find_first_of("\t\n\r") != std::string::npos) return false;
  if (level == Level::kClass) return parse_token_class(value).has_value();
  return true;
}

size_t segments(const std::string &value) {
  return static_cast<size_t>(std::count(value.begin(), value.end(), '+')) + 1;
}

void reconcile(AnnotatedToken &token, const std::array<bool, kNumLevels> &decoded) {
  auto is_free = [&](Level level) { return !token.cell(level).gold(); };
  const std::optional<TokenClass> cls = token.token_class();

  if (cls && *cls != TokenClass::kArabizi) {
    const std::string sentinel(class_name(*cls));
    for (Level level : kAllLevels) {
      if (level == Level::kClass || !is_free(level)) continue;
      if (decoded[level_index(level)] || !token.cell(level).empty()) {
        token.set(level, sentinel, Status::kPredicted);
      }
    }
  } else {
    for (Level level : {Level::kCoda, Level::kTokenization, Level::kPos, Level::kLemma}) {
      if (is_free(level) && !token.cell(level).empty() && is_sentinel(token.value(level))) {
        token.clear(level);
      }
    }
    if (cls && is_free(Level::kCoda) && !token.cell(Level::kCoda).empty() &&
        !utf8::all_arabic_script(token.value(Level::kCoda))) {
      token.clear(Level::kCoda);
    }
    const Cell &pos = token.cell(Level::kPos);
    const Cell &tok = token.cell(Level::kTokenization);
    if (!pos.empty() && !tok.empty() && segments(pos.value) > 1 &&
        segments(pos.value) != segments(tok.value)) {
      token.clear(is_free(Level::kPos) ? Level::kPos : Level::kTokenization);
    }
  }

  // Conflicts with gold cells: drop every prediction on the token.
  ValidationReport report;
  validate_token(token, "", 0, report);
  if (!report.ok()) {
    for (Level level : kAllLevels) {
      if (is_free(level)) token.clear(level);
    }
  }
}

}  // namespace

void apply_prediction(Sentence &sentence, const SentencePrediction &prediction) {
  std::array<bool, kNumLevels> decoded{};
  for (Level level : kAllLevels) {
    decoded[level_index(level)] = prediction.units[level_index(level)].has_value();
  }

  for (size_t i = 0; i < sentence.tokens.size(); ++i) {
    AnnotatedToken &token = sentence.tokens[i];
    for (Level level : kAllLevels) {
      const auto &units = prediction.units[level_index(level)];
      if (!units || token.cell(level).gold()) continue;
      const std::optional<std::string> &unit = (*units)[i];
      if (unit && storable(level, *unit)) {
        token.set(level, *unit, Status::kPredicted);
      } else {
        token.clear(level);
      }
    }
    reconcile(token, decoded);
  }
  sentence.align_error = prediction.align_error;
}

Corpus annotate_corpus(const Model &model, Corpus corpus) {
  for (Sentence &s : corpus.sentences) apply_prediction(s, predict_sentence(model, s));
  return corpus;
}

}  // namespace tarc::nn
