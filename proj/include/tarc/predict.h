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

#ifndef TARC_PREDICT_H_
#define TARC_PREDICT_H_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tarc/corpus.h"
#include "tarc/model.h"

namespace tarc::nn {

struct SentencePrediction {
  // One entry per token for every decoded level; nullopt marks a unit that
  // was missing from the decoder output (or decoded to nothing).
  std::array<std::optional<std::vector<std::optional<std::string>>>, kNumLevels> units;
  bool align_error = false;
};

// Splits decoded symbols on TOKSEP into exactly token_count units. Extra
// units are dropped and missing ones padded with nullopt; either repair sets
// align_error. Decoding stops at the first EOS.
std::vector<std::optional<std::string>> split_units(const Vocabulary &vocab,
                                                    std::span<const int> symbols,
                                                    size_t token_count, bool &align_error);

SentencePrediction predict_sentence(const Model &model, const Sentence &sentence);

// Writes predictions into every non-gold cell as PREDICTED, then reconciles
// the token: a non-arabizi class forces sentinels into non-gold downstream
// cells, and predicted cells that would break a corpus invariant are
// cleared. Gold cells are never modified.
void apply_prediction(Sentence &sentence, const SentencePrediction &prediction);

// predict_sentence + apply_prediction over a corpus.
Corpus annotate_corpus(const Model &model, Corpus corpus);

}  // namespace tarc::nn

#endif  // TARC_PREDICT_H_
