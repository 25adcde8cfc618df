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

#ifndef TARC_DATASET_H_
#define TARC_DATASET_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tarc/corpus.h"
#include "tarc/vocab.h"

namespace tarc {

enum class InputMode {
  kArabizi,  // surface characters in, all five levels out
  kAr,       // gold CODA in, no CODA decoder
};

std::string_view input_mode_name(InputMode mode);
std::optional<InputMode> parse_input_mode(std::string_view name);

// Vocabulary the encoder reads in a given mode.
Stream input_stream(InputMode mode);

using TargetStreams = std::array<std::optional<std::vector<int>>, kNumLevels>;

struct EncodedExample {
  std::string sentence_id;
  size_t token_count = 0;
  // BOS, symbols of token 1, TOKSEP, ..., symbols of token n, EOS.
  std::vector<int> input;
  // Same framing per level. nullopt: level not produced in this mode. A
  // stream made only of PAD marks a level without gold on every token.
  TargetStreams targets;
};

std::vector<int> encode_input(const Sentence &sentence, const Vocabularies &vocabs,
                              InputMode mode);
EncodedExample encode_sentence(const Sentence &sentence, const Vocabularies &vocabs,
                               InputMode mode);
std::vector<EncodedExample> encode_corpus(const Corpus &corpus,
                                          const Vocabularies &vocabs,
                                          InputMode mode);

// Greedy partition: a block closes once it reaches target_tokens.
std::vector<CorpusBlock> split_blocks(const Corpus &corpus, size_t target_tokens);

enum class SplitMode { kGlobal, kGenre };

struct SplitSpec {
  double train = 0.70;
  double dev = 0.15;
  double test = 0.15;
  SplitMode mode = SplitMode::kGenre;
  uint64_t seed = 1;

  void validate() const;
};

struct Splits {
  Corpus train;
  Corpus dev;
  Corpus test;
};

Splits make_splits(const Corpus &corpus, const SplitSpec &spec);

// One sentence id per line.
std::string format_manifest(const Corpus &part);
// Selects sentences by id, in manifest order.
Corpus select_manifest(const Corpus &corpus, std::string_view manifest);

// Levels carrying at least one non-empty cell.
std::array<bool, kNumLevels> annotation_schema(const Corpus &corpus);

Corpus concat_corpora(const Corpus &aux, const Corpus &primary);

// Groups example indices into batches of similar input length; batch order
// is shuffled with the seed.
std::vector<std::vector<size_t>> make_batches(const std::vector<EncodedExample> &examples,
                                              size_t batch_size, uint64_t seed);

}  // namespace tarc

#endif  // TARC_DATASET_H_
