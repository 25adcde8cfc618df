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

#include "tarc/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "tarc/error.h"
#include "tarc/rng.h"
#include "tarc/utf8.h"

namespace tarc {

std::string_view input_mode_name(InputMode mode) {
  return mode == InputMode::kArabizi ? "arabizi" : "ar";
}

std::optional<InputMode> parse_input_mode(std::string_view name) {
  if (name == "arabizi") return InputMode::kArabizi;
  if (name == "ar") return InputMode::kAr;
  return std::nullopt;
}

Stream input_stream(InputMode mode) {
  return mode == InputMode::kArabizi ? Stream::kInputChars : Stream::kCodaChars;
}

std::vector<int> encode_input(const Sentence &sentence, const Vocabularies &vocabs,
                              InputMode mode) {
  const Vocabulary &vocab = vocabs.get(input_stream(mode));
  std::vector<int> input{kBos};
  for (size_t i = 0; i < sentence.tokens.size(); ++i) {
    if (i > 0) input.push_back(kTokSep);
    const AnnotatedToken &t = sentence.tokens[i];
    if (mode == InputMode::kArabizi) {
      for (const std::string &c : utf8::split_chars(t.surface())) {
        input.push_back(vocab.index(c));
      }
      continue;
    }
    if (!t.cell(Level::kCoda).gold()) {
      throw Error(ErrorCode::kMissingGold,
                  "sentence " + sentence.id + " token " + std::to_string(i) +
                      " has no gold CODA for ar input",
                  CellLocation{sentence.id, static_cast<int>(i), "ar"});
    }
    for (const std::string &sym : symbolize(Stream::kCodaChars, t.value(Level::kCoda))) {
      input.push_back(vocab.index(sym));
    }
  }
  input.push_back(kEos);
  return input;
}

EncodedExample encode_sentence(const Sentence &sentence, const Vocabularies &vocabs,
                               InputMode mode) {
  EncodedExample ex;
  ex.sentence_id = sentence.id;
  ex.token_count = sentence.tokens.size();
  ex.input = encode_input(sentence, vocabs, mode);
  for (Level level : kAllLevels) {
    if (mode == InputMode::kAr && level == Level::kCoda) continue;
    const Stream stream = stream_for(level);
    const Vocabulary &vocab = vocabs.get(stream);
    bool complete = true;
    std::vector<int> target{kBos};
    for (size_t i = 0; i < sentence.tokens.size(); ++i) {
      const AnnotatedToken &t = sentence.tokens[i];
      if (!t.cell(level).gold()) {
        complete = false;
        break;
      }
      if (i > 0) target.push_back(kTokSep);
      for (const std::string &sym : symbolize(stream, t.value(level))) {
        target.push_back(vocab.index(sym));
      }
    }
    target.push_back(kEos);
    if (!complete) target.assign(2 * ex.token_count + 1, kPad);
    ex.targets[level_index(level)] = std::move(target);
  }
  return ex;
}

std::vector<EncodedExample> encode_corpus(const Corpus &corpus,
                                          const Vocabularies &vocabs,
                                          InputMode mode) {
  std::vector<EncodedExample> out;
  out.reserve(corpus.sentences.size());
  for (const Sentence &s : corpus.sentences) out.push_back(encode_sentence(s, vocabs, mode));
  return out;
}

std::vector<CorpusBlock> split_blocks(const Corpus &corpus, size_t target_tokens) {
  for (const Sentence &s : corpus.sentences) {
    if (s.tokens.size() > target_tokens) {
      throw Error(ErrorCode::kTargetTooSmall,
                  "sentence " + s.id + " has " + std::to_string(s.tokens.size()) +
                      " tokens, more than the block target " +
                      std::to_string(target_tokens));
    }
  }
  std::vector<CorpusBlock> blocks;
  size_t in_block = 0;
  for (const Sentence &s : corpus.sentences) {
    if (blocks.empty() || in_block >= target_tokens) {
      blocks.push_back(CorpusBlock{static_cast<int>(blocks.size()), {}});
      in_block = 0;
    }
    blocks.back().content.sentences.push_back(s);
    in_block += s.tokens.size();
  }
  return blocks;
}

void SplitSpec::validate() const {
  if (!(train > 0 && dev > 0 && test > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must be positive");
  }
  if (std::abs(train + dev + test - 1.0) >= 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split ratios must sum to 1");
  }
}

namespace {

// floor(ratio * n), robust to ratios such as 0.15 that are not exact in
// binary floating point.
size_t floor_share(double ratio, size_t n) {
  return static_cast<size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

void split_group(const std::vector<const Sentence *> &group, const SplitSpec &spec,
                 Rng &rng, Splits &out) {
  std::vector<const Sentence *> order = group;
  rng.shuffle(order);
  const size_t n = order.size();
  const size_t n_dev = floor_share(spec.dev, n);
  const size_t n_test = floor_share(spec.test, n);
  const size_t n_train = n - n_dev - n_test;
  for (size_t i = 0; i < n; ++i) {
    Corpus &dst = i < n_train ? out.train : (i < n_train + n_dev ? out.dev : out.test);
    dst.sentences.push_back(*order[i]);
  }
}

}  // namespace

Splits make_splits(const Corpus &corpus, const SplitSpec &spec) {
  spec.validate();
  Splits out;
  Rng rng(spec.seed);
  if (spec.mode == SplitMode::kGlobal) {
    std::vector<const Sentence *> all;
    for (const Sentence &s : corpus.sentences) all.push_back(&s);
    split_group(all, spec, rng, out);
    return out;
  }
  for (Genre genre : kAllGenres) {
    std::vector<const Sentence *> group;
    for (const Sentence &s : corpus.sentences) {
      if (s.genre == genre) group.push_back(&s);
    }
    split_group(group, spec, rng, out);
  }
  return out;
}

std::string format_manifest(const Corpus &part) {
  std::string out;
  for (const Sentence &s : part.sentences) out += s.id + "\n";
  return out;
}

Corpus select_manifest(const Corpus &corpus, std::string_view manifest) {
  std::unordered_map<std::string, const Sentence *> by_id;
  for (const Sentence &s : corpus.sentences) by_id.emplace(s.id, &s);
  Corpus out;
  size_t start = 0;
  while (start < manifest.size()) {
    size_t end = manifest.find('\n', start);
    if (end == std::string_view::npos) end = manifest.size();
    const std::string id(manifest.substr(start, end - start));
    start = end + 1;
    if (id.empty()) continue;
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kNotFound, "manifest id '" + id + "' not in corpus");
    }
    out.sentences.push_back(*it->second);
  }
  return out;
}

std::array<bool, kNumLevels> annotation_schema(const Corpus &corpus) {
  std::array<bool, kNumLevels> present{};
  for (const Sentence &s : corpus.sentences) {
    for (const AnnotatedToken &t : s.tokens) {
      for (Level level : kAllLevels) {
        if (!t.cell(level).empty()) present[level_index(level)] = true;
      }
    }
  }
  return present;
}

Corpus concat_corpora(const Corpus &aux, const Corpus &primary) {
  if (!aux.empty() && !primary.empty() &&
      annotation_schema(aux) != annotation_schema(primary)) {
    auto describe = [](const std::array<bool, kNumLevels> &schema) {
      std::string s;
      for (Level level : kAllLevels) {
        if (schema[level_index(level)]) s += std::string(level_name(level)) + " ";
      }
      return s;
    };
    throw Error(ErrorCode::kSchemaMismatch,
                "auxiliary levels {" + describe(annotation_schema(aux)) +
                    "} differ from primary levels {" +
                    describe(annotation_schema(primary)) + "}");
  }
  Corpus out = aux;
  out.sentences.insert(out.sentences.end(), primary.sentences.begin(),
                       primary.sentences.end());
  return out;
}

std::vector<std::vector<size_t>> make_batches(const std::vector<EncodedExample> &examples,
                                              size_t batch_size, uint64_t seed) {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size is 0");
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return examples[a].input.size() < examples[b].input.size();
  });
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < order.size(); i += batch_size) {
    const size_t end = std::min(order.size(), i + batch_size);
    batches.emplace_back(order.begin() + static_cast<long>(i),
                         order.begin() + static_cast<long>(end));
  }
  Rng rng(seed);
  rng.shuffle(batches);
  return batches;
}

}  // namespace tarc
