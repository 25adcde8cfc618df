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

#ifndef TARC_VOCAB_H_
#define TARC_VOCAB_H_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tarc/corpus.h"

namespace tarc {

enum class Stream {
  kInputChars = 0,
  kCodaChars,
  kLemmaChars,
  kTokenizationChars,
  kClassLabels,
  kPosTags,
};

inline constexpr std::array<Stream, 6> kAllStreams = {
    Stream::kInputChars,        Stream::kCodaChars,   Stream::kLemmaChars,
    Stream::kTokenizationChars, Stream::kClassLabels, Stream::kPosTags};

std::string_view stream_name(Stream stream);
std::optional<Stream> parse_stream(std::string_view name);

// Target stream of each annotation level.
Stream stream_for(Level level);

// Character streams split values into code points; tag streams keep whole
// values. Sentinel values are always a single symbol.
bool is_char_stream(Stream stream);
std::vector<std::string> symbolize(Stream stream, std::string_view value);

inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kTokSep = 4;
inline constexpr int kNumSpecials = 5;

class Vocabulary {
 public:
  explicit Vocabulary(Stream stream = Stream::kInputChars);

  Stream stream() const { return stream_; }
  size_t size() const { return symbols_.size(); }

  // Adds a symbol if absent; returns its index.
  int add(std::string_view symbol);
  std::optional<int> find(std::string_view symbol) const;
  // UNK for unseen symbols.
  int index(std::string_view symbol) const;
  const std::string &symbol(int index) const;

  // One "index\tsymbol" line per entry, specials first.
  std::string to_tsv() const;
  static Vocabulary from_tsv(Stream stream, std::string_view text);

  bool operator==(const Vocabulary &other) const {
    return stream_ == other.stream_ && symbols_ == other.symbols_;
  }

 private:
  Stream stream_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// Symbols come from gold cells only (surfaces count as gold). Order is the
// specials followed by first occurrence in corpus order.
Vocabulary build_vocabulary(const Corpus &corpus, Stream stream);

struct Vocabularies {
  std::array<Vocabulary, 6> streams{
      Vocabulary(Stream::kInputChars),        Vocabulary(Stream::kCodaChars),
      Vocabulary(Stream::kLemmaChars),        Vocabulary(Stream::kTokenizationChars),
      Vocabulary(Stream::kClassLabels),       Vocabulary(Stream::kPosTags)};

  const Vocabulary &get(Stream s) const { return streams[static_cast<size_t>(s)]; }
  Vocabulary &get(Stream s) { return streams[static_cast<size_t>(s)]; }
  bool operator==(const Vocabularies &) const = default;
};

Vocabularies build_vocabularies(const Corpus &corpus);

}  // namespace tarc

#endif  // TARC_VOCAB_H_
