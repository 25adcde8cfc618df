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

#include "tarc/vocab.h"

#include "tarc/error.h"
#include "tarc/utf8.h"

namespace tarc {

namespace {

constexpr std::array<std::string_view, kNumSpecials> kSpecialNames = {
    "<pad>", "<s>", "</s>", "<unk>", "<tok>"};

}  // namespace

std::string_view stream_name(Stream stream) {
  switch (stream) {
    case Stream::kInputChars: return "input-chars";
    case Stream::kCodaChars: return "coda-chars";
    case Stream::kLemmaChars: return "lemma-chars";
    case Stream::kTokenizationChars: return "tokenization-chars";
    case Stream::kClassLabels: return "class-labels";
    case Stream::kPosTags: return "pos-tags";
  }
  return "";
}

std::optional<Stream> parse_stream(std::string_view name) {
  for (Stream s : kAllStreams) {
    if (stream_name(s) == name) return s;
  }
  return std::nullopt;
}

Stream stream_for(Level level) {
  switch (level) {
    case Level::kClass: return Stream::kClassLabels;
    case Level::kCoda: return Stream::kCodaChars;
    case Level::kTokenization: return Stream::kTokenizationChars;
    case Level::kPos: return Stream::kPosTags;
    case Level::kLemma: return Stream::kLemmaChars;
  }
  return Stream::kClassLabels;
}

bool is_char_stream(Stream stream) {
  return stream != Stream::kClassLabels && stream != Stream::kPosTags;
}

std::vector<std::string> symbolize(Stream stream, std::string_view value) {
  if (!is_char_stream(stream) || is_sentinel(value)) {
    return {std::string(value)};
  }
  return utf8::split_chars(value);
}

Vocabulary::Vocabulary(Stream stream) : stream_(stream) {
  for (std::string_view name : kSpecialNames) add(name);
}

int Vocabulary::add(std::string_view symbol) {
  auto it = index_.find(std::string(symbol));
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(symbols_.size());
  symbols_.emplace_back(symbol);
  index_.emplace(std::string(symbol), id);
  return id;
}

std::optional<int> Vocabulary::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::index(std::string_view symbol) const {
  return find(symbol).value_or(kUnk);
}

const std::string &Vocabulary::symbol(int index) const {
  if (index < 0 || static_cast<size_t>(index) >= symbols_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "symbol index " + std::to_string(index) + " out of range");
  }
  return symbols_[static_cast<size_t>(index)];
}

std::string Vocabulary::to_tsv() const {
  std::string out;
  for (size_t i = 0; i < symbols_.size(); ++i) {
    out += std::to_string(i) + "\t" + symbols_[i] + "\n";
  }
  return out;
}

Vocabulary Vocabulary::from_tsv(Stream stream, std::string_view text) {
  Vocabulary vocab(stream);
  size_t start = 0;
  size_t expected = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedLine, "vocabulary line without tab");
    }
    const size_t index = std::stoul(std::string(line.substr(0, tab)));
    const std::string_view symbol = line.substr(tab + 1);
    if (index != expected) {
      throw Error(ErrorCode::kMalformedLine, "vocabulary indices not dense");
    }
    if (index < kNumSpecials) {
      if (symbol != kSpecialNames[index]) {
        throw Error(ErrorCode::kMalformedLine, "special symbols out of place");
      }
    } else if (static_cast<size_t>(vocab.add(symbol)) != index) {
      throw Error(ErrorCode::kMalformedLine, "duplicate vocabulary symbol");
    }
    ++expected;
  }
  return vocab;
}

Vocabulary build_vocabulary(const Corpus &corpus, Stream stream) {
  Vocabulary vocab(stream);
  for (const Sentence &s : corpus.sentences) {
    for (const AnnotatedToken &t : s.tokens) {
      if (stream == Stream::kInputChars) {
        for (const std::string &c : utf8::split_chars(t.surface())) vocab.add(c);
        continue;
      }
      for (Level level : kAllLevels) {
        if (stream_for(level) != stream || !t.cell(level).gold()) continue;
        for (const std::string &sym : symbolize(stream, t.value(level))) {
          vocab.add(sym);
        }
      }
    }
  }
  return vocab;
}

Vocabularies build_vocabularies(const Corpus &corpus) {
  Vocabularies v;
  for (Stream s : kAllStreams) v.get(s) = build_vocabulary(corpus, s);
  return v;
}

}  // namespace tarc
