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

#include <doctest.h>

#include <set>

#include "synthetic.h"
#include "tarc/dataset.h"
#include "tarc/error.h"
#include "tarc/vocab.h"

using namespace tarc;

namespace {

Corpus uniform_corpus(size_t sentences, size_t tokens_each) {
  Rng rng(4);
  Corpus c;
  for (size_t i = 0; i < sentences; ++i) {
    c.sentences.push_back(
        testing::random_sentence(rng, "u" + std::to_string(i), Genre::kForum, tokens_each));
  }
  return c;
}

Sentence plain(const std::vector<std::string> &surfaces) {
  Sentence s;
  s.id = "p";
  for (const std::string &w : surfaces) {
    AnnotatedToken t(w);
    t.set_class(TokenClass::kArabizi, Status::kGold);
    s.tokens.push_back(t);
  }
  return s;
}

size_t count(const std::vector<int> &v, int x) {
  return static_cast<size_t>(std::count(v.begin(), v.end(), x));
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("blocks of 30 over ten-token sentences") {
    const auto blocks = split_blocks(uniform_corpus(10, 10), 30);
    REQUIRE(blocks.size() == 4);
    CHECK(blocks[0].content.token_count() == 30);
    CHECK(blocks[1].content.token_count() == 30);
    CHECK(blocks[2].content.token_count() == 30);
    CHECK(blocks[3].content.token_count() == 10);
    for (size_t i = 0; i < blocks.size(); ++i) CHECK(blocks[i].index == static_cast<int>(i));
  }

  TEST_CASE("small corpus fits one block") {
    CHECK(split_blocks(uniform_corpus(5, 10), 6000).size() == 1);
  }

  TEST_CASE("target below the longest sentence") {
    CHECK_THROWS_AS(split_blocks(uniform_corpus(2, 10), 9), Error);
  }

  TEST_CASE("block partition property") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
      const Corpus c = testing::random_corpus(rng, 1 + rng.below(40), 15);
      size_t longest = 0;
      for (const Sentence &s : c.sentences) longest = std::max(longest, s.tokens.size());
      const size_t target = longest + rng.below(60);
      const auto blocks = split_blocks(c, target);
      Corpus joined;
      for (size_t b = 0; b < blocks.size(); ++b) {
        const size_t n = blocks[b].content.token_count();
        if (b + 1 < blocks.size()) {
          CHECK(n >= target);
          CHECK(n < target + longest);
        }
        for (const Sentence &s : blocks[b].content.sentences) joined.sentences.push_back(s);
      }
      CHECK(joined == c);
    }
  }

  TEST_CASE("full-size fixture at 6,000 tokens per block") {
    const Corpus c = testing::corpus_fixture();
    REQUIRE(c.token_count() == 43327);
    // Closing a block only once it reaches the target leaves 7 full blocks
    // and a short eighth; 7 blocks in total needs a target of 43,327 / 7.
    CHECK(split_blocks(c, 6000).size() == 8);
    const auto seven = split_blocks(c, 43327 / 7);
    CHECK(seven.size() == 7);
    CHECK(seven.back().content.token_count() < 43327 / 7);
  }

  TEST_CASE("genre split of 400 forum and 600 social sentences") {
    Corpus c;
    Rng rng(6);
    for (size_t i = 0; i < 1000; ++i) {
      c.sentences.push_back(testing::random_sentence(rng, "g" + std::to_string(i),
                                                     i < 400 ? Genre::kForum : Genre::kSocial, 2));
    }
    const Splits s = make_splits(c, SplitSpec{});
    CHECK(s.train.sentences.size() == 700);
    CHECK(s.dev.sentences.size() == 150);
    CHECK(s.test.sentences.size() == 150);
    size_t forum_dev = 0;
    for (const Sentence &x : s.dev.sentences) forum_dev += x.genre == Genre::kForum;
    CHECK(forum_dev == 60);
  }

  TEST_CASE("global split of 20 sentences") {
    SplitSpec spec;
    spec.mode = SplitMode::kGlobal;
    const Splits s = make_splits(uniform_corpus(20, 3), spec);
    CHECK(s.train.sentences.size() == 14);
    CHECK(s.dev.sentences.size() == 3);
    CHECK(s.test.sentences.size() == 3);
  }

  TEST_CASE("split is deterministic given the seed") {
    const Corpus c = uniform_corpus(57, 2);
    SplitSpec spec;
    spec.seed = 42;
    const Splits a = make_splits(c, spec);
    const Splits b = make_splits(c, spec);
    CHECK(format_manifest(a.train) == format_manifest(b.train));
    CHECK(format_manifest(a.dev) == format_manifest(b.dev));
    CHECK(format_manifest(a.test) == format_manifest(b.test));
    spec.seed = 43;
    CHECK(format_manifest(make_splits(c, spec).dev) != format_manifest(a.dev));
  }

  TEST_CASE("split spec validation") {
    CHECK_THROWS_AS((SplitSpec{0.5, 0.3, 0.3}.validate()), Error);
    CHECK_THROWS_AS((SplitSpec{1.0, 0.0, 0.0}.validate()), Error);
    CHECK_NOTHROW((SplitSpec{0.8, 0.1, 0.1}.validate()));
  }

  TEST_CASE("manifest selection restores a split") {
    const Corpus c = uniform_corpus(30, 2);
    const Splits s = make_splits(c, SplitSpec{});
    CHECK(select_manifest(c, format_manifest(s.test)) == s.test);
    CHECK_THROWS_AS(select_manifest(c, "nope\n"), Error);
  }

  TEST_CASE("class-label vocabulary has eight entries") {
    Corpus c = testing::excerpt_corpus();
    c.sentences[0].tokens.push_back(testing::sentinel_token(":)", TokenClass::kEmotag));
    const Vocabulary v = build_vocabulary(c, Stream::kClassLabels);
    CHECK(v.size() == 8);
    CHECK(v.find("arabizi").has_value());
    CHECK(v.find("foreign").has_value());
    CHECK(v.find("emotag").has_value());
  }

  TEST_CASE("input characters of one token") {
    Corpus c;
    c.sentences.push_back(plain({"ba3d"}));
    const Vocabulary v = build_vocabulary(c, Stream::kInputChars);
    CHECK(v.size() == 9);
    CHECK(v.symbol(5) == "b");
    CHECK(v.symbol(8) == "d");
  }

  TEST_CASE("empty corpus has only the specials") {
    for (Stream s : kAllStreams) {
      const Vocabulary v = build_vocabulary(Corpus{}, s);
      REQUIRE(v.size() == 5);
      CHECK(v.symbol(kPad) == "<pad>");
      CHECK(v.symbol(kBos) == "<s>");
      CHECK(v.symbol(kEos) == "</s>");
      CHECK(v.symbol(kUnk) == "<unk>");
      CHECK(v.symbol(kTokSep) == "<tok>");
    }
  }

  TEST_CASE("vocabulary TSV round-trip and determinism") {
    const Corpus c = testing::corpus_fixture();
    for (Stream s : kAllStreams) {
      const Vocabulary a = build_vocabulary(c, s);
      CHECK(a == build_vocabulary(c, s));
      CHECK(Vocabulary::from_tsv(s, a.to_tsv()) == a);
      for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a.index(a.symbol(static_cast<int>(i))) == static_cast<int>(i));
      }
    }
  }

  TEST_CASE("sentinels and tags are single symbols") {
    CHECK(symbolize(Stream::kCodaChars, "foreign").size() == 1);
    CHECK(symbolize(Stream::kCodaChars, "انا").size() == 3);
    CHECK(symbolize(Stream::kPosTags, "NOUN+POSS_PRON_1S").size() == 1);
  }

  TEST_CASE("one-token sentence encoding") {
    Corpus c;
    c.sentences.push_back(plain({"ena"}));
    const Vocabularies v = build_vocabularies(c);
    const EncodedExample ex = encode_sentence(c.sentences[0], v, InputMode::kArabizi);
    const Vocabulary &in = v.get(Stream::kInputChars);
    CHECK(ex.input == std::vector<int>{kBos, in.index("e"), in.index("n"), in.index("a"), kEos});
    CHECK(ex.sentence_id == "p");
  }

  TEST_CASE("two-token encoding has one boundary and two class units") {
    const Corpus c = testing::excerpt_corpus();
    const Vocabularies v = build_vocabularies(c);
    Sentence s = c.sentences[0];
    s.tokens.erase(s.tokens.begin() + 2, s.tokens.end());
    const EncodedExample ex = encode_sentence(s, v, InputMode::kArabizi);
    CHECK(count(ex.input, kTokSep) == 1);
    const std::vector<int> &cls = *ex.targets[level_index(Level::kClass)];
    CHECK(cls.size() == 2 + 2 + 1);
    CHECK(count(cls, kTokSep) == 1);
  }

  TEST_CASE("unseen characters map to UNK") {
    Corpus c;
    c.sentences.push_back(plain({"ena"}));
    const Vocabularies v = build_vocabularies(c);
    const EncodedExample ex = encode_sentence(plain({"ça"}), v, InputMode::kArabizi);
    CHECK(ex.input[1] == kUnk);
  }

  TEST_CASE("encoding alignment over random corpora") {
    Rng rng(13);
    const Corpus c = testing::random_corpus(rng, 100, 12);
    const Vocabularies v = build_vocabularies(c);
    for (const EncodedExample &ex : encode_corpus(c, v, InputMode::kArabizi)) {
      const size_t n = ex.token_count;
      CHECK(ex.input.front() == kBos);
      CHECK(ex.input.back() == kEos);
      CHECK(count(ex.input, kTokSep) == n - 1);
      for (Level level : {Level::kClass, Level::kPos}) {
        const std::vector<int> &t = *ex.targets[level_index(level)];
        CHECK(t.size() == 2 * n + 1);
      }
      for (Level level : kAllLevels) {
        CHECK(count(*ex.targets[level_index(level)], kTokSep) == n - 1);
      }
    }
  }

  TEST_CASE("ar input reads CODA and drops the CODA target") {
    const Corpus c = testing::excerpt_corpus();
    const Vocabularies v = build_vocabularies(c);
    const EncodedExample ex = encode_sentence(c.sentences[0], v, InputMode::kAr);
    CHECK_FALSE(ex.targets[level_index(Level::kCoda)].has_value());
    const Vocabulary &coda = v.get(Stream::kCodaChars);
    CHECK(ex.input[1] == coda.index("ا"));
    Sentence missing = c.sentences[0];
    missing.tokens[0].clear(Level::kCoda);
    try {
      encode_sentence(missing, v, InputMode::kAr);
      FAIL("expected MISSING_GOLD");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kMissingGold);
    }
  }

  TEST_CASE("levels without complete gold become PAD streams") {
    const Corpus c = testing::excerpt_corpus();
    const Vocabularies v = build_vocabularies(c);
    Sentence s = c.sentences[0];
    s.tokens[4].set(Level::kPos, "NOUN", Status::kPredicted);
    const EncodedExample ex = encode_sentence(s, v, InputMode::kArabizi);
    const std::vector<int> &pos = *ex.targets[level_index(Level::kPos)];
    CHECK(pos.size() == 2 * s.tokens.size() + 1);
    CHECK(count(pos, kPad) == pos.size());
  }

  TEST_CASE("concat keeps order and counts") {
    Rng rng(1);
    const Corpus aux = testing::random_corpus(rng, 10, 8);
    const Corpus primary = testing::random_corpus(rng, 7, 8);
    const Corpus both = concat_corpora(aux, primary);
    CHECK(both.token_count() == aux.token_count() + primary.token_count());
    CHECK(both.sentences.front() == aux.sentences.front());
    CHECK(both.sentences.back() == primary.sentences.back());
    CHECK(concat_corpora(aux, Corpus{}) == aux);
  }

  TEST_CASE("concat token accounting at published block sizes") {
    const Corpus aux = testing::synthetic_corpus({{Genre::kForum, 1000, 12391}}, 1);
    const Corpus block0 = testing::synthetic_corpus({{Genre::kSocial, 900, 4870}}, 2);
    CHECK(concat_corpora(aux, block0).token_count() == 17261);
  }

  TEST_CASE("concat rejects different level schemas") {
    Rng rng(1);
    const Corpus aux = testing::random_corpus(rng, 3, 4);
    Corpus primary = testing::random_corpus(rng, 3, 4);
    for (Sentence &s : primary.sentences) {
      for (AnnotatedToken &t : s.tokens) t.clear(Level::kLemma);
    }
    try {
      concat_corpora(aux, primary);
      FAIL("expected SCHEMA_MISMATCH");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kSchemaMismatch);
    }
  }

  TEST_CASE("batches cover every example once and are seeded") {
    Rng rng(17);
    const Corpus c = testing::random_corpus(rng, 53, 12);
    const auto ex = encode_corpus(c, build_vocabularies(c), InputMode::kArabizi);
    const auto a = make_batches(ex, 8, 3);
    CHECK(a == make_batches(ex, 8, 3));
    std::multiset<size_t> seen;
    for (const auto &b : a) {
      CHECK(b.size() <= 8);
      seen.insert(b.begin(), b.end());
    }
    CHECK(seen.size() == ex.size());
    CHECK(std::set<size_t>(seen.begin(), seen.end()).size() == ex.size());
  }
}
