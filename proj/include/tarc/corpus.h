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

#ifndef TARC_CORPUS_H_
#define TARC_CORPUS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tarc/error.h"

namespace tarc {

// Token classification labels. Anything that is not ARABIZI carries its
// lowercase label as a sentinel in every downstream column.
enum class TokenClass { kArabizi, kForeign, kEmotag };

std::string_view class_name(TokenClass cls);
std::optional<TokenClass> parse_token_class(std::string_view text);
bool is_sentinel(std::string_view value);

// Annotation levels in column order of the corpus file.
enum class Level { kClass = 0, kCoda, kTokenization, kPos, kLemma };

inline constexpr std::array<Level, 5> kAllLevels = {
    Level::kClass, Level::kCoda, Level::kTokenization, Level::kPos,
    Level::kLemma};
inline constexpr size_t kNumLevels = kAllLevels.size();

// Short task names: cl, ar, tk, pos, lm.
std::string_view level_name(Level level);
// Report headers: Cl, Ar, Tk, POS, Lm.
std::string_view level_title(Level level);
std::optional<Level> parse_level(std::string_view name);
inline size_t level_index(Level level) { return static_cast<size_t>(level); }

enum class Status : char { kGold = 'G', kPredicted = 'P', kEmpty = 'E' };

std::string_view status_name(Status status);
std::optional<Status> parse_status_name(std::string_view name);

inline constexpr std::string_view kEmptyValue = "_";

struct Cell {
  std::string value{kEmptyValue};
  Status status = Status::kEmpty;

  bool empty() const { return status == Status::kEmpty; }
  bool gold() const { return status == Status::kGold; }
  bool operator==(const Cell &) const = default;
};

// One surface token with its five annotation cells. Field text is checked
// on every write so that a value that cannot be serialized never exists.
class AnnotatedToken {
 public:
  explicit AnnotatedToken(std::string surface);

  const std::string &surface() const { return surface_; }
  const Cell &cell(Level level) const { return cells_[level_index(level)]; }
  const std::string &value(Level level) const { return cell(level).value; }
  Status status(Level level) const { return cell(level).status; }

  // Writing Status::kEmpty stores the placeholder regardless of value.
  void set(Level level, std::string value, Status status);
  void clear(Level level) { set(level, std::string(kEmptyValue), Status::kEmpty); }

  // nullopt when the class cell is empty.
  std::optional<TokenClass> token_class() const;

  // Sets the class and, for non-ARABIZI classes, the four sentinels.
  void set_class(TokenClass cls, Status status);

  bool operator==(const AnnotatedToken &) const = default;

 private:
  std::string surface_;
  std::array<Cell, kNumLevels> cells_;
};

enum class Genre { kForum = 0, kSocial, kBlog, kRap };

inline constexpr std::array<Genre, 4> kAllGenres = {
    Genre::kForum, Genre::kSocial, Genre::kBlog, Genre::kRap};

std::string_view genre_name(Genre genre);
std::optional<Genre> parse_genre(std::string_view name);

struct Sentence {
  std::string id;
  Genre genre = Genre::kForum;
  // Free-form provenance (URL hash, date, ...), kept in insertion order.
  std::vector<std::pair<std::string, std::string>> source;
  // Set when decoder output had to be repaired to align with tokens.
  bool align_error = false;
  std::vector<AnnotatedToken> tokens;

  bool operator==(const Sentence &) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;

  size_t token_count() const;
  bool empty() const { return sentences.empty(); }
  bool operator==(const Corpus &) const = default;
};

struct StatusCounts {
  size_t gold = 0;
  size_t predicted = 0;
  size_t empty = 0;
  bool operator==(const StatusCounts &) const = default;
};

using LevelSummary = std::array<StatusCounts, kNumLevels>;

LevelSummary summarize_levels(const Corpus &corpus);

struct CorpusBlock {
  int index = 0;
  Corpus content;

  LevelSummary summary() const { return summarize_levels(content); }
  bool operator==(const CorpusBlock &) const = default;
};

// Validation results. Errors are invariant violations; warnings are
// advisory (tokenization that does not reduce to the CODA form).
struct Violation {
  std::string rule;
  std::string sentence_id;
  int token = -1;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> errors;
  std::vector<Violation> warnings;
  bool ok() const { return errors.empty(); }
};

ValidationReport validate_corpus(const Corpus &corpus);

// Error code for a violation rule name; INVALID_FIELD for unknown rules.
ErrorCode rule_code(std::string_view rule);

// Checks a single token; appends to report. Exposed for import paths that
// validate cell edits one token at a time.
void validate_token(const AnnotatedToken &token, const std::string &sentence_id,
                    int token_index, ValidationReport &report);

enum class ParseMode {
  kStrict,   // format plus all corpus invariants
  kLenient,  // format only; used for raw model output
};

Corpus parse_corpus(std::string_view text, ParseMode mode = ParseMode::kStrict);
std::string serialize_corpus(const Corpus &corpus);

Corpus read_corpus_file(const std::string &path,
                        ParseMode mode = ParseMode::kStrict);
void write_corpus_file(const std::string &path, const Corpus &corpus);

struct StatsRow {
  size_t sentences = 0;
  size_t words = 0;
  // Average sentence length in tenths, rounded half-up.
  long average_tenths() const;
  std::string average_text() const;
};

struct CorpusStats {
  std::array<StatsRow, 4> genres;
  StatsRow total;
};

CorpusStats compute_stats(const Corpus &corpus);

// Row order: Total, forum, social, blog, rap.
std::string format_stats_tsv(const CorpusStats &stats);
std::string format_stats_table(const CorpusStats &stats);

// "43327" -> "43,327".
std::string with_thousands(size_t value);

}  // namespace tarc

#endif  // TARC_CORPUS_H_
