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

#include "tarc/corpus.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tarc/error.h"
#include "tarc/utf8.h"

namespace tarc {

namespace {

constexpr size_t kColumns = 7;

bool has_control_break(std::string_view text) {
  return text.find_first_of("\t\n\r") != std::string_view::npos;
}

void check_field_text(std::string_view what, std::string_view text) {
  if (text.empty()) {
    throw Error(ErrorCode::kInvalidField, std::string(what) + " is empty");
  }
  if (has_control_break(text)) {
    throw Error(ErrorCode::kInvalidField,
                std::string(what) + " contains a tab or line break");
  }
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

size_t segment_count(std::string_view text) {
  return static_cast<size_t>(std::count(text.begin(), text.end(), '+')) + 1;
}

std::string strip_plus(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '+') out.push_back(c);
  }
  return out;
}

}  // namespace

ErrorCode rule_code(std::string_view rule) {
  static const std::map<std::string_view, ErrorCode> kCodes = {
      {"SENTINEL_VIOLATION", ErrorCode::kSentinelViolation},
      {"NON_ARABIC_CODA", ErrorCode::kNonArabicCoda},
      {"SUBTAG_MISMATCH", ErrorCode::kSubtagMismatch},
      {"EMPTY_SENTENCE", ErrorCode::kEmptySentence},
      {"DUPLICATE_ID", ErrorCode::kDuplicateId},
      {"INVALID_FIELD", ErrorCode::kInvalidField},
  };
  auto it = kCodes.find(rule);
  return it == kCodes.end() ? ErrorCode::kInvalidField : it->second;
}

std::string_view class_name(TokenClass cls) {
  switch (cls) {
    case TokenClass::kArabizi: return "arabizi";
    case TokenClass::kForeign: return "foreign";
    case TokenClass::kEmotag: return "emotag";
  }
  return "";
}

std::optional<TokenClass> parse_token_class(std::string_view text) {
  if (text == "arabizi") return TokenClass::kArabizi;
  if (text == "foreign") return TokenClass::kForeign;
  if (text == "emotag") return TokenClass::kEmotag;
  return std::nullopt;
}

bool is_sentinel(std::string_view value) {
  return value == "foreign" || value == "emotag";
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kClass: return "cl";
    case Level::kCoda: return "ar";
    case Level::kTokenization: return "tk";
    case Level::kPos: return "pos";
    case Level::kLemma: return "lm";
  }
  return "";
}

std::string_view level_title(Level level) {
  switch (level) {
    case Level::kClass: return "Cl";
    case Level::kCoda: return "Ar";
    case Level::kTokenization: return "Tk";
    case Level::kPos: return "POS";
    case Level::kLemma: return "Lm";
  }
  return "";
}

std::optional<Level> parse_level(std::string_view name) {
  for (Level level : kAllLevels) {
    if (level_name(level) == name) return level;
  }
  return std::nullopt;
}

std::string_view status_name(Status status) {
  switch (status) {
    case Status::kGold: return "GOLD";
    case Status::kPredicted: return "PREDICTED";
    case Status::kEmpty: return "EMPTY";
  }
  return "";
}

std::optional<Status> parse_status_name(std::string_view name) {
  if (name == "GOLD") return Status::kGold;
  if (name == "PREDICTED") return Status::kPredicted;
  if (name == "EMPTY") return Status::kEmpty;
  return std::nullopt;
}

AnnotatedToken::AnnotatedToken(std::string surface)
    : surface_(std::move(surface)) {
  check_field_text("surface", surface_);
}

void AnnotatedToken::set(Level level, std::string value, Status status) {
  Cell &cell = cells_[level_index(level)];
  if (status == Status::kEmpty) {
    cell = Cell{};
    return;
  }
  check_field_text(level_name(level), value);
  if (value == kEmptyValue) {
    throw Error(ErrorCode::kInvalidField,
                "placeholder '_' used as an annotation value");
  }
  if (level == Level::kClass && !parse_token_class(value)) {
    throw Error(ErrorCode::kInvalidClass, "unknown class '" + value + "'");
  }
  cell.value = std::move(value);
  cell.status = status;
}

std::optional<TokenClass> AnnotatedToken::token_class() const {
  const Cell &c = cell(Level::kClass);
  if (c.empty()) return std::nullopt;
  return parse_token_class(c.value);
}

void AnnotatedToken::set_class(TokenClass cls, Status status) {
  set(Level::kClass, std::string(class_name(cls)), status);
  if (cls == TokenClass::kArabizi) return;
  for (Level level : kAllLevels) {
    if (level == Level::kClass) continue;
    set(level, std::string(class_name(cls)), status);
  }
}

std::string_view genre_name(Genre genre) {
  switch (genre) {
    case Genre::kForum: return "forum";
    case Genre::kSocial: return "social";
    case Genre::kBlog: return "blog";
    case Genre::kRap: return "rap";
  }
  return "";
}

std::optional<Genre> parse_genre(std::string_view name) {
  for (Genre genre : kAllGenres) {
    if (genre_name(genre) == name) return genre;
  }
  return std::nullopt;
}

size_t Corpus::token_count() const {
  size_t n = 0;
  for (const Sentence &s : sentences) n += s.tokens.size();
  return n;
}

LevelSummary summarize_levels(const Corpus &corpus) {
  LevelSummary summary{};
  for (const Sentence &s : corpus.sentences) {
    for (const AnnotatedToken &t : s.tokens) {
      for (Level level : kAllLevels) {
        StatusCounts &counts = summary[level_index(level)];
        switch (t.status(level)) {
          case Status::kGold: ++counts.gold; break;
          case Status::kPredicted: ++counts.predicted; break;
          case Status::kEmpty: ++counts.empty; break;
        }
      }
    }
  }
  return summary;
}

void validate_token(const AnnotatedToken &token, const std::string &sentence_id,
                    int token_index, ValidationReport &report) {
  auto add = [&](std::vector<Violation> &into, std::string rule,
                 std::string detail) {
    into.push_back({std::move(rule), sentence_id, token_index, std::move(detail)});
  };
  const std::optional<TokenClass> cls = token.token_class();

  if (cls && *cls != TokenClass::kArabizi) {
    const std::string_view sentinel = class_name(*cls);
    for (Level level : kAllLevels) {
      if (level == Level::kClass || token.cell(level).empty()) continue;
      if (token.value(level) != sentinel) {
        add(report.errors, "SENTINEL_VIOLATION",
            std::string(level_name(level)) + " is '" + token.value(level) +
                "', expected '" + std::string(sentinel) + "'");
      }
    }
    return;
  }

  const Cell &coda = token.cell(Level::kCoda);
  const Cell &tok = token.cell(Level::kTokenization);
  const Cell &pos = token.cell(Level::kPos);

  if (cls == TokenClass::kArabizi) {
    if (!coda.empty() && !utf8::all_arabic_script(coda.value)) {
      add(report.errors, "NON_ARABIC_CODA",
          "coda '" + coda.value + "' contains non-Arabic characters");
    }
    for (Level level : {Level::kTokenization, Level::kPos, Level::kLemma}) {
      const Cell &c = token.cell(level);
      if (!c.empty() && is_sentinel(c.value)) {
        add(report.errors, "SENTINEL_VIOLATION",
            std::string(level_name(level)) + " carries sentinel '" + c.value +
                "' on an arabizi token");
      }
    }
  }

  if (!pos.empty() && !tok.empty() && !is_sentinel(pos.value) &&
      !is_sentinel(tok.value) && segment_count(pos.value) > 1 &&
      segment_count(pos.value) != segment_count(tok.value)) {
    add(report.errors, "SUBTAG_MISMATCH",
        "pos '" + pos.value + "' has " + std::to_string(segment_count(pos.value)) +
            " subtags, tokenization '" + tok.value + "' has " +
            std::to_string(segment_count(tok.value)) + " segments");
  }

  if (!coda.empty() && !tok.empty() && !is_sentinel(coda.value) &&
      !is_sentinel(tok.value) && strip_plus(tok.value) != coda.value) {
    add(report.warnings, "TOKENIZATION_CODA_MISMATCH",
        "tokenization '" + tok.value + "' does not reduce to coda '" +
            coda.value + "'");
  }
}

ValidationReport validate_corpus(const Corpus &corpus) {
  ValidationReport report;
  std::set<std::string> seen;
  for (const Sentence &s : corpus.sentences) {
    if (s.id.empty() || has_control_break(s.id) ||
        s.id.find(" = ") != std::string::npos) {
      report.errors.push_back({"INVALID_FIELD", s.id, -1, "bad sentence id"});
    }
    for (const auto &[key, value] : s.source) {
      if (key.empty() || has_control_break(key) || has_control_break(value) ||
          key.find(" = ") != std::string::npos) {
        report.errors.push_back(
            {"INVALID_FIELD", s.id, -1, "bad source metadata '" + key + "'"});
      }
    }
    if (!seen.insert(s.id).second) {
      report.errors.push_back({"DUPLICATE_ID", s.id, -1, "duplicate sentence id"});
    }
    if (s.tokens.empty()) {
      report.errors.push_back({"EMPTY_SENTENCE", s.id, -1, "sentence has no tokens"});
    }
    for (size_t i = 0; i < s.tokens.size(); ++i) {
      validate_token(s.tokens[i], s.id, static_cast<int>(i), report);
    }
  }
  return report;
}

Corpus parse_corpus(std::string_view text, ParseMode mode) {
  Corpus corpus;
  // Line number of each token, for error reporting after validation.
  std::vector<std::vector<size_t>> token_lines;
  std::vector<size_t> sentence_lines;

  bool in_sentence = false;
  bool has_id = false;
  bool has_genre = false;

  auto fail = [](ErrorCode code, size_t line, const std::string &what) -> Error {
    return Error(code, "line " + std::to_string(line) + ": " + what);
  };

  auto close_sentence = [&](size_t line) {
    if (!in_sentence) return;
    if (!has_id || !has_genre) {
      throw fail(ErrorCode::kMalformedLine, sentence_lines.back(),
                 "sentence lacks '# id' or '# genre' metadata");
    }
    if (corpus.sentences.back().tokens.empty()) {
      throw fail(ErrorCode::kEmptySentence, line, "sentence has no tokens");
    }
    in_sentence = false;
  };

  auto open_sentence = [&](size_t line) {
    if (in_sentence) return;
    corpus.sentences.emplace_back();
    token_lines.emplace_back();
    sentence_lines.push_back(line);
    in_sentence = true;
    has_id = has_genre = false;
  };

  size_t line_no = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    if (line.empty()) {
      close_sentence(line_no);
      continue;
    }
    if (line.front() == '#') {
      if (in_sentence && !corpus.sentences.back().tokens.empty()) {
        throw fail(ErrorCode::kMalformedLine, line_no,
                   "metadata after token lines (missing blank line?)");
      }
      open_sentence(line_no);
      Sentence &s = corpus.sentences.back();
      if (line.size() < 2 || line[1] != ' ') {
        throw fail(ErrorCode::kMalformedLine, line_no, "expected '# key = value'");
      }
      const std::string_view body = line.substr(2);
      const size_t eq = body.find(" = ");
      if (eq == std::string_view::npos) {
        throw fail(ErrorCode::kMalformedLine, line_no, "expected '# key = value'");
      }
      const std::string_view key = body.substr(0, eq);
      const std::string_view value = body.substr(eq + 3);
      if (key == "id") {
        s.id = std::string(value);
        has_id = true;
      } else if (key == "genre") {
        auto genre = parse_genre(value);
        if (!genre) {
          throw fail(ErrorCode::kMalformedLine, line_no,
                     "unknown genre '" + std::string(value) + "'");
        }
        s.genre = *genre;
        has_genre = true;
      } else if (key.starts_with("source.") && key.size() > 7) {
        s.source.emplace_back(std::string(key.substr(7)), std::string(value));
      } else if (key == "flags") {
        if (value != "ALIGN_ERR") {
          throw fail(ErrorCode::kMalformedLine, line_no,
                     "unknown flags '" + std::string(value) + "'");
        }
        s.align_error = true;
      } else {
        throw fail(ErrorCode::kMalformedLine, line_no,
                   "unknown metadata key '" + std::string(key) + "'");
      }
      continue;
    }

    open_sentence(line_no);
    const auto fields = split(line, '\t');
    if (fields.size() != kColumns) {
      throw fail(ErrorCode::kMalformedLine, line_no,
                 "expected " + std::to_string(kColumns) + " columns, found " +
                     std::to_string(fields.size()));
    }
    const std::string_view flags = fields[6];
    if (flags.size() != kNumLevels) {
      throw fail(ErrorCode::kMalformedLine, line_no,
                 "status flags must have " + std::to_string(kNumLevels) +
                     " characters");
    }
    try {
      AnnotatedToken token{std::string(fields[0])};
      for (Level level : kAllLevels) {
        const size_t i = level_index(level);
        const std::string_view value = fields[1 + i];
        const char flag = flags[i];
        if (flag != 'G' && flag != 'P' && flag != 'E') {
          throw fail(ErrorCode::kMalformedLine, line_no,
                     std::string("bad status flag '") + flag + "'");
        }
        const auto status = static_cast<Status>(flag);
        if ((status == Status::kEmpty) != (value == kEmptyValue)) {
          throw fail(ErrorCode::kMalformedLine, line_no,
                     "status flag and placeholder disagree for " +
                         std::string(level_name(level)));
        }
        token.set(level, std::string(value), status);
      }
      corpus.sentences.back().tokens.push_back(std::move(token));
      token_lines.back().push_back(line_no);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kInvalidClass) {
        throw fail(ErrorCode::kInvalidClass, line_no, e.detail());
      }
      if (e.code() == ErrorCode::kInvalidField) {
        throw fail(ErrorCode::kMalformedLine, line_no, e.detail());
      }
      throw;
    }
  }
  close_sentence(line_no + 1);

  if (mode == ParseMode::kStrict) {
    const ValidationReport report = validate_corpus(corpus);
    if (!report.ok()) {
      const Violation &v = report.errors.front();
      size_t line = 0;
      for (size_t i = 0; i < corpus.sentences.size(); ++i) {
        if (corpus.sentences[i].id != v.sentence_id) continue;
        line = v.token >= 0 ? token_lines[i][static_cast<size_t>(v.token)]
                            : sentence_lines[i];
        break;
      }
      throw Error(rule_code(v.rule),
                  "line " + std::to_string(line) + ": " + v.detail,
                  CellLocation{v.sentence_id, v.token, ""});
    }
  }
  return corpus;
}

std::string serialize_corpus(const Corpus &corpus) {
  std::string out;
  bool first = true;
  for (const Sentence &s : corpus.sentences) {
    if (!first) out += '\n';
    first = false;
    out += "# id = " + s.id + "\n";
    out += "# genre = " + std::string(genre_name(s.genre)) + "\n";
    for (const auto &[key, value] : s.source) {
      out += "# source." + key + " = " + value + "\n";
    }
    if (s.align_error) out += "# flags = ALIGN_ERR\n";
    for (const AnnotatedToken &t : s.tokens) {
      out += t.surface();
      std::string flags;
      for (Level level : kAllLevels) {
        out += '\t';
        out += t.value(level);
        flags += static_cast<char>(t.status(level));
      }
      out += '\t';
      out += flags;
      out += '\n';
    }
  }
  return out;
}

Corpus read_corpus_file(const std::string &path, ParseMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus(buffer.str(), mode);
}

void write_corpus_file(const std::string &path, const Corpus &corpus) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << serialize_corpus(corpus);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

long StatsRow::average_tenths() const {
  if (sentences == 0) return 0;
  // round(10 * words / sentences), halves rounded up.
  return static_cast<long>((20 * words + sentences) / (2 * sentences));
}

std::string StatsRow::average_text() const {
  const long tenths = average_tenths();
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

CorpusStats compute_stats(const Corpus &corpus) {
  CorpusStats stats;
  for (const Sentence &s : corpus.sentences) {
    StatsRow &row = stats.genres[static_cast<size_t>(s.genre)];
    ++row.sentences;
    row.words += s.tokens.size();
  }
  for (const StatsRow &row : stats.genres) {
    stats.total.sentences += row.sentences;
    stats.total.words += row.words;
  }
  return stats;
}

std::string with_thousands(size_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  const size_t n = digits.size();
  for (size_t i = 0; i < n; ++i) {
    out += digits[i];
    const size_t left = n - i - 1;
    if (left > 0 && left % 3 == 0) out += ',';
  }
  return out;
}

std::string format_stats_tsv(const CorpusStats &stats) {
  std::string out = "row\tsentences\twords\tavg_sentence_len\n";
  auto row = [&](std::string_view name, const StatsRow &r) {
    out += std::string(name) + "\t" + std::to_string(r.sentences) + "\t" +
           std::to_string(r.words) + "\t" + r.average_text() + "\n";
  };
  row("Total", stats.total);
  for (Genre g : kAllGenres) row(genre_name(g), stats.genres[static_cast<size_t>(g)]);
  return out;
}

std::string format_stats_table(const CorpusStats &stats) {
  std::ostringstream out;
  auto pad_left = [](const std::string &s, size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
  };
  auto pad_right = [](const std::string &s, size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
  };
  out << pad_right("", 8) << pad_left("Sentences", 11) << pad_left("Words", 10)
      << pad_left("Avg sentence len.", 20) << "\n";
  auto row = [&](std::string_view name, const StatsRow &r) {
    out << pad_right(std::string(name), 8)
        << pad_left(with_thousands(r.sentences), 11)
        << pad_left(with_thousands(r.words), 10)
        << pad_left(r.average_text(), 20) << "\n";
  };
  row("Total", stats.total);
  for (Genre g : kAllGenres) row(genre_name(g), stats.genres[static_cast<size_t>(g)]);
  return out.str();
}

}  // namespace tarc
