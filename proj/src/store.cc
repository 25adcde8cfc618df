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

#include "tarc/store.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tarc/error.h"

namespace tarc {

namespace fs = std::filesystem;

bool valid_store_name(std::string_view name) {
  if (name.empty() || name.size() > 128 || name.front() == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  });
}

void write_file_atomic(const fs::path &path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<std::string> read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Store::Store(fs::path root) : root_(std::move(root)) {
  for (const char *dir : {"blocks", "aux", "checkpoints", "reports"}) {
    fs::create_directories(root_ / dir);
  }
}

fs::path Store::block_path(int index, bool predictions) const {
  return root_ / "blocks" /
         ("block_" + std::to_string(index) + (predictions ? ".pred.tsv" : ".tsv"));
}

std::vector<int> Store::block_indices() const {
  std::vector<int> out;
  for (const auto &entry : fs::directory_iterator(root_ / "blocks")) {
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("block_") || !name.ends_with(".tsv") || name.ends_with(".pred.tsv")) {
      continue;
    }
    const std::string digits = name.substr(6, name.size() - 10);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
    out.push_back(std::stoi(digits));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Store::has_block(int index) const { return index >= 0 && fs::exists(block_path(index)); }

CorpusBlock Store::read_block(int index) const {
  if (!has_block(index)) {
    throw Error(ErrorCode::kNotFound, "no block " + std::to_string(index));
  }
  auto text = read_file(block_path(index));
  if (!text) throw Error(ErrorCode::kNotFound, "no block " + std::to_string(index));
  return CorpusBlock{index, parse_corpus(*text, ParseMode::kLenient)};
}

void Store::write_block(const CorpusBlock &block) {
  write_file_atomic(block_path(block.index), serialize_corpus(block.content));
}

std::optional<CorpusBlock> Store::read_predictions(int index) const {
  auto text = read_file(block_path(index, true));
  if (!text) return std::nullopt;
  return CorpusBlock{index, parse_corpus(*text, ParseMode::kLenient)};
}

void Store::write_predictions(const CorpusBlock &block) {
  write_file_atomic(block_path(block.index, true), serialize_corpus(block.content));
}

bool Store::has_aux(const std::string &name) const {
  return valid_store_name(name) && fs::exists(root_ / "aux" / (name + ".tsv"));
}

Corpus Store::read_aux(const std::string &name) const {
  if (!has_aux(name)) throw Error(ErrorCode::kNotFound, "no auxiliary corpus '" + name + "'");
  return read_corpus_file((root_ / "aux" / (name + ".tsv")).string());
}

void Store::write_aux(const std::string &name, const Corpus &corpus) {
  if (!valid_store_name(name)) {
    throw Error(ErrorCode::kInvalidArgument, "bad auxiliary corpus name '" + name + "'");
  }
  write_file_atomic(root_ / "aux" / (name + ".tsv"), serialize_corpus(corpus));
}

std::string Store::checkpoint_path(const std::string &id) const {
  if (!valid_store_name(id)) {
    throw Error(ErrorCode::kInvalidArgument, "bad checkpoint id '" + id + "'");
  }
  return (root_ / "checkpoints" / (id + ".ckpt")).string();
}

bool Store::has_checkpoint(const std::string &id) const {
  return valid_store_name(id) && fs::exists(checkpoint_path(id));
}

void Store::append_journal(const Json &event) {
  std::lock_guard lock(journal_mutex_);
  std::ofstream out(root_ / "journal.jsonl", std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to the journal");
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "cannot append to the journal");
}

std::vector<Json> Store::read_journal() const {
  std::vector<Json> events;
  auto text = read_file(root_ / "journal.jsonl");
  if (!text) return events;
  std::istringstream in(*text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      events.push_back(Json::parse(line));
    } catch (const Json::parse_error &) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw Error(ErrorCode::kIo, "corrupt journal line");
    }
  }
  return events;
}

void Store::write_report(int step, const std::string &tsv) {
  write_file_atomic(root_ / "reports" / ("step_" + std::to_string(step) + ".tsv"), tsv);
}

std::optional<std::string> Store::read_report(int step) const {
  return read_file(root_ / "reports" / ("step_" + std::to_string(step) + ".tsv"));
}

void Store::write_campaign_report(const std::string &tsv) {
  write_file_atomic(root_ / "reports" / "campaign.tsv", tsv);
}

}  // namespace tarc
