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

#ifndef TARC_STORE_H_
#define TARC_STORE_H_

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tarc/config.h"
#include "tarc/corpus.h"

namespace tarc {

// On-disk campaign state:
//   blocks/block_<i>.tsv        current annotations (gold and predicted)
//   blocks/block_<i>.pred.tsv   model output as produced, for evaluation
//   aux/<name>.tsv              auxiliary training corpora
//   checkpoints/<id>.ckpt
//   journal.jsonl               append-only step events
//   reports/step_<k>.tsv, reports/campaign.tsv
// Files are replaced atomically, so a reader sees either the old or the new
// version. Journal appends are serialized; other writers must not race on
// the same file.
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path &root() const { return root_; }

  std::vector<int> block_indices() const;
  bool has_block(int index) const;
  // Throws kNotFound.
  CorpusBlock read_block(int index) const;
  void write_block(const CorpusBlock &block);

  std::optional<CorpusBlock> read_predictions(int index) const;
  void write_predictions(const CorpusBlock &block);

  bool has_aux(const std::string &name) const;
  Corpus read_aux(const std::string &name) const;
  void write_aux(const std::string &name, const Corpus &corpus);

  std::string checkpoint_path(const std::string &id) const;
  bool has_checkpoint(const std::string &id) const;

  void append_journal(const Json &event);
  // A torn final line (crash mid-append) is ignored.
  std::vector<Json> read_journal() const;

  void write_report(int step, const std::string &tsv);
  std::optional<std::string> read_report(int step) const;
  void write_campaign_report(const std::string &tsv);

 private:
  std::filesystem::path block_path(int index, bool predictions = false) const;

  std::filesystem::path root_;
  std::mutex journal_mutex_;
};

// Names usable as aux corpus names and checkpoint ids.
bool valid_store_name(std::string_view name);

// Atomic replace via a temporary file and rename.
void write_file_atomic(const std::filesystem::path &path, std::string_view content);
std::optional<std::string> read_file(const std::filesystem::path &path);

}  // namespace tarc

#endif  // TARC_STORE_H_
