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

#ifndef TARC_HARNESS_H_
#define TARC_HARNESS_H_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tarc/config.h"
#include "tarc/corpus.h"
#include "tarc/model.h"
#include "tarc/store.h"
#include "tarc/train.h"

namespace tarc {

enum class Strategy {
  kConcat,    // auxiliary corpus and annotated blocks in one training set
  kReloaded,  // fine-tune a checkpoint pretrained on the auxiliary corpus
};

std::string_view strategy_name(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view name);

struct StepPlan {
  int step = 0;
  std::optional<std::string> aux;
  std::vector<int> annotated_blocks;
  int target_block = 0;
  Strategy strategy = Strategy::kConcat;
  InputMode input_mode = InputMode::kArabizi;
  nn::ModelConfig model;
  nn::TrainSchedule schedule;
  // Checkpoint id of the auxiliary-pretrained model (RELOADED only).
  std::optional<std::string> pretrained;
  // Share of training sentences held out for early stopping; 0 trains on
  // everything and selects by training loss.
  double dev_fraction = 0.0;

  // Throws kInvalidArgument.
  void validate() const;
  bool operator==(const StepPlan &) const = default;
};

Json plan_to_json(const StepPlan &plan);
// Missing model/schedule keys fall back to `defaults` when given.
StepPlan plan_from_json(const Json &doc, const Json &model_defaults = Json::object(),
                        const Json &schedule_defaults = Json::object());
// {"model": {...}, "schedule": {...}, "plans": [...]}; top-level model and
// schedule apply to every plan.
std::vector<StepPlan> plans_from_json(const Json &doc);

struct TokenAccount {
  size_t aux = 0;
  size_t primary = 0;

  size_t total() const { return aux + primary; }
  // "17,261 (4,870)"
  std::string text() const;
  bool operator==(const TokenAccount &) const = default;
};

struct EvalReport {
  std::array<size_t, kNumLevels> correct{};
  std::array<size_t, kNumLevels> evaluated{};
  std::array<bool, kNumLevels> scored{};
  size_t tokens = 0;
  size_t align_errors = 0;

  // Accuracy in hundredths of a percent, rounded half-up; nullopt when the
  // level was not scored or had no gold cells.
  std::optional<long> hundredths(Level level) const;
  std::optional<double> accuracy(Level level) const;
  // "75.00", or "-".
  std::string accuracy_text(Level level) const;
  bool operator==(const EvalReport &) const = default;
};

// Per-task exact-match accuracy over cells whose gold side is not EMPTY.
// Throws kBlockShapeMismatch when ids or token counts differ.
EvalReport evaluate(const CorpusBlock &predictions, const CorpusBlock &gold,
                    const std::vector<Level> &levels = {kAllLevels.begin(), kAllLevels.end()});

struct StepRecord {
  int step = 0;
  Strategy strategy = Strategy::kConcat;
  int target_block = 0;
  TokenAccount tokens;
  std::string checkpoint;
  std::optional<EvalReport> eval;
  bool operator==(const StepRecord &) const = default;
};

Json record_to_json(const StepRecord &record);
StepRecord record_from_json(const Json &doc);

// Copy with every non-GOLD cell cleared.
Corpus gold_view(const Corpus &corpus);

// Training token counts of a plan, read from the store.
TokenAccount account_tokens(const StepPlan &plan, const Store &store);

struct StepOptions {
  nn::EpochCallback on_epoch;
};

// Trains per the plan, writes predictions onto the target block (gold cells
// untouched) plus a snapshot of the raw predictions, saves the checkpoint
// and journals the record. Throws kMissingGold, kCheckpointNotFound,
// kNotFound.
StepRecord run_annotation_step(const StepPlan &plan, Store &store,
                               const StepOptions &options = {});

// Trains on an auxiliary corpus alone and stores the checkpoint under id.
nn::TrainLog pretrain_on_aux(Store &store, const std::string &aux, const nn::ModelConfig &config,
                             const nn::TrainSchedule &schedule, const std::string &id,
                             const StepOptions &options = {});

struct MergeSummary {
  std::array<size_t, kNumLevels> changed{};
  size_t confirmed = 0;

  size_t total() const;
  Json to_json() const;
};

// Changed cells become GOLD, resubmitted GOLD cells are confirmed, untouched
// predictions stay PREDICTED. All-or-nothing: on error the store is
// unchanged. Throws kBlockShapeMismatch and the corpus rule errors
// (kSentinelViolation, ...) with the offending cell.
MergeSummary import_corrections(int block, const CorpusBlock &corrected, Store &store);

struct CampaignResult {
  std::vector<StepRecord> records;
  // Set when the campaign paused for corrections to this block.
  std::optional<int> awaiting_block;
};

// Scores the stored predictions of the record's target block against its
// current gold, journals the result and writes the step report.
StepRecord evaluate_step(const StepPlan &plan, StepRecord record, Store &store);
// evaluate_step for the latest step that annotated `block`; nullopt when no
// step did.
std::optional<StepRecord> evaluate_block(int block, Store &store);

// Runs plans in order, replaying steps already in the journal. Stops after
// an auto-annotation whose corrections have not been imported; calling again
// after the import resumes. Throws kPlanDiscontinuity.
CampaignResult run_campaign(const std::vector<StepPlan> &plans, Store &store,
                            const StepOptions &options = {});

// Header plus one row per record: Step, Train. tokens, Cl, Ar, Tk, POS, Lm.
std::string format_accounting(const std::vector<StepRecord> &records);

}  // namespace tarc

#endif  // TARC_HARNESS_H_
