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

#include "tarc/service.h"

#include <algorithm>
#include <set>

#include "tarc/error.h"

namespace tarc {

std::string_view job_kind_name(JobKind kind) {
  switch (kind) {
    case JobKind::kTrain: return "TRAIN";
    case JobKind::kAnnotate: return "ANNOTATE";
    case JobKind::kEval: return "EVAL";
  }
  return "?";
}

std::string_view job_state_name(JobState state) {
  switch (state) {
    case JobState::kQueued: return "QUEUED";
    case JobState::kRunning: return "RUNNING";
    case JobState::kDone: return "DONE";
    case JobState::kFailed: return "FAILED";
  }
  return "?";
}

Json job_to_json(const JobStatus &job) {
  Json doc{{"id", job.id},
           {"kind", job_kind_name(job.kind)},
           {"state", job_state_name(job.state)},
           {"progress", Json{{"epoch", job.progress}, {"epochs", job.total}}},
           {"result", nullptr},
           {"error", nullptr}};
  if (job.checkpoint) {
    doc["result"] = Json{{"checkpoint", *job.checkpoint},
                         {"record", job.record ? record_to_json(*job.record) : Json()}};
  }
  if (job.error) doc["error"] = Json{{"error", *job.error}, {"detail", job.detail}};
  return doc;
}

namespace {

Json summary_to_json(const LevelSummary &summary) {
  Json out = Json::object();
  for (Level level : kAllLevels) {
    const StatusCounts &c = summary[level_index(level)];
    out[std::string(level_name(level))] =
        Json{{"gold", c.gold}, {"predicted", c.predicted}, {"empty", c.empty}};
  }
  return out;
}

[[noreturn]] void bad_doc(const std::string &detail) {
  throw Error(ErrorCode::kInvalidArgument, "block document: " + detail);
}

const Json &member(const Json &doc, const char *key) {
  if (!doc.is_object() || !doc.contains(key)) bad_doc(std::string("missing '") + key + "'");
  return doc.at(key);
}

std::string text_member(const Json &doc, const char *key) {
  const Json &v = member(doc, key);
  if (!v.is_string()) bad_doc(std::string("'") + key + "' is not a string");
  return v.get<std::string>();
}

Error with_location(const Error &e, const std::string &id, int token, Level level) {
  return Error(e.code(), e.detail(), CellLocation{id, token, std::string(level_name(level))});
}

Sentence &find_sentence(Corpus &corpus, const std::string &id) {
  for (Sentence &s : corpus.sentences) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::kBlockShapeMismatch, "no sentence '" + id + "' in the block",
              CellLocation{id, -1, ""});
}

struct CellRef {
  Sentence *sentence;
  int token;
  Level level;
};

CellRef resolve(Corpus &corpus, const Json &entry) {
  Sentence &s = find_sentence(corpus, text_member(entry, "sentence"));
  const Json &token = member(entry, "token");
  if (!token.is_number_integer()) bad_doc("'token' is not an integer");
  const int k = token.get<int>();
  if (k < 0 || k >= static_cast<int>(s.tokens.size())) {
    throw Error(ErrorCode::kBlockShapeMismatch, "no token " + std::to_string(k),
                CellLocation{s.id, k, ""});
  }
  const auto level = parse_level(text_member(entry, "level"));
  if (!level) bad_doc("unknown level");
  return CellRef{&s, k, *level};
}

const Json &entries(const Json &doc, const char *key) {
  static const Json kNone = Json::array();
  if (!doc.contains(key)) return kNone;
  const Json &v = doc.at(key);
  if (!v.is_array()) bad_doc(std::string("'") + key + "' is not an array");
  return v;
}

}  // namespace

Json block_to_json(const CorpusBlock &block) {
  Json sentences = Json::array();
  for (const Sentence &s : block.content.sentences) {
    Json source = Json::array();
    for (const auto &[k, v] : s.source) source.push_back(Json::array({k, v}));
    Json tokens = Json::array();
    for (const AnnotatedToken &t : s.tokens) {
      Json cells = Json::object();
      for (Level level : kAllLevels) {
        cells[std::string(level_name(level))] =
            Json{{"value", t.value(level)}, {"status", status_name(t.status(level))}};
      }
      tokens.push_back(Json{{"surface", t.surface()}, {"cells", cells}});
    }
    sentences.push_back(Json{{"id", s.id},
                             {"genre", genre_name(s.genre)},
                             {"source", source},
                             {"align_error", s.align_error},
                             {"tokens", tokens}});
  }
  return Json{{"index", block.index},
              {"tokens", block.content.token_count()},
              {"summary", summary_to_json(block.summary())},
              {"sentences", sentences}};
}

CorpusBlock block_from_json(const Json &doc, int index) {
  CorpusBlock block{index, {}};
  const Json &sentences = member(doc, "sentences");
  if (!sentences.is_array()) bad_doc("'sentences' is not an array");
  for (const Json &js : sentences) {
    Sentence s;
    s.id = text_member(js, "id");
    const auto genre = parse_genre(text_member(js, "genre"));
    if (!genre) bad_doc("unknown genre in '" + s.id + "'");
    s.genre = *genre;
    if (js.contains("source")) {
      for (const Json &pair : js.at("source")) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          bad_doc("source entries are [key, value] pairs");
        }
        s.source.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    }
    if (js.contains("align_error")) s.align_error = js.at("align_error").get<bool>();
    const Json &tokens = member(js, "tokens");
    if (!tokens.is_array()) bad_doc("'tokens' is not an array");
    for (const Json &jt : tokens) {
      AnnotatedToken t(text_member(jt, "surface"));
      const Json &cells = member(jt, "cells");
      for (Level level : kAllLevels) {
        const Json &cell = member(cells, std::string(level_name(level)).c_str());
        const auto status = parse_status_name(text_member(cell, "status"));
        if (!status) bad_doc("unknown status");
        try {
          if (*status == Status::kEmpty) {
            t.clear(level);
          } else {
            t.set(level, text_member(cell, "value"), *status);
          }
        } catch (const Error &e) {
          if (e.code() == ErrorCode::kInvalidArgument) throw;
          throw with_location(e, s.id, static_cast<int>(s.tokens.size()), level);
        }
      }
      s.tokens.push_back(std::move(t));
    }
    block.content.sentences.push_back(std::move(s));
  }
  return block;
}

Service::Service(std::filesystem::path root, ServiceOptions options)
    : store_(std::move(root)), options_(std::move(options)) {
  worker_ = std::thread([this] { worker_loop(); });
}

Service::~Service() {
  {
    std::lock_guard lock(jobs_mutex_);
    stopping_ = true;
  }
  jobs_cv_.notify_all();
  worker_.join();
}

Json Service::list_blocks() const {
  Json out = Json::array();
  for (int i : store_.block_indices()) {
    const CorpusBlock block = store_.read_block(i);
    out.push_back(Json{{"index", i},
                       {"sentences", block.content.sentences.size()},
                       {"tokens", block.content.token_count()},
                       {"summary", summary_to_json(block.summary())}});
  }
  return Json{{"blocks", out}};
}

Json Service::get_block(int index) const { return block_to_json(store_.read_block(index)); }

MergeSummary Service::submit_corrections(int index, const Json &doc) {
  std::lock_guard writer(writer_);
  {
    std::lock_guard lock(jobs_mutex_);
    if (active_target_ == index) {
      throw Error(ErrorCode::kBusy,
                  "block " + std::to_string(index) + " is being annotated by job " +
                      std::to_string(*active_train_));
    }
  }
  if (doc.is_object() && doc.contains("sentences")) {
    const MergeSummary summary = import_corrections(index, block_from_json(doc, index), store_);
    evaluate_block(index, store_);
    return summary;
  }
  if (!doc.is_object()) bad_doc("expected an object");
  for (const auto &[key, value] : doc.items()) {
    if (key != "edits" && key != "confirm") bad_doc("unknown key '" + key + "'");
  }
  CorpusBlock block = store_.read_block(index);
  for (const Json &edit : entries(doc, "edits")) {
    const CellRef ref = resolve(block.content, edit);
    AnnotatedToken &t = ref.sentence->tokens[static_cast<size_t>(ref.token)];
    const Json &value = member(edit, "value");
    try {
      if (value.is_null() || (value.is_string() && value.get<std::string>() == kEmptyValue)) {
        t.clear(ref.level);
      } else if (value.is_string()) {
        t.set(ref.level, value.get<std::string>(), Status::kGold);
      } else {
        bad_doc("'value' is not a string");
      }
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kInvalidArgument) throw;
      throw with_location(e, ref.sentence->id, ref.token, ref.level);
    }
  }
  for (const Json &entry : entries(doc, "confirm")) {
    const CellRef ref = resolve(block.content, entry);
    AnnotatedToken &t = ref.sentence->tokens[static_cast<size_t>(ref.token)];
    if (t.cell(ref.level).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "cannot confirm an empty cell",
                  CellLocation{ref.sentence->id, ref.token, std::string(level_name(ref.level))});
    }
    t.set(ref.level, std::string(t.value(ref.level)), Status::kGold);
  }
  const MergeSummary summary = import_corrections(index, block, store_);
  evaluate_block(index, store_);
  return summary;
}

StepPlan Service::next_plan(const Json &overrides) const {
  std::set<int> steps;
  std::set<int> targets;
  for (const Json &e : store_.read_journal()) {
    if (e.value("event", "") != "annotated") continue;
    steps.insert(e.at("step").get<int>());
    targets.insert(e.at("record").at("target_block").get<int>());
  }
  StepPlan plan;
  plan.step = steps.empty() ? 0 : *steps.rbegin() + 1;
  plan.aux = options_.aux;
  plan.annotated_blocks.assign(targets.begin(), targets.end());
  plan.strategy = options_.strategy;
  plan.pretrained = options_.pretrained;
  plan.model = options_.model;
  plan.input_mode = options_.model.input_mode;
  plan.schedule = options_.schedule;
  plan.target_block = -1;
  for (int i : store_.block_indices()) {
    if (!targets.count(i)) {
      plan.target_block = i;
      break;
    }
  }
  if (!overrides.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "training request must be an object");
  }
  Json doc = plan_to_json(plan);
  doc.merge_patch(overrides);
  plan = plan_from_json(doc);
  if (plan.target_block < 0) throw Error(ErrorCode::kNotFound, "every block is annotated");
  return plan;
}

JobStatus Service::trigger_training(const Json &overrides) {
  std::lock_guard writer(writer_);
  {
    std::lock_guard lock(jobs_mutex_);
    if (active_train_) {
      throw Error(ErrorCode::kBusy,
                  "training job " + std::to_string(*active_train_) + " is " +
                      std::string(job_state_name(jobs_.at(*active_train_).state)));
    }
  }
  const StepPlan plan = next_plan(overrides);
  plan.validate();
  std::lock_guard lock(jobs_mutex_);
  JobStatus job;
  job.id = next_id_++;
  job.total = static_cast<size_t>(plan.schedule.epochs);
  jobs_[job.id] = job;
  queue_.emplace_back(job.id, plan);
  active_train_ = job.id;
  active_target_ = plan.target_block;
  jobs_cv_.notify_all();
  return job;
}

JobStatus Service::job(int id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kNotFound, "no job " + std::to_string(id));
  return it->second;
}

JobStatus Service::wait(int id) const {
  std::unique_lock lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw Error(ErrorCode::kNotFound, "no job " + std::to_string(id));
  jobs_cv_.wait(lock, [&] { return it->second.finished(); });
  return it->second;
}

void Service::update(int id, const std::function<void(JobStatus &)> &fn) {
  {
    std::lock_guard lock(jobs_mutex_);
    fn(jobs_.at(id));
  }
  jobs_cv_.notify_all();
}

void Service::worker_loop() {
  for (;;) {
    std::pair<int, StepPlan> next;
    {
      std::unique_lock lock(jobs_mutex_);
      jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      next = std::move(queue_.front());
      queue_.pop_front();
    }
    run_job(next.first, next.second);
  }
}

void Service::run_job(int id, const StepPlan &plan) {
  update(id, [](JobStatus &j) { j.state = JobState::kRunning; });
  StepOptions step;
  step.on_epoch = [&](const nn::EpochLog &log, const nn::Model &) {
    JobStatus snapshot;
    {
      std::lock_guard lock(jobs_mutex_);
      if (stopping_) throw Error(ErrorCode::kBusy, "service is shutting down");
      snapshot = jobs_.at(id);
    }
    snapshot.progress = static_cast<size_t>(log.epoch);
    if (options_.on_epoch) options_.on_epoch(snapshot);
    update(id, [&](JobStatus &j) { j.progress = snapshot.progress; });
    return false;
  };
  try {
    const StepRecord record = run_annotation_step(plan, store_, step);
    update(id, [&](JobStatus &j) {
      j.state = JobState::kDone;
      j.checkpoint = record.checkpoint;
      j.record = record;
      active_train_.reset();
      active_target_.reset();
    });
  } catch (const Error &e) {
    update(id, [&](JobStatus &j) {
      j.state = JobState::kFailed;
      j.error = std::string(code_name(e.code()));
      j.detail = e.detail();
      active_train_.reset();
      active_target_.reset();
    });
  } catch (const std::exception &e) {
    update(id, [&](JobStatus &j) {
      j.state = JobState::kFailed;
      j.error = std::string(code_name(ErrorCode::kIo));
      j.detail = e.what();
      active_train_.reset();
      active_target_.reset();
    });
  }
}

Json Service::stats() const {
  Corpus all;
  LevelSummary levels{};
  Json blocks = Json::array();
  for (int i : store_.block_indices()) {
    const CorpusBlock block = store_.read_block(i);
    const LevelSummary s = block.summary();
    for (size_t l = 0; l < kNumLevels; ++l) {
      levels[l].gold += s[l].gold;
      levels[l].predicted += s[l].predicted;
      levels[l].empty += s[l].empty;
    }
    all.sentences.insert(all.sentences.end(), block.content.sentences.begin(),
                         block.content.sentences.end());
  }
  const CorpusStats cs = compute_stats(all);
  auto row = [](const std::string &name, const StatsRow &r) {
    return Json{{"genre", name},
                {"sentences", r.sentences},
                {"words", r.words},
                {"average", r.average_text()}};
  };
  Json genres = Json::array({row("total", cs.total)});
  for (Genre g : kAllGenres) genres.push_back(row(std::string(genre_name(g)), cs.genres[static_cast<size_t>(g)]));

  std::map<int, Json> steps;
  for (const Json &e : store_.read_journal()) {
    const std::string event = e.value("event", "");
    if (event == "annotated" || event == "evaluated") steps[e.at("step").get<int>()] = e.at("record");
  }
  Json records = Json::array();
  for (const auto &[step, record] : steps) records.push_back(record);

  Json active = nullptr;
  {
    std::lock_guard lock(jobs_mutex_);
    if (active_train_) active = *active_train_;
  }
  return Json{{"blocks", store_.block_indices().size()},
              {"tokens", all.token_count()},
              {"levels", summary_to_json(levels)},
              {"genres", genres},
              {"steps", records},
              {"active_job", active}};
}

Json Service::report(int step) const {
  const auto tsv = store_.read_report(step);
  if (!tsv) throw Error(ErrorCode::kNotFound, "no report for step " + std::to_string(step));
  Json record = nullptr;
  for (const Json &e : store_.read_journal()) {
    if (e.value("event", "") == "evaluated" && e.value("step", -1) == step) record = e.at("record");
  }
  return Json{{"step", step}, {"tsv", *tsv}, {"record", record}};
}

}  // namespace tarc
