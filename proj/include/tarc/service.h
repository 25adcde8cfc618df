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

#ifndef TARC_SERVICE_H_
#define TARC_SERVICE_H_

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "tarc/harness.h"

namespace tarc {

enum class JobKind { kTrain, kAnnotate, kEval };
enum class JobState { kQueued, kRunning, kDone, kFailed };

std::string_view job_kind_name(JobKind kind);
std::string_view job_state_name(JobState state);

struct JobStatus {
  int id = 0;
  JobKind kind = JobKind::kTrain;
  JobState state = JobState::kQueued;
  size_t progress = 0;  // epochs finished
  size_t total = 0;     // epochs scheduled
  // DONE: checkpoint id and step record.
  std::optional<std::string> checkpoint;
  std::optional<StepRecord> record;
  // FAILED: wire code and message.
  std::optional<std::string> error;
  std::string detail;

  bool finished() const { return state == JobState::kDone || state == JobState::kFailed; }
};

Json job_to_json(const JobStatus &job);

// Block documents as served to the correction UI: every cell carries its
// value and status.
Json block_to_json(const CorpusBlock &block);
// Throws kInvalidArgument on a malformed document.
CorpusBlock block_from_json(const Json &doc, int index);

struct ServiceOptions {
  std::optional<std::string> aux;
  Strategy strategy = Strategy::kConcat;
  std::optional<std::string> pretrained;
  nn::ModelConfig model;
  nn::TrainSchedule schedule;
  // Called from the worker after every epoch of a TRAIN job, before the
  // progress counter is published. Test hook.
  std::function<void(const JobStatus &)> on_epoch;
};

// Serves one store. Reads run concurrently; corrections and job triggers go
// through a single writer lock. Training runs on a worker thread, one job at
// a time.
class Service {
 public:
  Service(std::filesystem::path root, ServiceOptions options = {});
  ~Service();
  Service(const Service &) = delete;
  Service &operator=(const Service &) = delete;

  Store &store() { return store_; }

  Json list_blocks() const;
  // Throws kNotFound.
  Json get_block(int index) const;

  // Accepts a full block document or {"edits": [...], "confirm": [...]}
  // where each entry names {"sentence", "token", "level"} and edits add
  // "value" (null or "_" clears). Throws kBusy when the block is the target
  // of a pending TRAIN job. A block annotated by an earlier step is scored
  // again after the merge.
  MergeSummary submit_corrections(int index, const Json &doc);

  // The plan for the next campaign step; `overrides` replaces plan fields.
  StepPlan next_plan(const Json &overrides = Json::object()) const;
  // Enqueues a TRAIN job running one annotation step. Throws kBusy while
  // another TRAIN job is queued or running.
  JobStatus trigger_training(const Json &overrides = Json::object());

  // Throws kNotFound.
  JobStatus job(int id) const;
  // Blocks until the job is DONE or FAILED.
  JobStatus wait(int id) const;

  Json stats() const;
  // Throws kNotFound.
  Json report(int step) const;

 private:
  void worker_loop();
  void run_job(int id, const StepPlan &plan);
  void update(int id, const std::function<void(JobStatus &)> &fn);

  Store store_;
  ServiceOptions options_;

  std::mutex writer_;
  mutable std::mutex jobs_mutex_;
  mutable std::condition_variable jobs_cv_;
  std::map<int, JobStatus> jobs_;
  std::deque<std::pair<int, StepPlan>> queue_;
  std::optional<int> active_train_;
  std::optional<int> active_target_;
  int next_id_ = 1;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace tarc

#endif  // TARC_SERVICE_H_
