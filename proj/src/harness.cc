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

#include "tarc/harness.h"

#include <algorithm>
#include <map>

#include "tarc/checkpoint.h"
#include "tarc/error.h"
#include "tarc/predict.h"

namespace tarc {

std::string_view strategy_name(Strategy strategy) {
  return strategy == Strategy::kConcat ? "concat" : "reloaded";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "concat") return Strategy::kConcat;
  if (name == "reloaded") return Strategy::kReloaded;
  return std::nullopt;
}

void StepPlan::validate() const {
  auto fail = [&](const std::string &what) {
    throw Error(ErrorCode::kInvalidArgument, "step " + std::to_string(step) + ": " + what);
  };
  if (step < 0) fail("step index must be >= 0");
  if (target_block < 0) fail("target block must be >= 0");
  std::vector<int> sorted = annotated_blocks;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail("annotated blocks repeat");
  }
  if (std::count(sorted.begin(), sorted.end(), target_block) > 0) {
    fail("target block " + std::to_string(target_block) + " is already annotated");
  }
  if (annotated_blocks.empty() && !aux) fail("no annotated blocks and no auxiliary corpus");
  if (strategy == Strategy::kReloaded && !pretrained) fail("RELOADED needs a pretrained checkpoint");
  if (model.input_mode != input_mode) fail("model input mode differs from the plan");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) fail("dev fraction must be in [0, 1)");
  model.validate();
  schedule.validate();
}

Json plan_to_json(const StepPlan &p) {
  Json doc{{"step", p.step}};
  doc["aux"] = p.aux ? Json(*p.aux) : Json(nullptr);
  doc["annotated_blocks"] = p.annotated_blocks;
  doc["target_block"] = p.target_block;
  doc["strategy"] = std::string(strategy_name(p.strategy));
  doc["input_mode"] = std::string(input_mode_name(p.input_mode));
  doc["model"] = model_config_to_json(p.model);
  doc["schedule"] = schedule_to_json(p.schedule);
  doc["pretrained"] = p.pretrained ? Json(*p.pretrained) : Json(nullptr);
  doc["dev_fraction"] = p.dev_fraction;
  return doc;
}

namespace {

[[noreturn]] void bad_plan(const std::string &what) {
  throw Error(ErrorCode::kInvalidConfig, "plan: " + what);
}

Json merged(const Json &defaults, const Json *overrides) {
  Json out = defaults.is_object() ? defaults : Json::object();
  if (overrides != nullptr) {
    if (!overrides->is_object()) bad_plan("expected an object");
    for (const auto &item : overrides->items()) out[item.key()] = item.value();
  }
  return out;
}

std::optional<std::string> optional_text(const Json &doc, const char *key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) bad_plan(std::string(key) + ": expected a string");
  return it->get<std::string>();
}

}  // namespace

StepPlan plan_from_json(const Json &doc, const Json &model_defaults,
                        const Json &schedule_defaults) {
  if (!doc.is_object()) bad_plan("expected an object");
  static const std::vector<std::string> kKeys = {
      "step",   "aux",      "annotated_blocks", "target_block", "strategy",    "input_mode",
      "model",  "schedule", "pretrained",       "dev_fraction"};
  for (const auto &item : doc.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), item.key()) == kKeys.end()) {
      bad_plan("unknown key '" + item.key() + "'");
    }
  }
  StepPlan p;
  try {
    p.step = doc.at("step").get<int>();
    p.target_block = doc.at("target_block").get<int>();
    p.aux = optional_text(doc, "aux");
    p.pretrained = optional_text(doc, "pretrained");
    if (doc.contains("annotated_blocks")) {
      p.annotated_blocks = doc.at("annotated_blocks").get<std::vector<int>>();
    }
    if (auto s = optional_text(doc, "strategy")) {
      auto parsed = parse_strategy(*s);
      if (!parsed) bad_plan("unknown strategy '" + *s + "'");
      p.strategy = *parsed;
    }
    if (auto m = optional_text(doc, "input_mode")) {
      auto parsed = parse_input_mode(*m);
      if (!parsed) bad_plan("unknown input mode '" + *m + "'");
      p.input_mode = *parsed;
    }
    if (doc.contains("dev_fraction")) p.dev_fraction = doc.at("dev_fraction").get<double>();
  } catch (const Json::exception &e) {
    bad_plan(e.what());
  }
  auto find = [&](const char *key) -> const Json * {
    auto it = doc.find(key);
    return it == doc.end() ? nullptr : &*it;
  };
  Json model = merged(model_defaults, find("model"));
  if (!model.contains("input_mode")) model["input_mode"] = std::string(input_mode_name(p.input_mode));
  p.model = model_config_from_json(model);
  p.schedule = schedule_from_json(merged(schedule_defaults, find("schedule")));
  return p;
}

std::vector<StepPlan> plans_from_json(const Json &doc) {
  if (!doc.is_object() || !doc.contains("plans") || !doc["plans"].is_array()) {
    throw Error(ErrorCode::kInvalidConfig, "expected {\"plans\": [...]}");
  }
  const Json model = doc.value("model", Json::object());
  const Json schedule = doc.value("schedule", Json::object());
  std::vector<StepPlan> plans;
  for (const Json &p : doc["plans"]) plans.push_back(plan_from_json(p, model, schedule));
  return plans;
}

std::string TokenAccount::text() const {
  return with_thousands(total()) + " (" + with_thousands(primary) + ")";
}

std::optional<long> EvalReport::hundredths(Level level) const {
  const size_t i = level_index(level);
  if (!scored[i] || evaluated[i] == 0) return std::nullopt;
  // round(100 * 100 * correct / evaluated), halves up, in integers.
  return static_cast<long>((correct[i] * 20000 + evaluated[i]) / (2 * evaluated[i]));
}

std::optional<double> EvalReport::accuracy(Level level) const {
  auto h = hundredths(level);
  if (!h) return std::nullopt;
  return static_cast<double>(*h) / 100.0;
}

std::string EvalReport::accuracy_text(Level level) const {
  auto h = hundredths(level);
  if (!h) return "-";
  const std::string frac = std::to_string(*h % 100);
  return std::to_string(*h / 100) + "." + (frac.size() == 1 ? "0" + frac : frac);
}

namespace {

void check_shape(const Corpus &a, const Corpus &b, const char *what) {
  auto mismatch = [&](const std::string &detail, const std::string &id, int token) {
    throw Error(ErrorCode::kBlockShapeMismatch, std::string(what) + ": " + detail,
                CellLocation{id, token, ""});
  };
  if (a.sentences.size() != b.sentences.size()) {
    mismatch(std::to_string(b.sentences.size()) + " sentences, expected " +
                 std::to_string(a.sentences.size()),
             "", -1);
  }
  for (size_t i = 0; i < a.sentences.size(); ++i) {
    const Sentence &x = a.sentences[i];
    const Sentence &y = b.sentences[i];
    if (x.id != y.id) mismatch("sentence " + std::to_string(i) + " is '" + y.id + "'", x.id, -1);
    if (x.tokens.size() != y.tokens.size()) {
      mismatch(std::to_string(y.tokens.size()) + " tokens, expected " +
                   std::to_string(x.tokens.size()),
               x.id, -1);
    }
    for (size_t k = 0; k < x.tokens.size(); ++k) {
      if (x.tokens[k].surface() != y.tokens[k].surface()) {
        mismatch("surface '" + y.tokens[k].surface() + "', expected '" + x.tokens[k].surface() +
                     "'",
                 x.id, static_cast<int>(k));
      }
    }
  }
}

}  // namespace

EvalReport evaluate(const CorpusBlock &predictions, const CorpusBlock &gold,
                    const std::vector<Level> &levels) {
  check_shape(gold.content, predictions.content, "evaluate");
  EvalReport r;
  for (Level level : levels) r.scored[level_index(level)] = true;
  for (size_t i = 0; i < gold.content.sentences.size(); ++i) {
    const Sentence &g = gold.content.sentences[i];
    const Sentence &p = predictions.content.sentences[i];
    if (p.align_error) ++r.align_errors;
    r.tokens += g.tokens.size();
    for (size_t k = 0; k < g.tokens.size(); ++k) {
      for (Level level : levels) {
        const Cell &gc = g.tokens[k].cell(level);
        if (gc.empty()) continue;
        const Cell &pc = p.tokens[k].cell(level);
        ++r.evaluated[level_index(level)];
        if (!pc.empty() && pc.value == gc.value) ++r.correct[level_index(level)];
      }
    }
  }
  return r;
}

namespace {

Json eval_to_json(const EvalReport &r) {
  Json tasks = Json::object();
  for (Level level : kAllLevels) {
    const size_t i = level_index(level);
    if (!r.scored[i]) continue;
    tasks[std::string(level_name(level))] = {{"correct", r.correct[i]},
                                             {"evaluated", r.evaluated[i]},
                                             {"accuracy", r.accuracy_text(level)}};
  }
  return Json{{"tasks", tasks}, {"tokens", r.tokens}, {"align_errors", r.align_errors}};
}

EvalReport eval_from_json(const Json &doc) {
  EvalReport r;
  for (const auto &item : doc.at("tasks").items()) {
    auto level = parse_level(item.key());
    if (!level) throw Error(ErrorCode::kInvalidConfig, "unknown task in report");
    const size_t i = level_index(*level);
    r.scored[i] = true;
    r.correct[i] = item.value().at("correct").get<size_t>();
    r.evaluated[i] = item.value().at("evaluated").get<size_t>();
  }
  r.tokens = doc.at("tokens").get<size_t>();
  r.align_errors = doc.at("align_errors").get<size_t>();
  return r;
}

}  // namespace

Json record_to_json(const StepRecord &r) {
  return Json{{"step", r.step},
              {"strategy", std::string(strategy_name(r.strategy))},
              {"target_block", r.target_block},
              {"tokens", {{"aux", r.tokens.aux},
                          {"primary", r.tokens.primary},
                          {"total", r.tokens.total()},
                          {"text", r.tokens.text()}}},
              {"checkpoint", r.checkpoint},
              {"eval", r.eval ? eval_to_json(*r.eval) : Json(nullptr)}};
}

StepRecord record_from_json(const Json &doc) {
  StepRecord r;
  try {
    r.step = doc.at("step").get<int>();
    auto s = parse_strategy(doc.at("strategy").get<std::string>());
    if (!s) throw Error(ErrorCode::kInvalidConfig, "unknown strategy in record");
    r.strategy = *s;
    r.target_block = doc.at("target_block").get<int>();
    r.tokens.aux = doc.at("tokens").at("aux").get<size_t>();
    r.tokens.primary = doc.at("tokens").at("primary").get<size_t>();
    r.checkpoint = doc.at("checkpoint").get<std::string>();
    if (!doc.at("eval").is_null()) r.eval = eval_from_json(doc.at("eval"));
  } catch (const Json::exception &e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("malformed step record: ") + e.what());
  }
  return r;
}

Corpus gold_view(const Corpus &corpus) {
  Corpus out = corpus;
  for (Sentence &s : out.sentences) {
    for (AnnotatedToken &t : s.tokens) {
      for (Level level : kAllLevels) {
        if (!t.cell(level).gold()) t.clear(level);
      }
    }
  }
  return out;
}

namespace {

std::vector<CorpusBlock> load_blocks(const std::vector<int> &indices, const Store &store) {
  std::vector<CorpusBlock> blocks;
  for (int i : indices) blocks.push_back(store.read_block(i));
  return blocks;
}

size_t aux_tokens(const StepPlan &plan, const Store &store) {
  return plan.aux ? store.read_aux(*plan.aux).token_count() : 0;
}

// Levels the model is trained on; CODA is input in AR mode.
std::vector<Level> trained_levels(const nn::ModelConfig &config) { return config.decoder_order; }

void require_gold(const CorpusBlock &block, const nn::ModelConfig &config) {
  const std::vector<Level> levels = trained_levels(config);
  for (const Sentence &s : block.content.sentences) {
    for (size_t k = 0; k < s.tokens.size(); ++k) {
      const AnnotatedToken &t = s.tokens[k];
      const bool any = std::any_of(levels.begin(), levels.end(),
                                   [&](Level level) { return t.cell(level).gold(); });
      if (!any) {
        throw Error(ErrorCode::kMissingGold,
                    "block " + std::to_string(block.index) + " has a token without gold cells",
                    CellLocation{s.id, static_cast<int>(k), ""});
      }
      if (config.input_mode == InputMode::kAr && !t.cell(Level::kCoda).gold()) {
        throw Error(ErrorCode::kMissingGold,
                    "block " + std::to_string(block.index) + " lacks gold CODA input",
                    CellLocation{s.id, static_cast<int>(k), "ar"});
      }
    }
  }
}

// Deterministic hold-out of floor(fraction * n) sentences.
std::pair<Corpus, Corpus> hold_out(const Corpus &corpus, double fraction, uint64_t seed) {
  const size_t n = corpus.sentences.size();
  const size_t dev = std::min(n > 0 ? n - 1 : 0,
                              static_cast<size_t>(fraction * static_cast<double>(n) + 1e-9));
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<bool> is_dev(n, false);
  for (size_t i = 0; i < dev; ++i) is_dev[order[i]] = true;
  Corpus train_part, dev_part;
  for (size_t i = 0; i < n; ++i) {
    (is_dev[i] ? dev_part : train_part).sentences.push_back(corpus.sentences[i]);
  }
  return {train_part, dev_part};
}

nn::TrainLog fit(nn::Model &model, const Corpus &data, const StepPlan &plan,
                 const StepOptions &options) {
  auto [train_part, dev_part] = hold_out(data, plan.dev_fraction, plan.schedule.seed);
  const auto train_ex = encode_corpus(train_part, model.vocabs, plan.input_mode);
  const auto dev_ex = encode_corpus(dev_part, model.vocabs, plan.input_mode);
  return nn::train(model, train_ex, dev_ex, plan.schedule, options.on_epoch);
}

// Input cells kept for decoding; everything the model predicts is cleared.
Corpus input_only(const Corpus &corpus, InputMode mode) {
  Corpus out = corpus;
  for (Sentence &s : out.sentences) {
    s.align_error = false;
    for (AnnotatedToken &t : s.tokens) {
      for (Level level : kAllLevels) {
        if (mode == InputMode::kAr && level == Level::kCoda && t.cell(level).gold()) continue;
        t.clear(level);
      }
    }
  }
  return out;
}

}  // namespace

TokenAccount account_tokens(const StepPlan &plan, const Store &store) {
  TokenAccount account;
  account.aux = aux_tokens(plan, store);
  for (int i : plan.annotated_blocks) account.primary += store.read_block(i).content.token_count();
  return account;
}

StepRecord run_annotation_step(const StepPlan &plan, Store &store, const StepOptions &options) {
  plan.validate();
  const std::vector<CorpusBlock> blocks = load_blocks(plan.annotated_blocks, store);
  CorpusBlock target = store.read_block(plan.target_block);
  for (const CorpusBlock &b : blocks) require_gold(b, plan.model);

  Corpus primary;
  for (const CorpusBlock &b : blocks) {
    const Corpus g = gold_view(b.content);
    primary.sentences.insert(primary.sentences.end(), g.sentences.begin(), g.sentences.end());
  }

  StepRecord record;
  record.step = plan.step;
  record.strategy = plan.strategy;
  record.target_block = plan.target_block;
  record.tokens = account_tokens(plan, store);

  nn::Model model;
  if (plan.strategy == Strategy::kConcat) {
    const Corpus aux = plan.aux ? store.read_aux(*plan.aux) : Corpus{};
    const Corpus data = concat_corpora(aux, primary);
    model = nn::make_model(plan.model, build_vocabularies(data));
    fit(model, data, plan, options);
  } else {
    if (!store.has_checkpoint(*plan.pretrained)) {
      throw Error(ErrorCode::kCheckpointNotFound,
                  "no pretrained checkpoint '" + *plan.pretrained + "'");
    }
    model = nn::load_checkpoint(store.checkpoint_path(*plan.pretrained));
    if (model.config.input_mode != plan.input_mode) {
      throw Error(ErrorCode::kInvalidConfig, "pretrained checkpoint uses another input mode");
    }
    if (!primary.empty()) fit(model, primary, plan, options);
  }

  record.checkpoint = "step" + std::to_string(plan.step) + "-" +
                      std::string(strategy_name(plan.strategy));
  nn::save_checkpoint(store.checkpoint_path(record.checkpoint), model,
                      Json{{"step", plan.step}, {"plan", plan_to_json(plan)}});

  CorpusBlock predictions{target.index, input_only(target.content, plan.input_mode)};
  for (size_t i = 0; i < target.content.sentences.size(); ++i) {
    const nn::SentencePrediction pred = nn::predict_sentence(model, target.content.sentences[i]);
    nn::apply_prediction(predictions.content.sentences[i], pred);
    nn::apply_prediction(target.content.sentences[i], pred);
  }
  store.write_predictions(predictions);
  store.write_block(target);
  store.append_journal(Json{{"event", "annotated"},
                            {"step", plan.step},
                            {"plan", plan_to_json(plan)},
                            {"record", record_to_json(record)}});
  return record;
}

nn::TrainLog pretrain_on_aux(Store &store, const std::string &aux, const nn::ModelConfig &config,
                             const nn::TrainSchedule &schedule, const std::string &id,
                             const StepOptions &options) {
  const Corpus data = gold_view(store.read_aux(aux));
  nn::Model model = nn::make_model(config, build_vocabularies(data));
  const auto examples = encode_corpus(data, model.vocabs, config.input_mode);
  nn::TrainLog log = nn::train(model, examples, {}, schedule, options.on_epoch);
  nn::save_checkpoint(store.checkpoint_path(id), model, Json{{"aux", aux}});
  store.append_journal(Json{{"event", "pretrained"}, {"aux", aux}, {"checkpoint", id}});
  return log;
}

size_t MergeSummary::total() const {
  size_t n = 0;
  for (size_t c : changed) n += c;
  return n;
}

Json MergeSummary::to_json() const {
  Json per_task = Json::object();
  for (Level level : kAllLevels) per_task[std::string(level_name(level))] = changed[level_index(level)];
  return Json{{"changed", total()}, {"per_task", per_task}, {"confirmed", confirmed}};
}

MergeSummary import_corrections(int block, const CorpusBlock &corrected, Store &store) {
  const CorpusBlock stored = store.read_block(block);
  check_shape(stored.content, corrected.content, "corrections");

  MergeSummary summary;
  CorpusBlock merged = stored;
  // Levels edited per token, to point errors at an edited cell.
  std::map<std::pair<std::string, int>, Level> edited;
  for (size_t i = 0; i < merged.content.sentences.size(); ++i) {
    Sentence &s = merged.content.sentences[i];
    const Sentence &c = corrected.content.sentences[i];
    for (size_t k = 0; k < s.tokens.size(); ++k) {
      for (Level level : kAllLevels) {
        const Cell &old_cell = s.tokens[k].cell(level);
        const Cell &new_cell = c.tokens[k].cell(level);
        if (new_cell.empty() != old_cell.empty() || new_cell.value != old_cell.value) {
          if (new_cell.empty()) {
            s.tokens[k].clear(level);
          } else {
            s.tokens[k].set(level, new_cell.value, Status::kGold);
          }
          ++summary.changed[level_index(level)];
          edited.emplace(std::make_pair(s.id, static_cast<int>(k)), level);
        } else if (new_cell.gold() && !old_cell.gold()) {
          s.tokens[k].set(level, old_cell.value, Status::kGold);
          ++summary.confirmed;
        }
      }
    }
  }

  const ValidationReport report = validate_corpus(merged.content);
  if (!report.ok()) {
    const Violation &v = report.errors.front();
    CellLocation loc{v.sentence_id, v.token, ""};
    auto it = edited.find({v.sentence_id, v.token});
    if (it != edited.end()) loc.level = std::string(level_name(it->second));
    throw Error(rule_code(v.rule), v.detail, loc);
  }
  store.write_block(merged);
  store.append_journal(Json{{"event", "corrections_imported"},
                            {"block", block},
                            {"summary", summary.to_json()}});
  return summary;
}

std::string format_accounting(const std::vector<StepRecord> &records) {
  std::string out = "Step\tTrain. tokens";
  for (Level level : kAllLevels) out += "\t" + std::string(level_title(level));
  out += "\tTokens\tALIGN_ERR\n";
  for (const StepRecord &r : records) {
    out += "Step" + std::to_string(r.step) + "_" + std::string(strategy_name(r.strategy));
    out += "\t" + r.tokens.text();
    for (Level level : kAllLevels) out += "\t" + (r.eval ? r.eval->accuracy_text(level) : "-");
    out += "\t" + (r.eval ? std::to_string(r.eval->tokens) : "-");
    out += "\t" + (r.eval ? std::to_string(r.eval->align_errors) : "-");
    out += "\n";
  }
  return out;
}

namespace {

void check_continuity(const std::vector<StepPlan> &plans) {
  for (size_t k = 1; k < plans.size(); ++k) {
    const StepPlan &prev = plans[k - 1];
    const StepPlan &next = plans[k];
    if (next.step <= prev.step) {
      throw Error(ErrorCode::kPlanDiscontinuity,
                  "step " + std::to_string(next.step) + " does not follow step " +
                      std::to_string(prev.step));
    }
    const auto &blocks = next.annotated_blocks;
    if (std::find(blocks.begin(), blocks.end(), prev.target_block) == blocks.end()) {
      throw Error(ErrorCode::kPlanDiscontinuity,
                  "step " + std::to_string(next.step) + " does not train on block " +
                      std::to_string(prev.target_block) + " annotated by step " +
                      std::to_string(prev.step));
    }
  }
}

// Position of the last journal event matching pred, or -1.
template <typename Pred>
long last_event(const std::vector<Json> &journal, Pred pred) {
  for (long i = static_cast<long>(journal.size()) - 1; i >= 0; --i) {
    if (pred(journal[static_cast<size_t>(i)])) return i;
  }
  return -1;
}

bool is_event(const Json &e, const char *name) { return e.value("event", "") == name; }

}  // namespace

StepRecord evaluate_step(const StepPlan &plan, StepRecord record, Store &store) {
  const auto predictions = store.read_predictions(record.target_block);
  if (!predictions) {
    throw Error(ErrorCode::kNotFound,
                "no stored predictions for block " + std::to_string(record.target_block));
  }
  const CorpusBlock block = store.read_block(record.target_block);
  record.eval = evaluate(*predictions, CorpusBlock{block.index, gold_view(block.content)},
                         plan.model.decoder_order);
  store.append_journal(Json{{"event", "evaluated"},
                            {"step", plan.step},
                            {"record", record_to_json(record)}});
  store.write_report(plan.step, format_accounting({record}));
  return record;
}

std::optional<StepRecord> evaluate_block(int block, Store &store) {
  const std::vector<Json> journal = store.read_journal();
  for (auto it = journal.rbegin(); it != journal.rend(); ++it) {
    if (it->value("event", "") != "annotated") continue;
    const StepRecord record = record_from_json(it->at("record"));
    if (record.target_block != block) continue;
    return evaluate_step(plan_from_json(it->at("plan")), record, store);
  }
  return std::nullopt;
}

CampaignResult run_campaign(const std::vector<StepPlan> &plans, Store &store,
                            const StepOptions &options) {
  check_continuity(plans);
  CampaignResult result;
  auto finish = [&]() {
    store.write_campaign_report(format_accounting(result.records));
    return result;
  };

  for (const StepPlan &plan : plans) {
    std::vector<Json> journal = store.read_journal();
    const long annotated = last_event(journal, [&](const Json &e) {
      return is_event(e, "annotated") && e.value("step", -1) == plan.step;
    });
    StepRecord record;
    if (annotated >= 0) {
      const Json &event = journal[static_cast<size_t>(annotated)];
      if (event.at("plan") != plan_to_json(plan)) {
        throw Error(ErrorCode::kPlanDiscontinuity,
                    "plan for step " + std::to_string(plan.step) + " differs from the journal");
      }
      record = record_from_json(event.at("record"));
    } else {
      record = run_annotation_step(plan, store, options);
      journal = store.read_journal();
    }
    const long since = annotated >= 0 ? annotated : static_cast<long>(journal.size()) - 1;

    const long evaluated = last_event(journal, [&](const Json &e) {
      return is_event(e, "evaluated") && e.value("step", -1) == plan.step;
    });
    if (evaluated > since) {
      record = record_from_json(journal[static_cast<size_t>(evaluated)].at("record"));
    } else {
      const long imported = last_event(journal, [&](const Json &e) {
        return is_event(e, "corrections_imported") && e.value("block", -1) == record.target_block;
      });
      if (imported < since) {
        result.records.push_back(record);
        result.awaiting_block = record.target_block;
        return finish();
      }
      record = evaluate_step(plan, record, store);
    }
    result.records.push_back(record);
  }
  return finish();
}

}  // namespace tarc
