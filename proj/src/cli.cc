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

#include "tarc/cli.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

#include "tarc/checkpoint.h"
#include "tarc/config.h"
#include "tarc/error.h"
#include "tarc/harness.h"
#include "tarc/http.h"
#include "tarc/predict.h"
#include "tarc/service.h"
#include "tarc/train.h"

// Last: see http.cc.
#include <httplib.h>

namespace tarc {

namespace {

namespace fs = std::filesystem;

// Top-level config document:
//   {"model": {...}, "schedule": {...}, "split": {...}, "aux": name,
//    "strategy": "concat", "pretrained": id, "plans": [...]}
struct Settings {
  Json model = Json::object();
  Json schedule = Json::object();
  Json split = Json::object();
  std::optional<std::string> aux;
  Strategy strategy = Strategy::kConcat;
  std::optional<std::string> pretrained;
  Json plans = Json::array();
};

Settings load_settings(const std::string &path, std::optional<uint64_t> seed) {
  Settings s;
  if (!path.empty()) {
    const Json doc = read_json_file(path);
    if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "config: expected an object");
    for (const auto &[key, value] : doc.items()) {
      try {
        if (key == "model") {
          s.model = value;
        } else if (key == "schedule") {
          s.schedule = value;
        } else if (key == "split") {
          s.split = value;
        } else if (key == "aux") {
          s.aux = value.get<std::string>();
        } else if (key == "pretrained") {
          s.pretrained = value.get<std::string>();
        } else if (key == "strategy") {
          const auto parsed = parse_strategy(value.get<std::string>());
          if (!parsed) throw Error(ErrorCode::kInvalidConfig, "config: unknown strategy");
          s.strategy = *parsed;
        } else if (key == "plans") {
          s.plans = value;
        } else {
          throw Error(ErrorCode::kInvalidConfig, "config: unknown key '" + key + "'");
        }
      } catch (const Json::exception &e) {
        throw Error(ErrorCode::kInvalidConfig, "config: " + key + ": " + e.what());
      }
    }
  }
  if (seed) {
    s.schedule["seed"] = *seed;
    s.split["seed"] = *seed;
  }
  return s;
}

std::vector<StepPlan> load_plans(const Settings &s, const std::string &path,
                                 std::optional<uint64_t> seed) {
  Json doc{{"model", s.model}, {"schedule", s.schedule}, {"plans", s.plans}};
  if (!path.empty()) {
    const Json file = read_json_file(path);
    if (file.is_array()) {
      doc["plans"] = file;
    } else {
      doc = file;
      if (!doc.contains("model")) doc["model"] = s.model;
      if (!doc.contains("schedule")) doc["schedule"] = s.schedule;
    }
  }
  std::vector<StepPlan> plans = plans_from_json(doc);
  if (seed) {
    for (StepPlan &p : plans) p.schedule.seed = *seed;
  }
  if (plans.empty()) throw Error(ErrorCode::kInvalidConfig, "no plans given");
  return plans;
}

void write_text(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << text;
}

Corpus strip(Corpus corpus) {
  for (Sentence &s : corpus.sentences) {
    for (AnnotatedToken &t : s.tokens) {
      for (Level level : kAllLevels) t.clear(level);
    }
  }
  return corpus;
}

std::string location_text(const Error &e) {
  const auto &loc = e.location();
  if (!loc) return "";
  std::string text = " (sentence '" + loc->sentence_id + "'";
  if (loc->token >= 0) text += ", token " + std::to_string(loc->token);
  if (!loc->level.empty()) text += ", " + loc->level;
  return text + ")";
}

int exit_code(ErrorCode code) {
  return code == ErrorCode::kInvalidArgument || code == ErrorCode::kInvalidConfig ? kExitUsage
                                                                                  : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Annotation workbench for multi-level Arabizi corpora", "tarc"};
  app.fallthrough();
  app.require_subcommand(1);

  std::optional<uint64_t> seed;
  std::string config_path;
  std::string store_dir = "store";
  app.add_option("--seed", seed, "Seed for splits and training");
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--store", store_dir, "Campaign store directory");

  std::function<int()> action;

  // stats
  std::string stats_corpus;
  bool stats_tsv = false;
  auto *stats = app.add_subcommand("stats", "Sentence and word counts per genre");
  stats->add_option("corpus", stats_corpus, "Corpus TSV")->required()->check(CLI::ExistingFile);
  stats->add_flag("--tsv", stats_tsv, "Tab-separated output");
  stats->callback([&] {
    action = [&] {
      const CorpusStats cs = compute_stats(read_corpus_file(stats_corpus));
      out << (stats_tsv ? format_stats_tsv(cs) : format_stats_table(cs));
      return kExitOk;
    };
  });

  // validate
  std::string validate_corpus_path;
  auto *validate = app.add_subcommand("validate", "Check corpus invariants");
  validate->add_option("corpus", validate_corpus_path, "Corpus TSV")
      ->required()
      ->check(CLI::ExistingFile);
  validate->callback([&] {
    action = [&] {
      const ValidationReport report =
          validate_corpus(read_corpus_file(validate_corpus_path, ParseMode::kLenient));
      auto print = [&](const char *kind, const Violation &v) {
        out << kind << '\t' << v.rule << '\t' << v.sentence_id << '\t' << v.token << '\t'
            << v.detail << '\n';
      };
      for (const Violation &v : report.errors) print("error", v);
      for (const Violation &v : report.warnings) print("warning", v);
      err << report.errors.size() << " errors, " << report.warnings.size() << " warnings\n";
      return report.ok() ? kExitOk : kExitFailure;
    };
  });

  // split
  std::string split_corpus;
  std::string split_mode;
  std::vector<double> ratios;
  std::string split_out;
  auto *split = app.add_subcommand("split", "Train/dev/test manifests");
  split->add_option("corpus", split_corpus, "Corpus TSV")->required()->check(CLI::ExistingFile);
  split->add_option("--mode", split_mode, "genre or global")
      ->check(CLI::IsMember({"genre", "global"}));
  split->add_option("--ratios", ratios, "Train, dev and test ratios")->expected(3);
  split->add_option("--out", split_out, "Directory for train.ids, dev.ids, test.ids");
  split->callback([&] {
    action = [&] {
      const Settings s = load_settings(config_path, seed);
      SplitSpec spec = split_spec_from_json(s.split);
      if (!split_mode.empty()) spec.mode = split_mode == "genre" ? SplitMode::kGenre : SplitMode::kGlobal;
      if (!ratios.empty()) {
        spec.train = ratios[0];
        spec.dev = ratios[1];
        spec.test = ratios[2];
      }
      const Splits parts = make_splits(read_corpus_file(split_corpus), spec);
      const std::array<std::pair<const char *, const Corpus *>, 3> named = {
          {{"train", &parts.train}, {"dev", &parts.dev}, {"test", &parts.test}}};
      if (!split_out.empty()) {
        fs::create_directories(split_out);
        for (const auto &[name, part] : named) {
          write_text((fs::path(split_out) / (std::string(name) + ".ids")).string(),
                     format_manifest(*part));
          out << name << '\t' << part->sentences.size() << '\t' << part->token_count() << '\n';
        }
      } else {
        for (const auto &[name, part] : named) out << "## " << name << '\n' << format_manifest(*part);
      }
      return kExitOk;
    };
  });

  // blocks
  std::string blocks_corpus;
  size_t block_tokens = 6000;
  bool blocks_raw = false;
  bool blocks_force = false;
  std::string blocks_aux;
  auto *blocks = app.add_subcommand("blocks", "Load a corpus into the store");
  blocks->add_option("corpus", blocks_corpus, "Corpus TSV")->required()->check(CLI::ExistingFile);
  blocks->add_option("--tokens", block_tokens, "Target tokens per block")
      ->check(CLI::PositiveNumber);
  blocks->add_flag("--raw", blocks_raw, "Drop all annotations");
  blocks->add_flag("--force", blocks_force, "Replace existing blocks");
  blocks->add_option("--aux", blocks_aux, "Store as the named auxiliary corpus instead");
  blocks->callback([&] {
    action = [&] {
      Store store(store_dir);
      Corpus corpus = read_corpus_file(blocks_corpus);
      if (blocks_raw) corpus = strip(std::move(corpus));
      if (!blocks_aux.empty()) {
        store.write_aux(blocks_aux, corpus);
        out << "aux\t" << blocks_aux << '\t' << corpus.token_count() << '\n';
        return kExitOk;
      }
      if (!blocks_force && !store.block_indices().empty()) {
        throw Error(ErrorCode::kInvalidArgument, "store already has blocks; pass --force");
      }
      for (const CorpusBlock &b : split_blocks(corpus, block_tokens)) {
        store.write_block(b);
        out << b.index << '\t' << b.content.sentences.size() << '\t' << b.content.token_count()
            << '\n';
      }
      return kExitOk;
    };
  });

  // train
  std::string train_corpus;
  std::string train_dev;
  std::string train_out;
  auto *train = app.add_subcommand("train", "Train a model on a corpus");
  train->add_option("--corpus", train_corpus, "Training corpus TSV")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--dev", train_dev, "Dev corpus TSV")->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->callback([&] {
    action = [&] {
      const Settings s = load_settings(config_path, seed);
      const nn::ModelConfig config = model_config_from_json(s.model);
      const nn::TrainSchedule schedule = schedule_from_json(s.schedule);
      const Corpus data = gold_view(read_corpus_file(train_corpus));
      nn::Model model = nn::make_model(config, build_vocabularies(data));
      const auto train_set = encode_corpus(data, model.vocabs, config.input_mode);
      std::vector<EncodedExample> dev_set;
      if (!train_dev.empty()) {
        dev_set = encode_corpus(gold_view(read_corpus_file(train_dev)), model.vocabs,
                                config.input_mode);
      }
      const nn::TrainLog log = nn::train(model, train_set, dev_set, schedule);
      nn::save_checkpoint(train_out, model, Json{{"schedule", schedule_to_json(schedule)}});
      out << log.to_tsv();
      return kExitOk;
    };
  });

  // annotate
  std::string annotate_checkpoint;
  std::string annotate_corpus_path;
  std::string annotate_out;
  auto *annotate = app.add_subcommand("annotate", "Predict annotations with a checkpoint");
  annotate->add_option("--checkpoint", annotate_checkpoint, "Checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  annotate->add_option("--corpus", annotate_corpus_path, "Corpus TSV")
      ->required()
      ->check(CLI::ExistingFile);
  annotate->add_option("--out", annotate_out, "Output TSV (default stdout)");
  annotate->callback([&] {
    action = [&] {
      const nn::Model model = nn::load_checkpoint(annotate_checkpoint);
      const Corpus result = nn::annotate_corpus(model, read_corpus_file(annotate_corpus_path));
      if (annotate_out.empty()) {
        out << serialize_corpus(result);
      } else {
        write_corpus_file(annotate_out, result);
      }
      return kExitOk;
    };
  });

  // evaluate
  std::string eval_pred;
  std::string eval_gold;
  std::vector<std::string> eval_levels;
  auto *evaluate_cmd = app.add_subcommand("evaluate", "Per-task accuracy against gold");
  evaluate_cmd->add_option("--pred", eval_pred, "Predicted corpus TSV")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--gold", eval_gold, "Gold corpus TSV")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--levels", eval_levels, "Levels to score (default all)")
      ->check(CLI::IsMember({"cl", "ar", "tk", "pos", "lm"}));
  evaluate_cmd->callback([&] {
    action = [&] {
      std::vector<Level> levels;
      for (const std::string &name : eval_levels) levels.push_back(*parse_level(name));
      if (levels.empty()) levels.assign(kAllLevels.begin(), kAllLevels.end());
      const Corpus gold = read_corpus_file(eval_gold, ParseMode::kLenient);
      const EvalReport r =
          evaluate(CorpusBlock{0, read_corpus_file(eval_pred, ParseMode::kLenient)},
                   CorpusBlock{0, gold_view(gold)}, levels);
      out << "task\tcorrect\tevaluated\taccuracy\n";
      for (Level level : levels) {
        out << level_name(level) << '\t' << r.correct[level_index(level)] << '\t'
            << r.evaluated[level_index(level)] << '\t' << r.accuracy_text(level) << '\n';
      }
      return kExitOk;
    };
  });

  // campaign
  std::string plans_path;
  std::vector<std::string> imports;
  bool pretrain = false;
  auto *campaign = app.add_subcommand("campaign", "Run or resume the annotation campaign");
  campaign->add_option("--plans", plans_path, "Plans JSON (default: config \"plans\")")
      ->check(CLI::ExistingFile);
  campaign->add_option("--import", imports, "Import corrections first: BLOCK=FILE");
  campaign->add_flag("--pretrain", pretrain, "Pretrain missing RELOADED checkpoints on aux");
  campaign->callback([&] {
    action = [&] {
      const Settings s = load_settings(config_path, seed);
      const std::vector<StepPlan> plans = load_plans(s, plans_path, seed);
      Store store(store_dir);
      for (const std::string &spec : imports) {
        const size_t eq = spec.find('=');
        int block = -1;
        try {
          if (eq != std::string::npos) block = std::stoi(spec.substr(0, eq));
        } catch (const std::exception &) {
        }
        if (block < 0) throw Error(ErrorCode::kInvalidArgument, "--import expects BLOCK=FILE");
        const Corpus corrected = read_corpus_file(spec.substr(eq + 1), ParseMode::kLenient);
        const MergeSummary m = import_corrections(block, CorpusBlock{block, corrected}, store);
        err << "block " << block << ": " << m.to_json().dump() << '\n';
      }
      if (pretrain) {
        for (const StepPlan &p : plans) {
          if (p.strategy != Strategy::kReloaded || !p.pretrained || !p.aux ||
              store.has_checkpoint(*p.pretrained)) {
            continue;
          }
          pretrain_on_aux(store, *p.aux, p.model, p.schedule, *p.pretrained);
        }
      }
      const CampaignResult r = run_campaign(plans, store);
      out << format_accounting(r.records);
      if (r.awaiting_block) err << "awaiting corrections for block " << *r.awaiting_block << '\n';
      return kExitOk;
    };
  });

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  auto *serve = app.add_subcommand("serve", "HTTP service for the correction UI");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve->callback([&] {
    action = [&] {
      const Settings s = load_settings(config_path, seed);
      ServiceOptions options;
      options.aux = s.aux;
      options.strategy = s.strategy;
      options.pretrained = s.pretrained;
      options.model = model_config_from_json(s.model);
      options.schedule = schedule_from_json(s.schedule);
      Service service(store_dir, options);
      httplib::Server server;
      install_routes(server, service, http_options_from_env());
      err << "listening on " << host << ':' << port << '\n';
      if (!server.listen(host, port)) {
        throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
      }
      return kExitOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &) {
    const auto parsed = app.get_subcommands();
    out << (parsed.empty() ? app.help() : parsed.back()->help());
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    const auto parsed = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (parsed.empty() ? app.help() : parsed.back()->help());
    return kExitUsage;
  }

  try {
    return action();
  } catch (const Error &e) {
    err << "error: " << code_name(e.code()) << ": " << e.detail() << location_text(e) << '\n';
    return exit_code(e.code());
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace tarc
