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

// Acceptance runner: one PASS/FAIL line per criterion. With no arguments
// every criterion runs; otherwise only the named ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "synthetic.h"
#include "tarc/gradcheck.h"
#include "tarc/harness.h"
#include "tarc/loss.h"
#include "tarc/model.h"
#include "tarc/predict.h"
#include "tarc/train.h"

using namespace tarc;
using namespace tarc::nn;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradEpsilon = 1e-4;
constexpr double kGradMaxRelError = 1e-3;
constexpr size_t kGradCoordinates = 300;
constexpr size_t kGradMaxParams = 5000;
constexpr double kGradSeconds = 60.0;

constexpr int kLossTrials = 100;
constexpr double kLossOracleRelTol = 1e-12;

constexpr int kOverfitSentences = 20;
constexpr int kOverfitMaxEpochs = 500;
constexpr int kOverfitCheckEvery = 10;
constexpr long kOverfitMinHundredths = 9500;
constexpr double kOverfitSeconds = 300.0;

constexpr double kXavierVarianceTol = 0.10;

constexpr int kSplitCorpora = 1000;
constexpr int kEvalPairs = 100;

constexpr long kEndToEndMinClassHundredths = 9000;
constexpr double kEndToEndDefaultSeconds = 600.0;
constexpr double kEndToEndMaxSeconds = 7200.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void note(const std::string &line) { std::cout << "  " << line << '\n'; }

Corpus bare(Corpus corpus) {
  for (Sentence &s : corpus.sentences) {
    for (AnnotatedToken &t : s.tokens) {
      for (Level level : kAllLevels) t.clear(level);
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------

Outcome gradient_check() {
  const Corpus corpus = testing::excerpt_corpus();
  const Vocabularies vocabs = build_vocabularies(corpus);
  ModelConfig c;
  c.embedding_size = 4;
  c.hidden_size = 6;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.dropout = 0.0;
  c.seed = 3;
  Model model = make_model(c, vocabs);
  Sentence s = corpus.sentences[0];
  s.tokens.erase(s.tokens.begin() + 3, s.tokens.end());
  const EncodedExample ex = encode_sentence(s, vocabs, InputMode::kArabizi);

  const auto start = Clock::now();
  const GradCheckResult r = check_gradients(model, ex, kGradEpsilon, kGradCoordinates, 1);
  const double secs = seconds_since(start);
  const size_t params = model.params.count();
  Outcome o;
  o.pass = params <= kGradMaxParams && model.config.decoder_order.size() == 5 &&
           r.coordinates >= 200 && r.max_relative_error < kGradMaxRelError && secs < kGradSeconds;
  o.detail = std::to_string(params) + " params, " + std::to_string(r.coordinates) +
             " coordinates over " + std::to_string(r.tensors_covered) +
             " tensors, max rel error " + fixed(r.max_relative_error, 9) + " at " +
             r.worst_coordinate + ", " + fixed(secs, 2) + " s";
  return o;
}

// ---------------------------------------------------------------------------

// Independent recount of one task loss from its distributions.
double oracle_sequence_loss(const Matrix &dist, const std::vector<int> &target) {
  double sum = 0.0;
  int n = 0;
  for (size_t t = 0; t + 1 < target.size(); ++t) {
    const int next = target[t + 1];
    if (next == kPad) continue;
    sum += -std::log(dist(static_cast<Eigen::Index>(t), next));
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

std::vector<Level> random_order(Rng &rng) {
  std::vector<Level> rest = {Level::kLemma, Level::kCoda, Level::kTokenization, Level::kPos};
  for (size_t i = rest.size(); i > 1; --i) std::swap(rest[i - 1], rest[rng.below(i)]);
  rest.resize(rng.below(5));
  std::vector<Level> order = {Level::kClass};
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

Outcome loss_additivity() {
  Rng rng(17);
  const Corpus vocab_source = testing::random_corpus(rng, 40, 8);
  const Vocabularies vocabs = build_vocabularies(vocab_source);
  int additive = 0, oracle = 0, masked = 0;
  double worst_oracle = 0.0;
  for (int trial = 0; trial < kLossTrials; ++trial) {
    ModelConfig c;
    c.backbone = trial % 2 == 0 ? Backbone::kRecurrent : Backbone::kSelfAttention;
    c.embedding_size = 4;
    c.hidden_size = 6;
    c.encoder_layers = 1;
    c.heads = 2;
    c.ffn_size = 8;
    c.dropout = 0.0;
    c.seed = static_cast<uint64_t>(trial + 1);
    c.decoder_order = random_order(rng);
    const Model model = make_model(c, vocabs);

    Corpus one = testing::random_corpus(rng, 1, 6, /*mixed_status=*/true);
    one = gold_view(one);
    const EncodedExample ex = encode_sentence(one.sentences[0], vocabs, InputMode::kArabizi);
    const CascadeOutput out = forward_cascade(model, ex, DecodeMode::kTeacherForced);
    const LossBundle bundle = compute_global_loss(out, ex.targets);

    double sum = 0.0;
    bool oracle_ok = true;
    for (const TaskOutput &task : out.tasks) {
      const double loss = *bundle.task[level_index(task.task)];
      sum += loss;
      const double expect = oracle_sequence_loss(task.distributions, *ex.targets[level_index(task.task)]);
      const double rel = std::abs(loss - expect) / std::max(std::abs(expect), 1e-300);
      if (expect != loss) worst_oracle = std::max(worst_oracle, rel);
      if (rel > kLossOracleRelTol && expect != loss) oracle_ok = false;
    }
    additive += sum == bundle.global;
    oracle += oracle_ok;

    // Trailing PAD targets with arbitrary extra distribution rows.
    const size_t extra = 1 + rng.below(5);
    CascadeOutput padded = out;
    TargetStreams targets = ex.targets;
    for (TaskOutput &task : padded.tasks) {
      std::vector<int> &stream = *targets[level_index(task.task)];
      stream.insert(stream.end(), extra, kPad);
      const Eigen::Index rows = task.distributions.rows();
      const Eigen::Index cols = task.distributions.cols();
      task.distributions.conservativeResize(rows + static_cast<Eigen::Index>(extra), cols);
      for (Eigen::Index r = rows; r < task.distributions.rows(); ++r) {
        double total = 0.0;
        for (Eigen::Index k = 0; k < cols; ++k) {
          task.distributions(r, k) = 0.01 + rng.uniform(0.0, 1.0);
          total += task.distributions(r, k);
        }
        task.distributions.row(r) /= total;
      }
    }
    const LossBundle after = compute_global_loss(padded, targets);
    bool same = after.global == bundle.global;
    for (Level level : kAllLevels) same = same && after.task[level_index(level)] == bundle.task[level_index(level)];
    masked += same;
  }
  Outcome o;
  o.pass = additive == kLossTrials && oracle == kLossTrials && masked == kLossTrials;
  o.detail = "global == ordered sum in " + std::to_string(additive) + "/" +
             std::to_string(kLossTrials) + ", oracle agreement " + std::to_string(oracle) + "/" +
             std::to_string(kLossTrials) + " (worst rel " + fixed(worst_oracle, 17) +
             "), PAD padding exact in " + std::to_string(masked) + "/" + std::to_string(kLossTrials);
  return o;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<Level>> all_orders(InputMode mode) {
  std::vector<Level> levels;
  for (Level level : kAllLevels) {
    if (mode == InputMode::kAr && level == Level::kCoda) continue;
    levels.push_back(level);
  }
  std::vector<std::vector<Level>> out;
  const size_t n = levels.size();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Level> subset;
    for (size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) subset.push_back(levels[i]);
    }
    std::sort(subset.begin(), subset.end());
    do {
      out.push_back(subset);
    } while (std::next_permutation(subset.begin(), subset.end()));
  }
  return out;
}

Outcome attention_count() {
  const Corpus corpus = testing::excerpt_corpus();
  const Vocabularies vocabs = build_vocabularies(corpus);
  Sentence s = corpus.sentences[0];
  s.tokens.erase(s.tokens.begin() + 2, s.tokens.end());
  size_t models = 0, rejected = 0, wrong = 0, misplaced_cl = 0;
  for (InputMode mode : {InputMode::kArabizi, InputMode::kAr}) {
    const EncodedExample ex = encode_sentence(s, vocabs, mode);
    for (Backbone backbone : {Backbone::kRecurrent, Backbone::kSelfAttention}) {
      for (const std::vector<Level> &order : all_orders(mode)) {
        ModelConfig c;
        c.backbone = backbone;
        c.embedding_size = 4;
        c.hidden_size = 4;
        c.encoder_layers = 1;
        c.heads = 2;
        c.ffn_size = 4;
        c.dropout = 0.0;
        c.input_mode = mode;
        c.decoder_order = order;
        const bool cl_late = std::find(order.begin() + 1, order.end(), Level::kClass) != order.end();
        Model model;
        try {
          model = make_model(c, vocabs);
        } catch (const Error &) {
          ++rejected;
          misplaced_cl += cl_late;
          continue;
        }
        ++models;
        const CascadeOutput out = forward_cascade(model, ex, DecodeMode::kTeacherForced);
        for (size_t i = 0; i < order.size(); ++i) {
          if (attention_bank_size(model.params, order[i]) != i + 1 ||
              attention_sources(c, order[i]).size() != i + 1 ||
              out.tasks[i].attention.size() != i + 1) {
            ++wrong;
          }
        }
      }
    }
  }
  Outcome o;
  o.pass = wrong == 0 && rejected == misplaced_cl && models > 0;
  o.detail = std::to_string(models) + " cascades checked (both backbones, both input modes), " +
             std::to_string(wrong) + " mismatches; " + std::to_string(rejected) +
             " orders rejected, all with cl after position 0";
  return o;
}

// ---------------------------------------------------------------------------

struct OverfitRun {
  TrainLog log;
  EvalReport eval;
  int stopped_at = -1;
  double seconds = 0.0;
};

Corpus overfit_corpus() {
  Rng rng(2026);
  return testing::random_corpus(rng, kOverfitSentences, 10);
}

OverfitRun overfit_once(const Corpus &gold) {
  const Vocabularies vocabs = build_vocabularies(gold);
  const ModelConfig config;  // default desk config
  Model model = make_model(config, vocabs);
  const auto examples = encode_corpus(gold, vocabs, config.input_mode);
  TrainSchedule schedule;
  schedule.epochs = kOverfitMaxEpochs;
  schedule.patience = 0;
  const Corpus input = bare(gold);
  const CorpusBlock gold_block{0, gold};

  OverfitRun run;
  const auto start = Clock::now();
  run.log = train(model, examples, {}, schedule, [&](const EpochLog &e, const Model &m) {
    if (e.epoch == 0 || e.epoch % kOverfitCheckEvery != 0) return false;
    const EvalReport r = evaluate(CorpusBlock{0, annotate_corpus(m, input)}, gold_block);
    for (Level level : kAllLevels) {
      if (r.hundredths(level).value_or(0) < kOverfitMinHundredths) return false;
    }
    run.stopped_at = e.epoch;
    return true;
  });
  run.eval = evaluate(CorpusBlock{0, annotate_corpus(model, input)}, gold_block);
  run.seconds = seconds_since(start);
  return run;
}

Outcome overfit() {
  const Corpus gold = overfit_corpus();
  const OverfitRun a = overfit_once(gold);
  const OverfitRun b = overfit_once(gold);
  bool all = true;
  std::string accs;
  for (Level level : kAllLevels) {
    all = all && a.eval.hundredths(level).value_or(0) >= kOverfitMinHundredths;
    if (!accs.empty()) accs += ", ";
    accs += std::string(level_name(level)) + " " + a.eval.accuracy_text(level);
  }
  const bool same = a.log.to_tsv() == b.log.to_tsv() && a.eval == b.eval;
  Outcome o;
  o.pass = all && same && a.seconds < kOverfitSeconds && b.seconds < kOverfitSeconds;
  o.detail = std::to_string(gold.sentences.size()) + " sentences / " +
             std::to_string(gold.token_count()) + " tokens, " +
             (a.stopped_at > 0 ? "all tasks >= 95% at epoch " + std::to_string(a.stopped_at)
                               : "not reached in " + std::to_string(kOverfitMaxEpochs) + " epochs") +
             "; " + accs + "; runs " + fixed(a.seconds, 1) + " s and " + fixed(b.seconds, 1) +
             " s; logs " + (same ? "identical" : "DIFFER");
  return o;
}

// ---------------------------------------------------------------------------

Outcome xavier() {
  const Corpus corpus = testing::corpus_fixture();
  const ModelConfig config;
  const Parameters params = init_params(config, build_vocabularies(corpus));
  size_t matrices = 0, out_of_bounds = 0, variance_misses = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const Tensor &t : params.tensors()) {
    if (t.kind != TensorKind::kWeight && t.kind != TensorKind::kEmbedding) continue;
    ++matrices;
    // Row-major matrices map fan_in rows to fan_out columns.
    const int fan_in = static_cast<int>(t.value.rows());
    const int fan_out = static_cast<int>(t.value.cols());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    if (t.value.cwiseAbs().maxCoeff() > limit) ++out_of_bounds;
    const double mean = t.value.mean();
    const double var = (t.value.array() - mean).square().mean();
    const double rel = std::abs(var / (2.0 / (fan_in + fan_out)) - 1.0);
    if (rel > worst) {
      worst = rel;
      worst_name = t.name + " " + std::to_string(fan_in) + "x" + std::to_string(fan_out);
    }
    if (rel > kXavierVarianceTol) ++variance_misses;
  }
  Outcome o;
  o.pass = matrices > 0 && out_of_bounds == 0 && variance_misses == 0;
  o.detail = std::to_string(matrices) + " weight matrices, " + std::to_string(out_of_bounds) +
             " out of bounds, " + std::to_string(variance_misses) +
             " outside 10% variance; worst deviation " + fixed(100.0 * worst, 2) + "% (" +
             worst_name + ")";
  return o;
}

// ---------------------------------------------------------------------------

struct TempStore {
  std::filesystem::path path;
  TempStore()
      : path(std::filesystem::temp_directory_path() /
             ("tarc_acceptance_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path);
  }
  ~TempStore() { std::filesystem::remove_all(path); }
};

Corpus corpus_of(const std::string &prefix, size_t words, uint64_t seed) {
  Corpus c = testing::synthetic_corpus({{Genre::kForum, (words + 8) / 9, words}}, seed);
  for (Sentence &s : c.sentences) s.id = prefix + s.id;
  return c;
}

Outcome step_accounting() {
  TempStore tmp;
  Store store(tmp.path);
  store.write_aux("madar", corpus_of("aux-", 12391, 1));
  const std::vector<size_t> sizes = {4870, 4910, 5090, 5000};
  for (size_t i = 0; i < sizes.size(); ++i) {
    store.write_block(CorpusBlock{static_cast<int>(i),
                                  corpus_of("b" + std::to_string(i) + "-", sizes[i], 10 + i)});
  }
  // Published "Train. tokens" for Step1..Step3.
  const std::vector<std::string> published = {"17,261 (4,870)", "22,173 (9,780)",
                                               "27,270 (14,870)"};
  bool all = true;
  std::vector<StepRecord> records;
  for (int step = 1; step <= 3; ++step) {
    StepPlan plan;
    plan.step = step;
    plan.aux = "madar";
    for (int b = 0; b < step; ++b) plan.annotated_blocks.push_back(b);
    plan.target_block = step;
    plan.model.embedding_size = 2;
    plan.model.hidden_size = 2;
    plan.model.encoder_layers = 1;
    plan.model.dropout = 0.0;
    plan.schedule.epochs = 0;
    const StepRecord record = run_annotation_step(plan, store);
    const TokenAccount tokens = record.tokens;
    const std::string got = tokens.text();
    const bool ok = got == published[static_cast<size_t>(step - 1)];
    all = all && ok;
    note("Step" + std::to_string(step) + "_concat  got " + got + "  published " +
         published[static_cast<size_t>(step - 1)] + (ok ? "  ok" : "  MISMATCH"));
  }
  Outcome o;
  o.pass = all;
  o.detail = all ? "all three rows match"
                 : "aux + blocks arithmetic disagrees with the published totals (see rows)";
  return o;
}

// ---------------------------------------------------------------------------

Outcome corpus_stats() {
  const CorpusStats s = compute_stats(testing::corpus_fixture());
  struct Row {
    const char *name;
    const StatsRow *row;
    size_t sentences;
    size_t words;
    const char *average;
  };
  const std::vector<Row> rows = {
      {"Total", &s.total, 4797, 43327, "9.0"},
      {"forum", &s.genres[0], 755, 11909, "15.8"},
      {"social", &s.genres[1], 3162, 16056, "5.1"},
      {"blog", &s.genres[2], 366, 6671, "18.2"},
      {"rap", &s.genres[3], 514, 8691, "16.9"},
  };
  bool all = true;
  for (const Row &r : rows) {
    const bool ok = r.row->sentences == r.sentences && r.row->words == r.words &&
                    r.row->average_text() == r.average;
    all = all && ok;
    note(std::string(r.name) + "  " + with_thousands(r.row->sentences) + "  " +
         with_thousands(r.row->words) + "  " + r.row->average_text() + (ok ? "" : "  MISMATCH"));
  }
  return Outcome{all, all ? "total and four genre rows match" : "row mismatch"};
}

// ---------------------------------------------------------------------------

Outcome split_properties() {
  Rng rng(99);
  int failures = 0;
  std::string first_failure;
  auto fail = [&](int i, const std::string &what) {
    if (failures++ == 0) first_failure = "corpus " + std::to_string(i) + ": " + what;
  };
  for (int i = 0; i < kSplitCorpora; ++i) {
    const Corpus corpus = testing::random_corpus(rng, 1 + rng.below(120), 4);
    for (SplitMode mode : {SplitMode::kGenre, SplitMode::kGlobal}) {
      SplitSpec spec;
      spec.mode = mode;
      spec.seed = rng.next();
      const Splits a = make_splits(corpus, spec);
      const Splits b = make_splits(corpus, spec);
      if (format_manifest(a.train) + format_manifest(a.dev) + format_manifest(a.test) !=
          format_manifest(b.train) + format_manifest(b.dev) + format_manifest(b.test)) {
        fail(i, "not reproducible");
      }
      std::multiset<std::string> seen;
      for (const Corpus *part : {&a.train, &a.dev, &a.test}) {
        for (const Sentence &s : part->sentences) seen.insert(s.id);
      }
      std::multiset<std::string> all;
      for (const Sentence &s : corpus.sentences) all.insert(s.id);
      if (seen != all) fail(i, "not a partition");

      // Floor rule: dev and test get floor(15% of n), train the rest; per
      // genre in GENRE mode.
      std::map<int, std::array<size_t, 4>> counts;  // group -> n, train, dev, test
      auto group = [&](const Sentence &s) {
        return mode == SplitMode::kGenre ? static_cast<int>(s.genre) : 0;
      };
      for (const Sentence &s : corpus.sentences) ++counts[group(s)][0];
      for (const Sentence &s : a.train.sentences) ++counts[group(s)][1];
      for (const Sentence &s : a.dev.sentences) ++counts[group(s)][2];
      for (const Sentence &s : a.test.sentences) ++counts[group(s)][3];
      for (const auto &[g, c] : counts) {
        const size_t share = c[0] * 15 / 100;
        if (c[2] != share || c[3] != share || c[1] != c[0] - 2 * share) {
          fail(i, "group " + std::to_string(g) + " sizes " + std::to_string(c[1]) + "/" +
                      std::to_string(c[2]) + "/" + std::to_string(c[3]) + " of " +
                      std::to_string(c[0]));
        }
      }
    }
  }
  Outcome o;
  o.pass = failures == 0;
  o.detail = std::to_string(kSplitCorpora) + " corpora x 2 modes, " + std::to_string(failures) +
             " failures" + (failures ? " (first: " + first_failure + ")" : "");
  return o;
}

// ---------------------------------------------------------------------------

Outcome evaluation_oracle() {
  Rng rng(5150);
  int agree = 0;
  for (int pair = 0; pair < kEvalPairs; ++pair) {
    const Corpus gold = testing::random_corpus(rng, 1 + rng.below(12), 8, /*mixed_status=*/true);
    Corpus pred = gold;
    // Perturb: replace or clear random cells with values drawn from other
    // tokens of the same level.
    std::vector<const AnnotatedToken *> pool;
    for (const Sentence &s : gold.sentences) {
      for (const AnnotatedToken &t : s.tokens) pool.push_back(&t);
    }
    for (Sentence &s : pred.sentences) {
      for (AnnotatedToken &t : s.tokens) {
        for (Level level : kAllLevels) {
          const uint64_t roll = rng.below(10);
          if (roll == 0) {
            t.clear(level);
          } else if (roll <= 3) {
            const AnnotatedToken &other = *pool[rng.below(pool.size())];
            if (!other.cell(level).empty()) t.set(level, other.value(level), Status::kPredicted);
          }
        }
      }
    }
    std::vector<Level> levels;
    for (Level level : kAllLevels) {
      if (rng.below(4) != 0) levels.push_back(level);
    }
    const EvalReport r = evaluate(CorpusBlock{0, pred}, CorpusBlock{0, gold}, levels);

    // Brute force over every (token, task) pair.
    bool ok = true;
    for (Level level : kAllLevels) {
      const bool scored = std::find(levels.begin(), levels.end(), level) != levels.end();
      size_t n = 0, c = 0;
      for (size_t i = 0; i < gold.sentences.size(); ++i) {
        for (size_t k = 0; k < gold.sentences[i].tokens.size(); ++k) {
          const AnnotatedToken &g = gold.sentences[i].tokens[k];
          const AnnotatedToken &p = pred.sentences[i].tokens[k];
          if (g.status(level) == Status::kEmpty) continue;
          ++n;
          c += p.status(level) != Status::kEmpty && p.value(level) == g.value(level);
        }
      }
      std::string expect = "-";
      if (scored && n > 0) {
        const size_t q = c * 10000 / n;
        const size_t rem = c * 10000 % n;
        const size_t h = q + (2 * rem >= n ? 1 : 0);
        expect = std::to_string(h / 100) + "." + (h % 100 < 10 ? "0" : "") + std::to_string(h % 100);
      }
      if (scored && (r.evaluated[level_index(level)] != n || r.correct[level_index(level)] != c)) {
        ok = false;
      }
      if (r.accuracy_text(level) != expect) ok = false;
    }
    agree += ok;
  }
  Outcome o;
  o.pass = agree == kEvalPairs;
  o.detail = std::to_string(agree) + "/" + std::to_string(kEvalPairs) +
             " random block pairs agree with the brute-force recount";
  return o;
}

// ---------------------------------------------------------------------------

Outcome end_to_end() {
  double budget = kEndToEndDefaultSeconds;
  if (const char *env = std::getenv("TARC_E2E_SECONDS")) budget = std::atof(env);
  budget = std::min(budget, kEndToEndMaxSeconds);

  const Corpus corpus = testing::corpus_fixture();
  const Splits parts = make_splits(corpus, SplitSpec{});
  const ModelConfig config;
  Model model = make_model(config, build_vocabularies(parts.train));
  const auto train_set = encode_corpus(parts.train, model.vocabs, config.input_mode);
  const auto dev_set = encode_corpus(parts.dev, model.vocabs, config.input_mode);
  TrainSchedule schedule;
  schedule.epochs = 1000;

  const auto start = Clock::now();
  const TrainLog log = train(model, train_set, dev_set, schedule, [&](const EpochLog &, const Model &) {
    return seconds_since(start) > budget;
  });
  const double train_secs = seconds_since(start);
  const CorpusBlock pred{0, annotate_corpus(model, bare(parts.test))};
  const EvalReport r = evaluate(pred, CorpusBlock{0, parts.test});

  note("synthetic fixture, genre split " + std::to_string(parts.train.token_count()) + "/" +
       std::to_string(parts.dev.token_count()) + "/" + std::to_string(parts.test.token_count()) +
       " tokens, " + std::to_string(log.epochs.size() - 1) + " epochs in " + fixed(train_secs, 0) +
       " s (budget " + fixed(budget, 0) + " s), best epoch " + std::to_string(log.best_epoch));
  note("task   here     published final-step LSTM");
  const std::map<Level, std::string> published = {{Level::kClass, "98.56"},
                                                   {Level::kCoda, "82.98"},
                                                   {Level::kTokenization, "81.84"},
                                                   {Level::kPos, "82.84"},
                                                   {Level::kLemma, "-"}};
  for (Level level : kAllLevels) {
    note(std::string(level_name(level)) + std::string(7 - level_name(level).size(), ' ') +
         r.accuracy_text(level) + std::string(9 - r.accuracy_text(level).size(), ' ') +
         published.at(level));
  }
  const long cl = r.hundredths(Level::kClass).value_or(0);
  return Outcome{cl >= kEndToEndMinClassHundredths,
                 "classification " + r.accuracy_text(Level::kClass) +
                     " (threshold 90.00); other tasks informational"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> &criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"gradient_check", gradient_check},
      {"loss_additivity", loss_additivity},
      {"attention_count", attention_count},
      {"overfit", overfit},
      {"xavier", xavier},
      {"step_accounting", step_accounting},
      {"corpus_stats", corpus_stats},
      {"split_properties", split_properties},
      {"evaluation_oracle", evaluation_oracle},
      {"end_to_end", end_to_end},
  };
  return all;
}

}  // namespace

int main(int argc, char **argv) {
  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.size() == 1 && selected[0] == "--list") {
    for (const auto &[name, fn] : criteria()) std::cout << name << '\n';
    return 0;
  }
  for (const std::string &name : selected) {
    const auto &all = criteria();
    if (std::none_of(all.begin(), all.end(), [&](const auto &c) { return c.first == name; })) {
      std::cerr << "unknown criterion '" << name << "'; --list shows them\n";
      return 2;
    }
  }
  int failed = 0;
  for (const auto &[name, fn] : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) {
      continue;
    }
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = Outcome{false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << fixed(seconds_since(start), 1)
              << " s] " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
