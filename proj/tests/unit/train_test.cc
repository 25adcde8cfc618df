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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "synthetic.h"
#include "tarc/error.h"
#include "tarc/train.h"

using namespace tarc;
using namespace tarc::nn;

namespace {

Corpus toy_corpus(size_t sentences = 20, uint64_t seed = 3) {
  Rng rng(seed);
  Corpus c;
  for (size_t i = 0; i < sentences; ++i) {
    c.sentences.push_back(testing::random_sentence(rng, "toy-" + std::to_string(i), Genre::kSocial,
                                                   2 + rng.below(4)));
  }
  return c;
}

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.embedding_size = 8;
  cfg.hidden_size = 16;
  cfg.encoder_layers = 1;
  return cfg;
}

struct Fixture {
  Corpus corpus = toy_corpus();
  Vocabularies vocabs = build_vocabularies(corpus);
  std::vector<EncodedExample> examples = encode_corpus(corpus, vocabs, InputMode::kArabizi);
};

bool same_values(const Parameters &a, const Parameters &b) {
  for (size_t i = 0; i < a.tensors().size(); ++i) {
    if (a.tensors()[i].value != b.tensors()[i].value) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("training lowers the loss of a toy corpus") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    TrainSchedule s;
    s.epochs = 10;
    s.patience = 0;
    s.batch_size = 4;
    const TrainLog log = train(model, f.examples, {}, s);
    REQUIRE(log.epochs.size() == 11);
    CHECK(log.epochs[10].global_loss < log.epochs[0].global_loss);
  }

  TEST_CASE("learning rate zero leaves parameters unchanged") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    const Parameters before = model.params;
    TrainSchedule s;
    s.learning_rate = 0.0;
    s.epochs = 3;
    s.patience = 0;
    train(model, f.examples, {}, s);
    CHECK(same_values(model.params, before));
  }

  TEST_CASE("same seed gives identical logs and parameters") {
    Fixture f;
    TrainSchedule s;
    s.epochs = 4;
    s.batch_size = 3;
    s.teacher_forcing = 0.7;
    Model a = make_model(small_config(), f.vocabs);
    Model b = make_model(small_config(), f.vocabs);
    const TrainLog la = train(a, f.examples, f.examples, s);
    const TrainLog lb = train(b, f.examples, f.examples, s);
    CHECK(la.to_tsv() == lb.to_tsv());
    CHECK(la.epochs == lb.epochs);
    CHECK(same_values(a.params, b.params));
  }

  TEST_CASE("log layout") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    TrainSchedule s;
    s.epochs = 1;
    const TrainLog log = train(model, f.examples, {}, s);
    const std::string tsv = log.to_tsv();
    CHECK(tsv.rfind("epoch\tcl\tlm\tar\ttk\tpos\tglobal\tdev_global\n", 0) == 0);
    CHECK(tsv.find("\n0\t") != std::string::npos);
    CHECK(tsv.find("\n1\t") != std::string::npos);
    // No dev set: dev column is a dash.
    CHECK(tsv.back() == '\n');
    CHECK(tsv[tsv.size() - 2] == '-');
    for (const EpochLog &e : log.epochs) {
      double sum = 0.0;
      for (Level level : model.config.decoder_order) sum += *e.task_loss[level_index(level)];
      CHECK(e.global_loss == doctest::Approx(sum).epsilon(1e-12));
    }
  }

  TEST_CASE("patience stops when the dev loss stalls and restores the best epoch") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    const Parameters before = model.params;
    TrainSchedule s;
    s.learning_rate = 0.0;
    s.epochs = 50;
    s.patience = 2;
    const TrainLog log = train(model, f.examples, f.examples, s);
    CHECK(log.early_stopped);
    CHECK(log.epochs.size() == 3);
    CHECK(log.best_epoch == 0);
    CHECK(same_values(model.params, before));
    for (const EpochLog &e : log.epochs) CHECK(e.dev_loss.has_value());
  }

  TEST_CASE("best dev epoch is what the model holds after training") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    TrainSchedule s;
    s.epochs = 6;
    s.patience = 0;
    s.batch_size = 4;
    const TrainLog log = train(model, f.examples, f.examples, s);
    double best = *log.epochs[0].dev_loss;
    int best_epoch = 0;
    for (const EpochLog &e : log.epochs) {
      if (*e.dev_loss < best) {
        best = *e.dev_loss;
        best_epoch = e.epoch;
      }
    }
    CHECK(log.best_epoch == best_epoch);
    CHECK(evaluate_loss(model, f.examples).global_loss == doctest::Approx(best).epsilon(1e-12));
  }

  TEST_CASE("callback can stop training") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    TrainSchedule s;
    s.epochs = 100;
    int calls = 0;
    const TrainLog log = train(model, f.examples, {}, s, [&](const EpochLog &e, const Model &) {
      ++calls;
      return e.epoch == 2;
    });
    CHECK(calls == 3);
    CHECK(log.stopped_by_callback);
    CHECK(log.epochs.size() == 3);
  }

  TEST_CASE("non-finite loss is reported as divergence") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    model.params.get("decoder.cl.out.b").value(0, kNumSpecials) =
        std::numeric_limits<double>::infinity();
    TrainSchedule s;
    s.epochs = 2;
    try {
      train(model, f.examples, {}, s);
      FAIL("expected DIVERGED");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kDiverged);
    }
  }

  TEST_CASE("empty training set and bad schedules are rejected") {
    Fixture f;
    Model model = make_model(small_config(), f.vocabs);
    CHECK_THROWS_AS(train(model, {}, {}, TrainSchedule{}), Error);
    TrainSchedule s;
    s.batch_size = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s = TrainSchedule{};
    s.teacher_forcing = 1.5;
    CHECK_THROWS_AS(s.validate(), Error);
    s = TrainSchedule{};
    s.learning_rate = -1.0;
    CHECK_THROWS_AS(s.validate(), Error);
  }
}
