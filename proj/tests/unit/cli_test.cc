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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthetic.h"
#include "temp_dir.h"
#include "tarc/cli.h"
#include "tarc/checkpoint.h"
#include "tarc/store.h"

using namespace tarc;
using testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "tarc");
  std::vector<const char *> argv;
  for (const std::string &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string &path) { return *read_file(path); }

void put(const std::string &path, const std::string &text) {
  std::ofstream(path, std::ios::binary) << text;
}

Corpus small_corpus() {
  Rng rng(11);
  return testing::random_corpus(rng, 12, 5);
}

constexpr const char *kTinyConfig = R"({
  "model": {"embedding_size": 6, "hidden_size": 8, "encoder_layers": 1},
  "schedule": {"epochs": 2},
  "aux": "aux"
})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2 with subcommand help") {
    Run r = run({"train"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("--corpus") != std::string::npos);
    CHECK(r.err.find("Usage: train") != std::string::npos);
    CHECK(r.out.empty());

    r = run({"train", "--corpus", "/nonexistent/corpus.tsv", "--out", "x.ckpt"});
    CHECK(r.code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"split", "--ratios", "0.7", "0.3"}).code == kExitUsage);

    r = run({"--help"});
    CHECK(r.code == kExitOk);
    for (const char *cmd : {"stats", "validate", "split", "blocks", "train", "annotate", "evaluate",
                            "campaign", "serve"}) {
      CHECK(r.out.find(cmd) != std::string::npos);
    }
  }

  TEST_CASE("stats reproduces the corpus totals") {
    TempDir dir("cli_stats");
    write_corpus_file(dir.file("c.tsv"), testing::corpus_fixture());
    const Run r = run({"stats", dir.file("c.tsv"), "--tsv"});
    REQUIRE(r.code == kExitOk);
    std::istringstream lines(r.out);
    std::string header, total;
    std::getline(lines, header);
    std::getline(lines, total);
    CHECK(total == "Total\t4797\t43327\t9.0");
    CHECK(run({"stats", dir.file("c.tsv")}).out.find("43,327") != std::string::npos);
  }

  TEST_CASE("validate reports violations and exits 1") {
    TempDir dir("cli_validate");
    write_corpus_file(dir.file("ok.tsv"), testing::excerpt_corpus());
    Run r = run({"validate", dir.file("ok.tsv")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.empty());

    std::string text = slurp(dir.file("ok.tsv"));
    // Give the foreign token "ma" a POS tag.
    const std::string row = "\nma\tforeign\tforeign\tforeign\tforeign\tforeign\t";
    const size_t at = text.find(row);
    REQUIRE(at != std::string::npos);
    text.replace(at, row.size(), "\nma\tforeign\tforeign\tforeign\tNEG\tforeign\t");
    put(dir.file("bad.tsv"), text);
    r = run({"validate", dir.file("bad.tsv")});
    CHECK(r.code == kExitFailure);
    CHECK(r.out.find("error\tSENTINEL_VIOLATION\texcerpt-1\t2\t") == 0);
    CHECK(r.err.find("1 errors") != std::string::npos);
  }

  TEST_CASE("split is reproducible with a seed") {
    TempDir dir("cli_split");
    write_corpus_file(dir.file("c.tsv"), small_corpus());
    const std::vector<std::string> args = {"split", dir.file("c.tsv"), "--mode", "genre",
                                           "--ratios", "0.7", "0.15", "0.15", "--seed", "1"};
    const Run a = run(args);
    const Run b = run(args);
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
    CHECK(a.out.find("## train\n") == 0);
    CHECK(run({"split", dir.file("c.tsv"), "--seed", "2"}).out != a.out);

    const Run files = run({"--seed", "1", "split", dir.file("c.tsv"), "--out", dir.file("m")});
    REQUIRE(files.code == kExitOk);
    const std::string train = slurp(dir.file("m/train.ids"));
    CHECK(a.out.find(train) != std::string::npos);
    CHECK(files.out.find("train\t") == 0);
  }

  TEST_CASE("train, annotate and evaluate") {
    TempDir dir("cli_train");
    write_corpus_file(dir.file("c.tsv"), small_corpus());
    put(dir.file("cfg.json"), kTinyConfig);
    const std::vector<std::string> train = {"--config", dir.file("cfg.json"), "--seed", "4",
                                            "train", "--corpus", dir.file("c.tsv"),
                                            "--out", dir.file("m.ckpt")};
    Run r = run(train);
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("epoch\tcl\tlm\tar\ttk\tpos\tglobal\tdev_global\n") == 0);
    const std::string first = slurp(dir.file("m.ckpt"));
    CHECK(run(train).out == r.out);
    CHECK(slurp(dir.file("m.ckpt")) == first);
    CHECK(nn::load_checkpoint(dir.file("m.ckpt")).config.hidden_size == 8);

    r = run({"annotate", "--checkpoint", dir.file("m.ckpt"), "--corpus", dir.file("c.tsv"),
             "--out", dir.file("p.tsv")});
    REQUIRE(r.code == kExitOk);
    CHECK(read_corpus_file(dir.file("p.tsv")).sentences.size() == 12);

    r = run({"evaluate", "--pred", dir.file("c.tsv"), "--gold", dir.file("c.tsv")});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("cl\t") != std::string::npos);
    CHECK(r.out.find("\t100.00\n") != std::string::npos);
    r = run({"evaluate", "--pred", dir.file("p.tsv"), "--gold", dir.file("c.tsv"), "--levels",
             "pos"});
    REQUIRE(r.code == kExitOk);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);

    put(dir.file("bad.json"), R"({"model": {"hidden": 3}})");
    r = run({"--config", dir.file("bad.json"), "train", "--corpus", dir.file("c.tsv"), "--out",
             dir.file("n.ckpt")});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("INVALID_CONFIG") != std::string::npos);
  }

  TEST_CASE("blocks and campaign against a store") {
    TempDir dir("cli_campaign");
    Rng rng(5);
    write_corpus_file(dir.file("aux.tsv"), testing::random_corpus(rng, 6, 4));
    const Corpus primary = testing::random_corpus(rng, 8, 4);
    write_corpus_file(dir.file("primary.tsv"), primary);
    put(dir.file("cfg.json"), kTinyConfig);
    const std::string store = dir.file("store");

    Run r = run({"--store", store, "blocks", dir.file("aux.tsv"), "--aux", "aux"});
    REQUIRE(r.code == kExitOk);
    r = run({"--store", store, "blocks", dir.file("primary.tsv"), "--tokens", "10", "--raw"});
    REQUIRE(r.code == kExitOk);
    const std::vector<int> blocks = Store(store).block_indices();
    REQUIRE(blocks.size() >= 2);
    CHECK(run({"--store", store, "blocks", dir.file("primary.tsv")}).code == kExitUsage);

    put(dir.file("plans.json"), R"([
      {"step": 0, "aux": "aux", "target_block": 0},
      {"step": 1, "aux": "aux", "annotated_blocks": [0], "target_block": 1}])");
    const std::vector<std::string> campaign = {"--config", dir.file("cfg.json"), "--store", store,
                                               "campaign", "--plans", dir.file("plans.json")};
    r = run(campaign);
    REQUIRE(r.code == kExitOk);
    CHECK(r.err.find("awaiting corrections for block 0") != std::string::npos);
    CHECK(r.out.find("Step0_concat\t") != std::string::npos);

    // Corrections: the gold version of block 0.
    Corpus gold0;
    const Corpus stored0 = Store(store).read_block(0).content;
    for (const Sentence &s : stored0.sentences) {
      for (const Sentence &g : primary.sentences) {
        if (g.id == s.id) gold0.sentences.push_back(g);
      }
    }
    write_corpus_file(dir.file("fix0.tsv"), gold0);
    std::vector<std::string> resume = campaign;
    resume.insert(resume.end(), {"--import", "0=" + dir.file("fix0.tsv")});
    r = run(resume);
    REQUIRE(r.code == kExitOk);
    CHECK(r.err.find("awaiting corrections for block 1") != std::string::npos);
    CHECK(r.out.find("Step1_concat\t") != std::string::npos);
    CHECK(Store(store).read_report(0).has_value());

    r = run({"--config", dir.file("cfg.json"), "--store", store, "campaign", "--import", "zero"});
    CHECK(r.code == kExitUsage);
  }
}
