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

#include <cstring>
#include <filesystem>
#include <functional>
#include <fstream>

#include "synthetic.h"
#include "tarc/checkpoint.h"
#include "tarc/config.h"
#include "tarc/error.h"

using namespace tarc;
using namespace tarc::nn;

namespace {

Model tiny_model(Backbone backbone = Backbone::kRecurrent) {
  const Corpus c = testing::excerpt_corpus();
  ModelConfig cfg;
  cfg.backbone = backbone;
  cfg.embedding_size = 6;
  cfg.hidden_size = 8;
  cfg.encoder_layers = 1;
  cfg.ffn_size = 12;
  cfg.seed = 11;
  return make_model(cfg, build_vocabularies(c));
}

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIo;
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("round trip restores config, vocabularies and every value bit for bit") {
    for (Backbone backbone : {Backbone::kRecurrent, Backbone::kSelfAttention}) {
      Model model = tiny_model(backbone);
      // Move away from the init so a silent re-init would be caught.
      for (Tensor &t : model.params.tensors()) t.value.array() += 0.125;
      Json meta_out;
      const Model back = decode_checkpoint(encode_checkpoint(model, {{"step", 3}}), &meta_out);
      CHECK(back.config == model.config);
      CHECK(back.vocabs == model.vocabs);
      REQUIRE(back.params.tensors().size() == model.params.tensors().size());
      for (size_t i = 0; i < back.params.tensors().size(); ++i) {
        CHECK(back.params.tensors()[i].name == model.params.tensors()[i].name);
        CHECK(back.params.tensors()[i].value == model.params.tensors()[i].value);
      }
      CHECK(meta_out["step"] == 3);
    }
  }

  TEST_CASE("container layout") {
    const std::string bytes = encode_checkpoint(tiny_model());
    CHECK(bytes.substr(0, 8) == "TARCCKPT");
    CHECK(bytes.substr(8, 4) == std::string("\x01\x00\x00\x00", 4));
    uint64_t header = 0;
    for (int i = 0; i < 8; ++i) header |= uint64_t(uint8_t(bytes[12 + i])) << (8 * i);
    const Json doc = Json::parse(bytes.substr(20, header));
    CHECK(doc.contains("config"));
    CHECK(doc.contains("vocabularies"));
    const Json &first = doc["tensors"][0];
    CHECK(first["offset"] == 0);
    // Payload holds one f64 per parameter.
    CHECK(bytes.size() - 20 - header == tiny_model().params.count() * 8);
    // First value, little-endian.
    const double expected = tiny_model().params.tensors()[0].value(0, 0);
    double got;
    std::memcpy(&got, bytes.data() + 20 + header, 8);
    CHECK(got == expected);
  }

  TEST_CASE("corrupt containers are rejected") {
    const std::string good = encode_checkpoint(tiny_model());
    CHECK(code_of([&] { decode_checkpoint("NOTACKPT" + good.substr(8)); }) ==
          ErrorCode::kCheckpointInvalid);
    CHECK(code_of([&] { decode_checkpoint(good.substr(0, good.size() - 4)); }) ==
          ErrorCode::kCheckpointInvalid);
    std::string version = good;
    version[8] = 2;
    CHECK(code_of([&] { decode_checkpoint(version); }) == ErrorCode::kCheckpointInvalid);
    CHECK(code_of([&] { decode_checkpoint(good.substr(0, 10)); }) == ErrorCode::kCheckpointInvalid);
  }

  TEST_CASE("manifest shapes must match the stored config") {
    const std::string good = encode_checkpoint(tiny_model());
    uint64_t header = 0;
    for (int i = 0; i < 8; ++i) header |= uint64_t(uint8_t(good[12 + i])) << (8 * i);
    Json doc = Json::parse(good.substr(20, header));
    doc["config"]["hidden_size"] = 10;
    const std::string text = doc.dump();
    std::string bad = good.substr(0, 12);
    for (int i = 0; i < 8; ++i) bad.push_back(char((text.size() >> (8 * i)) & 0xff));
    bad += text + good.substr(20 + header);
    CHECK(code_of([&] { decode_checkpoint(bad); }) == ErrorCode::kCheckpointInvalid);
  }

  TEST_CASE("files") {
    const auto dir = std::filesystem::temp_directory_path() / "tarc_ckpt_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "m.ckpt").string();
    const Model model = tiny_model();
    save_checkpoint(path, model);
    CHECK(load_checkpoint(path).params.tensors().back().value ==
          model.params.tensors().back().value);
    CHECK(code_of([&] { load_checkpoint((dir / "missing.ckpt").string()); }) ==
          ErrorCode::kCheckpointNotFound);
    std::filesystem::remove_all(dir);
  }
}

TEST_SUITE("config") {
  TEST_CASE("model config round trip and defaults") {
    ModelConfig c;
    c.backbone = Backbone::kSelfAttention;
    c.heads = 2;
    c.decoder_order = {Level::kClass, Level::kLemma, Level::kCoda};
    c.init = InitScheme::kBaselineDefault;
    CHECK(model_config_from_json(model_config_to_json(c)) == c);
    CHECK(model_config_from_json(Json::object()) == ModelConfig{});
  }

  TEST_CASE("input mode picks the matching default order") {
    const ModelConfig c = model_config_from_json(Json{{"input_mode", "ar"}});
    CHECK(c.decoder_order == default_decoder_order(InputMode::kAr));
    CHECK(c.decoder_order.size() == 4);
  }

  TEST_CASE("bad documents are config errors") {
    auto code = [](const Json &doc) {
      return code_of([&] { model_config_from_json(doc); });
    };
    CHECK(code(Json{{"hidden", 3}}) == ErrorCode::kInvalidConfig);
    CHECK(code(Json{{"hidden_size", "big"}}) == ErrorCode::kInvalidConfig);
    CHECK(code(Json{{"hidden_size", 1.5}}) == ErrorCode::kInvalidConfig);
    CHECK(code(Json{{"backbone", "gru"}}) == ErrorCode::kInvalidConfig);
    CHECK(code(Json{{"decoder_order", {"lm", "cl"}}}) == ErrorCode::kInvalidConfig);
    CHECK(code(Json::array()) == ErrorCode::kInvalidConfig);
    CHECK(code_of([] { schedule_from_json(Json{{"batch_size", -1}}); }) ==
          ErrorCode::kInvalidConfig);
    CHECK(code_of([] { split_spec_from_json(Json{{"ratios", {0.5, 0.5, 0.5}}}); }) ==
          ErrorCode::kInvalidConfig);
    CHECK(code_of([] { parse_json("{"); }) == ErrorCode::kInvalidConfig);
  }

  TEST_CASE("schedule and split round trips") {
    nn::TrainSchedule s;
    s.epochs = 7;
    s.teacher_forcing = 0.5;
    CHECK(schedule_from_json(schedule_to_json(s)) == s);
    SplitSpec sp;
    sp.mode = SplitMode::kGlobal;
    sp.seed = 9;
    const SplitSpec back = split_spec_from_json(split_spec_to_json(sp));
    CHECK(back.mode == SplitMode::kGlobal);
    CHECK(back.seed == 9);
    CHECK(back.train == 0.70);
  }
}
