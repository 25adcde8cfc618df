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

#include "tarc/checkpoint.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tarc/error.h"

namespace tarc::nn {

namespace {

[[noreturn]] void invalid(const std::string &what) {
  throw Error(ErrorCode::kCheckpointInvalid, what);
}

std::string_view kind_name(TensorKind kind) {
  switch (kind) {
    case TensorKind::kWeight: return "weight";
    case TensorKind::kEmbedding: return "embedding";
    case TensorKind::kBias: return "bias";
    case TensorKind::kGain: return "gain";
  }
  return "";
}

template <typename T>
void put(std::string &out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T take(std::string_view in, size_t offset) {
  if (offset + sizeof(T) > in.size()) invalid("truncated checkpoint");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

std::string encode_checkpoint(const Model &model, const Json &metadata) {
  Json vocabs = Json::object();
  for (const Vocabulary &v : model.vocabs.streams) {
    Json symbols = Json::array();
    for (size_t i = kNumSpecials; i < v.size(); ++i) {
      symbols.push_back(v.symbol(static_cast<int>(i)));
    }
    vocabs[std::string(stream_name(v.stream()))] = symbols;
  }
  Json manifest = Json::array();
  uint64_t offset = 0;
  for (const Tensor &t : model.params.tensors()) {
    manifest.push_back({{"name", t.name},
                        {"kind", std::string(kind_name(t.kind))},
                        {"rows", t.value.rows()},
                        {"cols", t.value.cols()},
                        {"offset", offset}});
    offset += static_cast<uint64_t>(t.value.size()) * sizeof(double);
  }
  const Json header{{"config", model_config_to_json(model.config)},
                    {"vocabularies", vocabs},
                    {"tensors", manifest},
                    {"metadata", metadata}};
  const std::string text = header.dump();

  std::string out(kCheckpointMagic);
  put<uint32_t>(out, kCheckpointVersion);
  put<uint64_t>(out, text.size());
  out += text;
  out.reserve(out.size() + offset);
  for (const Tensor &t : model.params.tensors()) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) put<double>(out, t.value.data()[i]);
  }
  return out;
}

Model decode_checkpoint(std::string_view bytes, Json *metadata) {
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) invalid("bad magic");
  size_t pos = kCheckpointMagic.size();
  const auto version = take<uint32_t>(bytes, pos);
  pos += sizeof(uint32_t);
  if (version != kCheckpointVersion) {
    invalid("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_size = take<uint64_t>(bytes, pos);
  pos += sizeof(uint64_t);
  if (header_size > bytes.size() - pos) invalid("truncated header");
  Json header;
  try {
    header = Json::parse(bytes.substr(pos, header_size));
  } catch (const Json::parse_error &e) {
    invalid(std::string("malformed header: ") + e.what());
  }
  const std::string_view payload = bytes.substr(pos + header_size);

  ModelConfig config;
  Vocabularies vocabs;
  try {
    config = model_config_from_json(header.at("config"));
    for (Vocabulary &v : vocabs.streams) {
      const Json &symbols = header.at("vocabularies").at(std::string(stream_name(v.stream())));
      for (const Json &symbol : symbols) v.add(symbol.get<std::string>());
    }
  } catch (const Json::exception &e) {
    invalid(std::string("malformed header: ") + e.what());
  } catch (const Error &e) {
    invalid("header: " + e.detail());
  }

  Model model = make_model(config, vocabs);
  std::vector<Tensor> &tensors = model.params.tensors();
  const auto found = header.find("tensors");
  if (found == header.end()) invalid("header lacks a tensor manifest");
  const Json &manifest = *found;
  if (!manifest.is_array() || manifest.size() != tensors.size()) {
    invalid("manifest lists " + std::to_string(manifest.size()) + " tensors, config implies " +
            std::to_string(tensors.size()));
  }
  try {
    for (size_t i = 0; i < tensors.size(); ++i) {
      Tensor &t = tensors[i];
      const Json &entry = manifest[i];
      const auto name = entry.at("name").get<std::string>();
      const auto rows = entry.at("rows").get<long>();
      const auto cols = entry.at("cols").get<long>();
      if (name != t.name || rows != t.value.rows() || cols != t.value.cols() ||
          entry.at("kind").get<std::string>() != kind_name(t.kind)) {
        invalid("tensor " + std::to_string(i) + " is " + name + " " + std::to_string(rows) +
                "x" + std::to_string(cols) + ", expected " + t.name + " " +
                std::to_string(t.value.rows()) + "x" + std::to_string(t.value.cols()));
      }
      const auto offset = entry.at("offset").get<uint64_t>();
      const uint64_t size = static_cast<uint64_t>(t.value.size()) * sizeof(double);
      if (offset > payload.size() || size > payload.size() - offset) {
        invalid("tensor " + name + " lies outside the payload");
      }
      for (Eigen::Index k = 0; k < t.value.size(); ++k) {
        const uint64_t at = offset + static_cast<uint64_t>(k) * sizeof(double);
        t.value.data()[k] = take<double>(payload, at);
      }
    }
  } catch (const Json::exception &e) {
    invalid(std::string("malformed manifest: ") + e.what());
  }
  if (metadata != nullptr) *metadata = header.value("metadata", Json::object());
  return model;
}

void save_checkpoint(const std::string &path, const Model &model, const Json &metadata) {
  const std::string bytes = encode_checkpoint(model, metadata);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Model load_checkpoint(const std::string &path, Json *metadata) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kCheckpointNotFound, "no checkpoint at " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str(), metadata);
}

}  // namespace tarc::nn
