// Copyright 2026 The BagSide Authors.
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

#include "bagside/checkpoint.h"

#include <bit>
#include <string>
#include <vector>

#include "bagside/error.h"

namespace bagside {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "BSD1";

void AppendU32(std::string *out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t ReadU32(std::string_view bytes, size_t pos) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(bytes[pos + i]);
  return v;
}

json ModelConfigToJson(const ModelConfig &m) {
  return {{"d_s", m.d_s}, {"d_a", m.d_a}, {"d_t", m.d_t},
          {"u1", m.u1},   {"a1", ActivationName(m.a1)}, {"p1", m.p1},
          {"u2", m.u2},   {"a2", ActivationName(m.a2)}, {"p2", m.p2},
          {"n_rel", m.n_rel}};
}

template <typename T>
void ReadField(const json &j, const char *key, T *out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    *out = it->get<T>();
  } catch (const json::exception &e) {
    Fail(ErrorCode::kInvalidArgument, std::string("config field \"") + key + "\": " + e.what());
  }
}

ModelConfig ModelConfigFromJson(const json &j, ModelConfig m) {
  if (!j.is_object()) Fail(ErrorCode::kInvalidArgument, "\"model\" must be an object");
  ReadField(j, "d_s", &m.d_s);
  ReadField(j, "d_a", &m.d_a);
  ReadField(j, "d_t", &m.d_t);
  ReadField(j, "u1", &m.u1);
  ReadField(j, "p1", &m.p1);
  ReadField(j, "u2", &m.u2);
  ReadField(j, "p2", &m.p2);
  ReadField(j, "n_rel", &m.n_rel);
  std::string name;
  if (j.contains("a1")) {
    ReadField(j, "a1", &name);
    m.a1 = ParseActivation(name);
  }
  if (j.contains("a2")) {
    ReadField(j, "a2", &name);
    m.a2 = ParseActivation(name);
  }
  return m;
}

}  // namespace

json TrainConfigToJson(const TrainConfig &cfg) {
  return {{"model", ModelConfigToJson(cfg.model)},
          {"optimizer", OptimizerName(cfg.optimizer)},
          {"lr", cfg.lr},
          {"batch_size", cfg.batch_size},
          {"max_epochs", cfg.max_epochs},
          {"patience", cfg.patience},
          {"seed", cfg.seed},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"epsilon", cfg.epsilon}};
}

TrainConfig TrainConfigFromJson(const json &j, TrainConfig cfg) {
  if (!j.is_object()) Fail(ErrorCode::kInvalidArgument, "config must be a JSON object");
  if (j.contains("model")) cfg.model = ModelConfigFromJson(j["model"], cfg.model);
  if (j.contains("optimizer")) {
    std::string name;
    ReadField(j, "optimizer", &name);
    cfg.optimizer = ParseOptimizer(name);
  }
  ReadField(j, "lr", &cfg.lr);
  ReadField(j, "batch_size", &cfg.batch_size);
  ReadField(j, "max_epochs", &cfg.max_epochs);
  ReadField(j, "patience", &cfg.patience);
  ReadField(j, "seed", &cfg.seed);
  ReadField(j, "beta1", &cfg.beta1);
  ReadField(j, "beta2", &cfg.beta2);
  ReadField(j, "epsilon", &cfg.epsilon);
  return cfg;
}

void RoundToFloat(ModelParams *params) {
  for (auto &t : params->Tensors()) {
    for (double &v : t.data) v = static_cast<double>(static_cast<float>(v));
  }
}

std::string SaveCheckpoint(const ModelParams &params, const TrainConfig &cfg,
                           const CheckpointMeta &meta) {
  json tensors = json::array();
  std::string payload;
  for (const auto &t : params.Tensors()) {
    json shape = t.is_vector ? json::array({t.rows}) : json::array({t.rows, t.cols});
    tensors.push_back({{"name", t.name},
                       {"shape", shape},
                       {"offset", payload.size()},
                       {"len", t.data.size() * 4}});
    for (double v : t.data) AppendU32(&payload, std::bit_cast<uint32_t>(static_cast<float>(v)));
  }
  json header = {{"config", TrainConfigToJson(cfg)},
                 {"vocab_sizes",
                  {{"relations", params.b3.size()},
                   {"types", params.type_table.rows()},
                   {"aliases", params.alias_table.rows()}}},
                 {"tensors", tensors},
                 {"seed", meta.seed},
                 {"valid_accuracy", meta.valid_accuracy}};
  const std::string text = header.dump();

  std::string out;
  out.reserve(8 + text.size() + payload.size());
  out.append(kMagic);
  AppendU32(&out, static_cast<uint32_t>(text.size()));
  out += text;
  out += payload;
  return out;
}

Checkpoint LoadCheckpoint(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic) {
    Fail(ErrorCode::kBadMagic, "checkpoint does not start with \"BSD1\"");
  }
  if (bytes.size() < 8) Fail(ErrorCode::kTruncated, "checkpoint header length is truncated");
  const uint32_t header_len = ReadU32(bytes, 4);
  if (bytes.size() - 8 < header_len) Fail(ErrorCode::kTruncated, "checkpoint header is truncated");
  json header = json::parse(bytes.substr(8, header_len), nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    Fail(ErrorCode::kManifestMismatch, "checkpoint header is not a JSON object");
  }
  const std::string_view payload = bytes.substr(8 + header_len);

  Checkpoint ck;
  try {
    ck.config = TrainConfigFromJson(header.at("config"));
    ck.meta.seed = header.at("seed").get<uint64_t>();
    ck.meta.valid_accuracy = header.at("valid_accuracy").get<double>();
    const auto &sizes = header.at("vocab_sizes");
    const size_t relations = sizes.at("relations").get<size_t>();
    const size_t types = sizes.at("types").get<size_t>();
    const size_t aliases = sizes.at("aliases").get<size_t>();
    if (relations != ck.config.model.n_rel) {
      Fail(ErrorCode::kManifestMismatch, "vocab_sizes.relations disagrees with config n_rel");
    }
    ck.config.model.Validate();
    ck.params = ModelParams::Zeros(ck.config.model, aliases, types);
  } catch (const json::exception &e) {
    Fail(ErrorCode::kManifestMismatch, std::string("checkpoint header: ") + e.what());
  }

  const json &manifest = header["tensors"];
  auto views = ck.params.Tensors();
  if (!manifest.is_array() || manifest.size() != views.size()) {
    Fail(ErrorCode::kManifestMismatch, "checkpoint must list exactly " +
                                           std::to_string(views.size()) + " tensors");
  }
  size_t expected_offset = 0;
  for (size_t i = 0; i < views.size(); ++i) {
    auto &view = views[i];
    const json &entry = manifest[i];
    std::vector<size_t> shape;
    size_t offset = 0;
    size_t len = 0;
    try {
      if (entry.at("name").get<std::string>() != view.name) {
        Fail(ErrorCode::kManifestMismatch, "tensor " + std::to_string(i) + " should be " +
                                               std::string(view.name));
      }
      shape = entry.at("shape").get<std::vector<size_t>>();
      offset = entry.at("offset").get<size_t>();
      len = entry.at("len").get<size_t>();
    } catch (const json::exception &e) {
      Fail(ErrorCode::kManifestMismatch, std::string("tensor manifest: ") + e.what());
    }
    size_t elements = 1;
    for (size_t d : shape) elements *= d;
    const size_t rank = view.is_vector ? 1 : 2;
    if (shape.size() != rank || elements != view.data.size() || shape[0] != view.rows ||
        (rank == 2 && shape[1] != view.cols)) {
      Fail(ErrorCode::kManifestMismatch, "shape of " + std::string(view.name) +
                                             " disagrees with the config");
    }
    if (len != elements * 4 || offset != expected_offset) {
      Fail(ErrorCode::kManifestMismatch, "byte range of " + std::string(view.name) +
                                             " disagrees with its shape");
    }
    if (offset + len > payload.size()) {
      Fail(ErrorCode::kTruncated, "payload ends inside tensor " + std::string(view.name));
    }
    for (size_t k = 0; k < elements; ++k) {
      view.data[k] = std::bit_cast<float>(ReadU32(payload, offset + 4 * k));
    }
    expected_offset = offset + len;
  }
  if (expected_offset != payload.size()) {
    Fail(ErrorCode::kManifestMismatch, "payload has bytes not covered by the manifest");
  }
  if (!ck.params.AllFinite()) Fail(ErrorCode::kNonFinite, "checkpoint holds non-finite values");
  return ck;
}

}  // namespace bagside
