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

#ifndef BAGSIDE_CHECKPOINT_H_
#define BAGSIDE_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

#include "bagside/model.h"
#include "bagside/trainer.h"

namespace bagside {

struct CheckpointMeta {
  uint64_t seed = 0;
  double valid_accuracy = 0.0;

  bool operator==(const CheckpointMeta &) const = default;
};

struct Checkpoint {
  TrainConfig config;
  ModelParams params;
  CheckpointMeta meta;
};

// Tensor payloads are stored as 32-bit floats, so params are rounded to the
// nearest float on save. Params that already went through RoundToFloat (as
// returned by Train) round-trip bit-exactly.
void RoundToFloat(ModelParams *params);

// BSD1 layout: "BSD1", u32 little-endian header length, UTF-8 JSON header
// {config, vocab_sizes, tensors: [{name, shape, offset, len}], seed,
// valid_accuracy}, then the little-endian float32 tensor payloads.
std::string SaveCheckpoint(const ModelParams &params, const TrainConfig &cfg,
                           const CheckpointMeta &meta);
Checkpoint LoadCheckpoint(std::string_view bytes);

nlohmann::json TrainConfigToJson(const TrainConfig &cfg);
// Reads every key present in `j` over the defaults in `base`.
TrainConfig TrainConfigFromJson(const nlohmann::json &j, TrainConfig base = {});

}  // namespace bagside

#endif  // BAGSIDE_CHECKPOINT_H_
