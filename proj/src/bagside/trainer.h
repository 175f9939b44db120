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

#ifndef BAGSIDE_TRAINER_H_
#define BAGSIDE_TRAINER_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "bagside/corpus.h"
#include "bagside/error.h"
#include "bagside/model.h"

namespace bagside {

enum class OptimizerKind { kSgd, kNadam };

std::string_view OptimizerName(OptimizerKind kind);
OptimizerKind ParseOptimizer(std::string_view name);

struct TrainConfig {
  ModelConfig model;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double lr = 0.1;
  uint32_t batch_size = 32;
  uint32_t max_epochs = 50;
  uint32_t patience = 5;
  uint64_t seed = 0;
  // Nadam constants.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Worker cap for per-bag forward/backward; 0 = hardware concurrency.
  // Results do not depend on this value.
  uint32_t threads = 0;

  void Validate() const;
  bool operator==(const TrainConfig &) const = default;
};

struct EpochStats {
  uint32_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_accuracy = 0.0;
};

struct TrainResult {
  TrainConfig config;  // with d_s and n_rel filled in from the data
  ModelParams best;    // float32-representable, see RoundToFloat
  double best_valid_accuracy = 0.0;
  uint32_t best_epoch = 0;
  std::vector<EpochStats> history;
};

// Raised when the loss or the parameters become non-finite. Carries the last
// parameters that were still finite and everything recorded so far.
class DivergedError : public Error {
 public:
  DivergedError(const std::string &message, ModelParams last_finite, TrainResult partial)
      : Error(ErrorCode::kDiverged, message),
        last_finite_(std::move(last_finite)),
        partial_(std::move(partial)) {}

  const ModelParams &last_finite() const { return last_finite_; }
  const TrainResult &partial() const { return partial_; }

 private:
  ModelParams last_finite_;
  TrainResult partial_;
};

// Fills in the data-driven model dims (d_s from the embeddings, n_rel from
// the relation vocabulary).
TrainConfig ConfigureForData(TrainConfig cfg, const BagDataset &data);

// Mini-batch training with validation-accuracy model selection and early
// stopping after `patience` epochs without improvement.
TrainResult Train(const BagDataset &train, const BagDataset &valid, const TrainConfig &cfg);

// Mean cross-entropy over the bags of `batch` plus the mean gradient. Bags
// are processed in fixed chunks so the floating-point reduction order does
// not depend on the worker count. `dropout_seed` selects train-mode masks;
// pass Mode::kEval to disable dropout.
double BatchGradient(const BagDataset &data, std::span<const uint32_t> batch,
                     const ModelParams &params, const ModelConfig &cfg, Mode mode,
                     uint64_t dropout_seed, size_t threads, Gradients *grads);

}  // namespace bagside

#endif  // BAGSIDE_TRAINER_H_
