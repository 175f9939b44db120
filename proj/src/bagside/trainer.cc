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

#include "bagside/trainer.h"

#include <cmath>
#include <optional>
#include <string>

#include "bagside/checkpoint.h"
#include "bagside/eval.h"
#include "bagside/optimizer.h"
#include "bagside/parallel.h"
#include "bagside/rng.h"

namespace bagside {

namespace {

constexpr size_t kReduceChunk = 8;

constexpr uint64_t kInitStream = 0;
constexpr uint64_t kEpochStream = 1000;

}  // namespace

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "nadam";
}

OptimizerKind ParseOptimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "nadam") return OptimizerKind::kNadam;
  Fail(ErrorCode::kInvalidArgument, "unknown optimizer \"" + std::string(name) + "\"");
}

void TrainConfig::Validate() const {
  model.Validate();
  if (!(lr > 0.0) || !std::isfinite(lr)) Fail(ErrorCode::kInvalidArgument, "lr must be > 0");
  if (batch_size == 0) Fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (max_epochs == 0) Fail(ErrorCode::kInvalidArgument, "max_epochs must be >= 1");
  if (patience == 0) Fail(ErrorCode::kInvalidArgument, "patience must be >= 1");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "nadam constants out of range");
  }
}

TrainConfig ConfigureForData(TrainConfig cfg, const BagDataset &data) {
  cfg.model.d_s = data.embeddings->dim();
  cfg.model.n_rel = static_cast<uint32_t>(data.vocab->relations.size());
  return cfg;
}

double BatchGradient(const BagDataset &data, std::span<const uint32_t> batch,
                     const ModelParams &params, const ModelConfig &cfg, Mode mode,
                     uint64_t dropout_seed, size_t threads, Gradients *grads) {
  const size_t chunks = (batch.size() + kReduceChunk - 1) / kReduceChunk;
  std::vector<std::optional<Gradients>> partial(chunks);
  std::vector<double> losses(batch.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());

  ParallelFor(chunks, threads, [&](size_t c) {
    Gradients g = params;
    SetZero(&g);
    const size_t end = std::min(batch.size(), (c + 1) * kReduceChunk);
    for (size_t k = c * kReduceChunk; k < end; ++k) {
      const Bag &bag = data.bags[batch[k]];
      Rng rng(DeriveSeed(dropout_seed, batch[k]));
      ForwardCache cache = Forward(bag, *data.embeddings, params, cfg, mode, &rng);
      losses[k] = CrossEntropy(cache.probs, bag.rel);
      AccumulateBackward(cache, bag, bag.rel, params, scale, &g);
    }
    partial[c] = std::move(g);
  });

  *grads = std::move(*partial[0]);
  for (size_t c = 1; c < chunks; ++c) AddScaled(grads, *partial[c], 1.0);
  double loss = 0.0;
  for (double l : losses) loss += l;
  return loss * scale;
}

TrainResult Train(const BagDataset &train, const BagDataset &valid, const TrainConfig &config) {
  if (train.vocab != valid.vocab && (train.vocab->relations.names() != valid.vocab->relations.names() ||
                                     train.vocab->types.size() != valid.vocab->types.size() ||
                                     train.vocab->aliases.size() != valid.vocab->aliases.size())) {
    Fail(ErrorCode::kInvalidArgument, "train and valid splits use different vocabularies");
  }
  TrainResult result;
  result.config = ConfigureForData(config, train);
  const TrainConfig &cfg = result.config;
  cfg.Validate();
  if (valid.embeddings->dim() != cfg.model.d_s) {
    Fail(ErrorCode::kShapeMismatch, "train and valid embeddings differ in dim");
  }

  ModelParams params = InitParams(cfg.model, *train.vocab, DeriveSeed(cfg.seed, kInitStream));
  std::optional<NadamState> nadam;
  if (cfg.optimizer == OptimizerKind::kNadam) {
    nadam = NadamState::For(params, cfg.beta1, cfg.beta2, cfg.epsilon);
  }

  result.best = params;
  RoundToFloat(&result.best);
  result.best_valid_accuracy = -1.0;
  uint32_t stale = 0;
  Gradients grads;

  for (uint32_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const uint64_t epoch_seed = DeriveSeed(cfg.seed, kEpochStream + epoch);
    double loss_sum = 0.0;
    for (const auto &batch : Batches(train.bags.size(), cfg.batch_size, epoch_seed)) {
      const double loss = BatchGradient(train, batch, params, cfg.model, Mode::kTrain,
                                        epoch_seed, cfg.threads, &grads);
      ModelParams before = params;
      if (std::isfinite(loss)) {
        if (nadam) {
          NadamStep(&params, grads, &*nadam, cfg.lr);
        } else {
          SgdStep(&params, grads, cfg.lr);
        }
      }
      if (!std::isfinite(loss) || !params.AllFinite()) {
        if (result.best_valid_accuracy < 0.0) result.best_valid_accuracy = 0.0;
        throw DivergedError("training diverged in epoch " + std::to_string(epoch) +
                                " (non-finite loss or parameters)",
                            std::move(before), std::move(result));
      }
      loss_sum += loss * static_cast<double>(batch.size());
    }

    ModelParams snapshot = params;
    RoundToFloat(&snapshot);
    const double acc = BagAccuracy(snapshot, cfg.model, valid, cfg.threads);
    result.history.push_back({epoch, loss_sum / static_cast<double>(train.bags.size()), acc});
    if (acc > result.best_valid_accuracy) {
      result.best_valid_accuracy = acc;
      result.best_epoch = epoch;
      result.best = std::move(snapshot);
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  return result;
}

}  // namespace bagside
