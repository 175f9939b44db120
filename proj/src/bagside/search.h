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

#ifndef BAGSIDE_SEARCH_H_
#define BAGSIDE_SEARCH_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bagside/corpus.h"
#include "bagside/trainer.h"

namespace bagside {

// Hyperparameter search space for the two dense layers and the optimizer.
// Dropout rates and the learning rate are drawn from Uniform(0, 1).
struct SearchSpace {
  std::vector<uint32_t> u1_choices = {48, 96, 192, 384, 768};
  std::vector<uint32_t> u2_choices = {6, 12, 24, 48};
  std::vector<Activation> activation_choices = {Activation::kTanh, Activation::kRelu,
                                                Activation::kSigmoid};
  std::vector<OptimizerKind> optimizer_choices = {OptimizerKind::kNadam, OptimizerKind::kSgd};
};

struct Trial {
  size_t index = 0;
  TrainConfig config;
  double valid_accuracy = 0.0;
  bool diverged = false;
  std::string error;

  bool operator==(const Trial &) const = default;
};

struct SearchResult {
  TrainConfig best;
  size_t best_index = 0;
  std::vector<Trial> trials;
};

// Scores one sampled configuration (higher is better). May throw; a
// DivergedError scores the trial 0.
using TrialEvaluator = std::function<double(const TrainConfig &)>;

// Draws trial i's configuration from a generator seeded with seed + i,
// overriding the searched fields of `base`.
TrainConfig SampleConfig(const SearchSpace &space, const TrainConfig &base, uint64_t seed);

SearchResult RandomSearch(const SearchSpace &space, size_t trials, const TrainConfig &base,
                          uint64_t seed, const TrialEvaluator &evaluate);

// Evaluator that trains on `train` and reports the best validation accuracy.
TrialEvaluator TrainingEvaluator(const BagDataset &train, const BagDataset &valid);

}  // namespace bagside

#endif  // BAGSIDE_SEARCH_H_
