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

#include "bagside/search.h"

#include "bagside/error.h"
#include "bagside/rng.h"

namespace bagside {

namespace {

template <typename T>
T Pick(const std::vector<T> &choices, Rng *rng) {
  if (choices.empty()) Fail(ErrorCode::kInvalidArgument, "empty search-space choice list");
  return choices[rng->Below(choices.size())];
}

// Uniform(0, 1) excluding the measure-zero draw 0, which is not a valid lr.
double PositiveUniform(Rng *rng) {
  double x = 0.0;
  while (x == 0.0) x = rng->Uniform();
  return x;
}

}  // namespace

TrainConfig SampleConfig(const SearchSpace &space, const TrainConfig &base, uint64_t seed) {
  Rng rng(seed);
  TrainConfig cfg = base;
  cfg.model.u1 = Pick(space.u1_choices, &rng);
  cfg.model.a1 = Pick(space.activation_choices, &rng);
  cfg.model.p1 = rng.Uniform();
  cfg.model.u2 = Pick(space.u2_choices, &rng);
  cfg.model.a2 = Pick(space.activation_choices, &rng);
  cfg.model.p2 = rng.Uniform();
  cfg.optimizer = Pick(space.optimizer_choices, &rng);
  cfg.lr = PositiveUniform(&rng);
  cfg.seed = seed;
  return cfg;
}

SearchResult RandomSearch(const SearchSpace &space, size_t trials, const TrainConfig &base,
                          uint64_t seed, const TrialEvaluator &evaluate) {
  if (trials == 0) Fail(ErrorCode::kInvalidArgument, "random search needs trials >= 1");
  SearchResult result;
  double best = -1.0;
  for (size_t i = 0; i < trials; ++i) {
    Trial trial;
    trial.index = i;
    trial.config = SampleConfig(space, base, seed + i);
    try {
      trial.valid_accuracy = evaluate(trial.config);
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kDiverged) throw;
      trial.diverged = true;
      trial.error = e.what();
      trial.valid_accuracy = 0.0;
    }
    if (trial.valid_accuracy > best) {
      best = trial.valid_accuracy;
      result.best = trial.config;
      result.best_index = i;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

TrialEvaluator TrainingEvaluator(const BagDataset &train, const BagDataset &valid) {
  return [&train, &valid](const TrainConfig &cfg) {
    return Train(train, valid, cfg).best_valid_accuracy;
  };
}

}  // namespace bagside
