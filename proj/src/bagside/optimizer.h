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

#ifndef BAGSIDE_OPTIMIZER_H_
#define BAGSIDE_OPTIMIZER_H_

#include <cstdint>

#include "bagside/corpus.h"
#include "bagside/model.h"

namespace bagside {

// Dense weights ~ U(-sqrt(6 / (fan_in + fan_out)), +...), biases zero,
// alias/type tables and the attention query ~ U(-0.1, 0.1).
ModelParams InitParams(const ModelConfig &cfg, const Vocab &vocab, uint64_t seed);

inline constexpr double kTableInitRange = 0.1;

// Glorot bound for a fan_out x fan_in weight matrix.
double GlorotBound(size_t fan_in, size_t fan_out);

// params -= lr * grads.
void SgdStep(ModelParams *params, const Gradients &grads, double lr);

struct NadamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  uint64_t t = 0;
  ModelParams m;  // first moment
  ModelParams v;  // second moment

  // Fresh state with zero moments shaped like `params`.
  static NadamState For(const ModelParams &params, double beta1 = 0.9,
                        double beta2 = 0.999, double epsilon = 1e-8);
};

// Nesterov-accelerated Adam:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   theta <- theta - lr (b1 m_hat + (1 - b1) g / (1 - b1^t)) / (sqrt(v_hat) + eps)
void NadamStep(ModelParams *params, const Gradients &grads, NadamState *state, double lr);

}  // namespace bagside

#endif  // BAGSIDE_OPTIMIZER_H_
