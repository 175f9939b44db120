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

#ifndef BAGSIDE_MODEL_H_
#define BAGSIDE_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bagside/corpus.h"
#include "bagside/rng.h"
#include "bagside/side_info.h"

namespace bagside {

enum class Activation { kTanh, kRelu, kSigmoid };

std::string_view ActivationName(Activation a);
Activation ParseActivation(std::string_view name);

struct ModelConfig {
  uint32_t d_s = 768;  // sentence encoding dim, taken from the embeddings
  uint32_t d_a = 32;   // alias embedding dim
  uint32_t d_t = 50;   // entity-type embedding dim
  uint32_t u1 = 96;
  Activation a1 = Activation::kRelu;
  double p1 = 0.0;
  uint32_t u2 = 24;
  Activation a2 = Activation::kRelu;
  double p2 = 0.0;
  uint32_t n_rel = 2;

  uint32_t rep_dim() const { return d_s + d_a; }
  uint32_t input_dim() const { return d_s + d_a + 2 * d_t; }

  // Fails with InvalidArgument on zero dims or dropout outside [0, 1).
  void Validate() const;
  bool operator==(const ModelConfig &) const = default;
};

// Contiguous row-major view of one parameter tensor. Vectors have cols = 1.
struct TensorView {
  std::string_view name;
  size_t rows;
  size_t cols;
  bool is_vector;
  std::span<double> data;
};

struct ConstTensorView {
  std::string_view name;
  size_t rows;
  size_t cols;
  bool is_vector;
  std::span<const double> data;
};

// All trainable tensors. Matrices are row-major so every tensor serializes
// in the same order it is stored.
struct ModelParams {
  Table alias_table;  // |aliases| x d_a, row 0 = NO_ALIAS
  Table type_table;   // |types| x d_t, row 0 = NO_TYPE
  Eigen::VectorXd q;  // attention query, d_s + d_a
  Table w1;           // u1 x (d_s + d_a + 2 d_t)
  Eigen::VectorXd b1;
  Table w2;           // u2 x u1
  Eigen::VectorXd b2;
  Table w3;           // n_rel x u2
  Eigen::VectorXd b3;

  static ModelParams Zeros(const ModelConfig &cfg, size_t aliases, size_t types);

  // Tensors in a fixed order: alias_table, type_table, q, w1, b1, w2, b2, w3, b3.
  std::vector<TensorView> Tensors();
  std::vector<ConstTensorView> Tensors() const;

  // Fails with ShapeMismatch unless every tensor has the shape implied by cfg
  // and the vocabulary sizes.
  void CheckShapes(const ModelConfig &cfg, size_t aliases, size_t types) const;
  bool SameShape(const ModelParams &other) const;
  bool AllFinite() const;

  bool operator==(const ModelParams &other) const;
};

// Gradients mirror the parameter layout exactly.
using Gradients = ModelParams;

// this += scale * other, tensor by tensor.
void AddScaled(ModelParams *acc, const ModelParams &other, double scale);
void SetZero(ModelParams *params);

enum class Mode { kTrain, kEval };

struct ForwardCache {
  Mode mode = Mode::kEval;
  Activation a1 = Activation::kTanh;
  Activation a2 = Activation::kTanh;
  std::vector<Eigen::VectorXd> reps;  // per-sentence [encoding; alias vector]
  Eigen::VectorXd scores;             // attention logits q . s_i
  Eigen::VectorXd alpha;              // attention weights
  Eigen::VectorXd bag;                // attention-pooled bag vector
  Eigen::VectorXd z;                  // [bag; sub type; obj type]
  Eigen::VectorXd pre1, h1, mask1, out1;
  Eigen::VectorXd pre2, h2, mask2, out2;
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
};

Eigen::VectorXd StableSoftmax(const Eigen::VectorXd &logits);

struct AttentionResult {
  Eigen::VectorXd alpha;
  Eigen::VectorXd bag;
};

// Dot-product attention with a single learned query.
AttentionResult AttentionPool(const std::vector<Eigen::VectorXd> &reps,
                              const Eigen::VectorXd &q);

// Full forward pass. In train mode inverted dropout masks are drawn from
// `rng` (required when a dropout rate is non-zero); eval mode is deterministic
// and ignores `rng`.
ForwardCache Forward(const Bag &bag, const EmbeddingMatrix &embeddings,
                     const ModelParams &params, const ModelConfig &cfg, Mode mode,
                     Rng *rng = nullptr);

inline constexpr double kLossFloor = 1e-12;

// -ln(max(p_y, 1e-12)).
double CrossEntropy(const Eigen::VectorXd &probs, uint32_t label);

// Exact gradients of CrossEntropy(Forward(...).probs, label) with respect to
// every parameter tensor, reusing the cached dropout masks.
Gradients Backward(const ForwardCache &cache, const Bag &bag, uint32_t label,
                   const ModelParams &params);

// Same as Backward but accumulates scale * gradient into `grads`.
void AccumulateBackward(const ForwardCache &cache, const Bag &bag, uint32_t label,
                        const ModelParams &params, double scale, Gradients *grads);

struct Prediction {
  uint32_t relation = 0;
  Eigen::VectorXd probs;
};

// Eval-mode argmax; ties go to the lowest relation id.
Prediction Predict(const Bag &bag, const EmbeddingMatrix &embeddings,
                   const ModelParams &params, const ModelConfig &cfg);

uint32_t ArgMax(const Eigen::VectorXd &probs);

}  // namespace bagside

#endif  // BAGSIDE_MODEL_H_
