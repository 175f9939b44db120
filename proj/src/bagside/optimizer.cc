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

#include "bagside/optimizer.h"

#include <cmath>

#include "bagside/error.h"
#include "bagside/rng.h"

namespace bagside {

namespace {

template <typename T>
void FillUniform(T *tensor, double bound, Rng *rng) {
  for (Eigen::Index i = 0; i < tensor->size(); ++i) {
    tensor->data()[i] = rng->Uniform(-bound, bound);
  }
}

}  // namespace

double GlorotBound(size_t fan_in, size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

ModelParams InitParams(const ModelConfig &cfg, const Vocab &vocab, uint64_t seed) {
  cfg.Validate();
  ModelParams p = ModelParams::Zeros(cfg, vocab.aliases.size(), vocab.types.size());
  Rng rng(seed);
  FillUniform(&p.alias_table, kTableInitRange, &rng);
  FillUniform(&p.type_table, kTableInitRange, &rng);
  FillUniform(&p.q, kTableInitRange, &rng);
  FillUniform(&p.w1, GlorotBound(p.w1.cols(), p.w1.rows()), &rng);
  FillUniform(&p.w2, GlorotBound(p.w2.cols(), p.w2.rows()), &rng);
  FillUniform(&p.w3, GlorotBound(p.w3.cols(), p.w3.rows()), &rng);
  return p;
}

void SgdStep(ModelParams *params, const Gradients &grads, double lr) {
  AddScaled(params, grads, -lr);
}

NadamState NadamState::For(const ModelParams &params, double beta1, double beta2,
                           double epsilon) {
  NadamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  s.m = params;
  SetZero(&s.m);
  s.v = s.m;
  return s;
}

void NadamStep(ModelParams *params, const Gradients &grads, NadamState *state, double lr) {
  if (!params->SameShape(grads) || !params->SameShape(state->m) ||
      !params->SameShape(state->v)) {
    Fail(ErrorCode::kShapeMismatch, "nadam state, gradients and params differ in shape");
  }
  const double b1 = state->beta1;
  const double b2 = state->beta2;
  state->t += 1;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(state->t));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(state->t));

  auto theta = params->Tensors();
  auto g = grads.Tensors();
  auto m = state->m.Tensors();
  auto v = state->v.Tensors();
  for (size_t t = 0; t < theta.size(); ++t) {
    for (size_t i = 0; i < theta[t].data.size(); ++i) {
      const double gi = g[t].data[i];
      m[t].data[i] = b1 * m[t].data[i] + (1.0 - b1) * gi;
      v[t].data[i] = b2 * v[t].data[i] + (1.0 - b2) * gi * gi;
      const double m_hat = m[t].data[i] / bias1;
      const double v_hat = v[t].data[i] / bias2;
      theta[t].data[i] -= lr * (b1 * m_hat + (1.0 - b1) * gi / bias1) /
                          (std::sqrt(v_hat) + state->epsilon);
    }
  }
}

}  // namespace bagside
