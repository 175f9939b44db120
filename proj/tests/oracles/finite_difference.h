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

#ifndef BAGSIDE_TESTS_ORACLES_FINITE_DIFFERENCE_H_
#define BAGSIDE_TESTS_ORACLES_FINITE_DIFFERENCE_H_

// Central finite-difference gradients of the bag loss. Used only to check
// the analytic backward pass; it never calls Backward.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bagside/model.h"

namespace bagside::testing {

inline double BagLoss(const Bag &bag, const EmbeddingMatrix &emb, const ModelParams &params,
                      const ModelConfig &cfg) {
  return CrossEntropy(Forward(bag, emb, params, cfg, Mode::kEval).probs, bag.rel);
}

inline Gradients NumericGradient(const Bag &bag, const EmbeddingMatrix &emb,
                                 const ModelParams &params, const ModelConfig &cfg,
                                 double step = 1e-5) {
  ModelParams probe = params;
  Gradients g = params;
  auto probe_views = probe.Tensors();
  auto g_views = g.Tensors();
  for (size_t t = 0; t < probe_views.size(); ++t) {
    for (size_t i = 0; i < probe_views[t].data.size(); ++i) {
      const double saved = probe_views[t].data[i];
      probe_views[t].data[i] = saved + step;
      const double up = BagLoss(bag, emb, probe, cfg);
      probe_views[t].data[i] = saved - step;
      const double down = BagLoss(bag, emb, probe, cfg);
      probe_views[t].data[i] = saved;
      g_views[t].data[i] = (up - down) / (2.0 * step);
    }
  }
  return g;
}

struct TensorError {
  std::string name;
  double relative_error;
};

// Per-tensor ||a - n|| / max(||a||, ||n||); tensors whose gradients are both
// numerically zero count as exact.
inline std::vector<TensorError> CompareGradients(const Gradients &analytic,
                                                 const Gradients &numeric) {
  std::vector<TensorError> out;
  auto a = analytic.Tensors();
  auto n = numeric.Tensors();
  for (size_t t = 0; t < a.size(); ++t) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (size_t i = 0; i < a[t].data.size(); ++i) {
      diff += (a[t].data[i] - n[t].data[i]) * (a[t].data[i] - n[t].data[i]);
      na += a[t].data[i] * a[t].data[i];
      nn += n[t].data[i] * n[t].data[i];
    }
    const double scale = std::max(std::sqrt(na), std::sqrt(nn));
    out.push_back({std::string(a[t].name), scale < 1e-10 ? 0.0 : std::sqrt(diff) / scale});
  }
  return out;
}

}  // namespace bagside::testing

#endif  // BAGSIDE_TESTS_ORACLES_FINITE_DIFFERENCE_H_
