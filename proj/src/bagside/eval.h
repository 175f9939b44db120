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

#ifndef BAGSIDE_EVAL_H_
#define BAGSIDE_EVAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bagside/corpus.h"
#include "bagside/model.h"

namespace bagside {

// One (bag, non-NA relation) prediction used for ranking.
struct ScoredTriple {
  uint32_t bag_id = 0;
  uint32_t rel = 0;
  double score = 0.0;
  bool correct = false;

  bool operator==(const ScoredTriple &) const = default;
};

struct PRPoint {
  double recall = 0.0;
  double precision = 0.0;

  bool operator==(const PRPoint &) const = default;
};

// Eval-mode scores for every bag and every relation except NA, in bag order
// then relation order.
std::vector<ScoredTriple> ScoreAll(const ModelParams &params, const ModelConfig &cfg,
                                   const BagDataset &bags, size_t threads = 0);

// Ranking order shared by P@N and the PR curve: score descending, then bag id,
// then relation ascending.
bool RanksBefore(const ScoredTriple &a, const ScoredTriple &b);
std::vector<ScoredTriple> Ranked(std::span<const ScoredTriple> triples);

// Fraction of correct triples among the N best ranked.
double PrecisionAtN(std::span<const ScoredTriple> triples, size_t n);

enum class SampleMode { kOne, kTwo, kAll };

std::string_view SampleModeName(SampleMode mode);
SampleMode ParseSampleMode(std::string_view name);

// kAll returns the dataset unchanged. kOne / kTwo keep only bags with more
// than two sentences and replace each bag's sentences by 1 / 2 drawn
// uniformly without replacement (original order kept).
BagDataset SubsampleProtocol(const BagDataset &bags, SampleMode mode, uint64_t seed);

struct PnCell {
  SampleMode mode = SampleMode::kAll;
  size_t n = 0;
  double precision = 0.0;
};

// P@N for every (mode, n) pair, modes outermost.
std::vector<PnCell> PnReport(const ModelParams &params, const ModelConfig &cfg,
                             const BagDataset &bags, uint64_t seed,
                             std::span<const SampleMode> modes, std::span<const size_t> ns,
                             size_t threads = 0);

// One point per ranked prefix k: precision = correct_k / k,
// recall = correct_k / total_positives.
std::vector<PRPoint> PrCurve(std::span<const ScoredTriple> triples, size_t total_positives);

// Trapezoidal area over recall with a leading (0, first precision) point.
double Auc(std::span<const PRPoint> points);

// Fraction of bags whose predicted relation equals the gold relation.
double BagAccuracy(const ModelParams &params, const ModelConfig &cfg, const BagDataset &bags,
                   size_t threads = 0);

// CSV exports. Reals use 17 significant digits.
std::string PrCurveCsv(std::span<const PRPoint> points);
std::string PnReportCsv(std::span<const PnCell> cells);

}  // namespace bagside

#endif  // BAGSIDE_EVAL_H_
