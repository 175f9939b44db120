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

#include "bagside/eval.h"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "bagside/error.h"
#include "bagside/parallel.h"
#include "bagside/rng.h"

namespace bagside {

namespace {

std::string FormatReal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<ScoredTriple> ScoreAll(const ModelParams &params, const ModelConfig &cfg,
                                   const BagDataset &bags, size_t threads) {
  const size_t per_bag = cfg.n_rel - 1;
  std::vector<ScoredTriple> triples(bags.bags.size() * per_bag);
  ParallelFor(bags.bags.size(), threads, [&](size_t b) {
    const Bag &bag = bags.bags[b];
    const auto probs = Forward(bag, *bags.embeddings, params, cfg, Mode::kEval).probs;
    for (uint32_t r = 1; r < cfg.n_rel; ++r) {
      triples[b * per_bag + r - 1] = {static_cast<uint32_t>(b), r, probs[r], r == bag.rel};
    }
  });
  return triples;
}

bool RanksBefore(const ScoredTriple &a, const ScoredTriple &b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.bag_id != b.bag_id) return a.bag_id < b.bag_id;
  return a.rel < b.rel;
}

std::vector<ScoredTriple> Ranked(std::span<const ScoredTriple> triples) {
  std::vector<ScoredTriple> sorted(triples.begin(), triples.end());
  std::sort(sorted.begin(), sorted.end(), RanksBefore);
  return sorted;
}

double PrecisionAtN(std::span<const ScoredTriple> triples, size_t n) {
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "P@N needs N >= 1");
  if (triples.size() < n) {
    Fail(ErrorCode::kNotEnoughTriples, "P@" + std::to_string(n) + " needs at least " +
                                           std::to_string(n) + " triples, have " +
                                           std::to_string(triples.size()));
  }
  std::vector<ScoredTriple> top(triples.begin(), triples.end());
  std::partial_sort(top.begin(), top.begin() + n, top.end(), RanksBefore);
  size_t correct = 0;
  for (size_t i = 0; i < n; ++i) correct += top[i].correct;
  return static_cast<double>(correct) / static_cast<double>(n);
}

std::string_view SampleModeName(SampleMode mode) {
  switch (mode) {
    case SampleMode::kOne: return "one";
    case SampleMode::kTwo: return "two";
    case SampleMode::kAll: return "all";
  }
  return "all";
}

SampleMode ParseSampleMode(std::string_view name) {
  if (name == "one") return SampleMode::kOne;
  if (name == "two") return SampleMode::kTwo;
  if (name == "all") return SampleMode::kAll;
  Fail(ErrorCode::kInvalidArgument, "unknown mode \"" + std::string(name) + "\"");
}

BagDataset SubsampleProtocol(const BagDataset &bags, SampleMode mode, uint64_t seed) {
  if (mode == SampleMode::kAll) return bags;
  const size_t keep = mode == SampleMode::kOne ? 1 : 2;

  BagDataset out;
  out.embeddings = bags.embeddings;
  out.vocab = bags.vocab;
  Rng rng(seed);
  for (const Bag &bag : bags.bags) {
    if (bag.sentences.size() <= 2) continue;
    // Partial Fisher-Yates over sentence indices.
    std::vector<size_t> idx(bag.sentences.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (size_t i = 0; i < keep; ++i) {
      std::swap(idx[i], idx[i + rng.Below(idx.size() - i)]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());

    Bag reduced = bag;
    reduced.sentences.clear();
    for (size_t i : idx) reduced.sentences.push_back(bag.sentences[i]);
    out.bags.push_back(std::move(reduced));
  }
  if (out.bags.empty()) {
    Fail(ErrorCode::kEmptyAfterFilter, "no bag has more than two sentences");
  }
  return out;
}

std::vector<PnCell> PnReport(const ModelParams &params, const ModelConfig &cfg,
                             const BagDataset &bags, uint64_t seed,
                             std::span<const SampleMode> modes, std::span<const size_t> ns,
                             size_t threads) {
  std::vector<PnCell> cells;
  for (SampleMode mode : modes) {
    const BagDataset reduced =
        SubsampleProtocol(bags, mode, DeriveSeed(seed, static_cast<uint64_t>(mode)));
    const auto triples = ScoreAll(params, cfg, reduced, threads);
    for (size_t n : ns) cells.push_back({mode, n, PrecisionAtN(triples, n)});
  }
  return cells;
}

std::vector<PRPoint> PrCurve(std::span<const ScoredTriple> triples, size_t total_positives) {
  if (total_positives == 0) Fail(ErrorCode::kNoPositives, "PR curve needs at least one positive");
  const auto ranked = Ranked(triples);
  std::vector<PRPoint> points;
  points.reserve(ranked.size());
  size_t correct = 0;
  for (size_t k = 0; k < ranked.size(); ++k) {
    correct += ranked[k].correct;
    points.push_back({static_cast<double>(correct) / static_cast<double>(total_positives),
                      static_cast<double>(correct) / static_cast<double>(k + 1)});
  }
  return points;
}

double Auc(std::span<const PRPoint> points) {
  if (points.empty()) Fail(ErrorCode::kEmptyCurve, "AUC of an empty curve");
  double area = 0.0;
  PRPoint prev{0.0, points.front().precision};
  for (const PRPoint &p : points) {
    area += (p.recall - prev.recall) * (p.precision + prev.precision) / 2.0;
    prev = p;
  }
  return area;
}

double BagAccuracy(const ModelParams &params, const ModelConfig &cfg, const BagDataset &bags,
                   size_t threads) {
  if (bags.bags.empty()) return 0.0;
  std::vector<char> hit(bags.bags.size(), 0);
  ParallelFor(bags.bags.size(), threads, [&](size_t b) {
    const Bag &bag = bags.bags[b];
    hit[b] = Predict(bag, *bags.embeddings, params, cfg).relation == bag.rel;
  });
  const size_t correct = std::count(hit.begin(), hit.end(), 1);
  return static_cast<double>(correct) / static_cast<double>(bags.bags.size());
}

std::string PrCurveCsv(std::span<const PRPoint> points) {
  std::string out = "recall,precision\n";
  for (const PRPoint &p : points) {
    out += FormatReal(p.recall) + "," + FormatReal(p.precision) + "\n";
  }
  return out;
}

std::string PnReportCsv(std::span<const PnCell> cells) {
  std::string out = "mode,n,precision\n";
  for (const PnCell &c : cells) {
    out += std::string(SampleModeName(c.mode)) + "," + std::to_string(c.n) + "," +
           FormatReal(c.precision) + "\n";
  }
  return out;
}

}  // namespace bagside
