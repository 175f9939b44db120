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

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"

#include "bagside/error.h"
#include "bagside/eval.h"
#include "bagside/optimizer.h"
#include "oracles/ranking_oracle.h"
#include "test_util.h"

namespace bagside {
namespace {

using testing::LoadFixtureBags;
using testing::OracleOrder;
using testing::OraclePrecisionAtN;
using testing::OraclePrefixCounts;
using testing::OracleTrapezoid;
using testing::RandomTriples;

ErrorCode CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

std::vector<ScoredTriple> InOrder(std::initializer_list<bool> correct) {
  std::vector<ScoredTriple> out;
  double score = 0.9;
  uint32_t bag = 0;
  for (bool c : correct) {
    out.push_back({bag++, 1, score, c});
    score -= 0.1;
  }
  return out;
}

TEST_CASE("score all") {
  const BagDataset data = LoadFixtureBags("ranking", "bags.jsonl");
  BagDataset three = data;
  three.bags.resize(3);
  ModelConfig cfg = testing::OracleRankingModel().config.model;
  const ModelParams params = InitParams(cfg, *data.vocab, 1);
  const auto triples = ScoreAll(params, cfg, three);
  CHECK(triples.size() == 9);
  for (const auto &t : triples) {
    CHECK(t.rel != 0);
    CHECK(t.score > 0.0);
    CHECK(t.score < 1.0);
    CHECK(t.correct == (t.rel == three.bags[t.bag_id].rel));
  }
  CHECK(ScoreAll(params, cfg, three, 1) == ScoreAll(params, cfg, three, 3));

  cfg.n_rel = 5;
  const ModelParams wide = InitParams(cfg, *data.vocab, 1);
  CHECK(ScoreAll(wide, cfg, three).size() == 12);
}

TEST_CASE("precision at n") {
  CHECK(PrecisionAtN(InOrder({true, false, true, false}), 3) == doctest::Approx(2.0 / 3));
  CHECK(PrecisionAtN(InOrder({true, true, false}), 2) == 1.0);
  CHECK(CodeOf([] { PrecisionAtN(InOrder({true}), 2); }) == ErrorCode::kNotEnoughTriples);
  CHECK(CodeOf([] { PrecisionAtN(InOrder({true}), 0); }) == ErrorCode::kInvalidArgument);

  // Equal scores fall back to bag id, then relation id.
  std::vector<ScoredTriple> tied = {{5, 2, 0.5, false}, {5, 1, 0.5, true}, {2, 3, 0.5, false}};
  const auto ranked = Ranked(tied);
  CHECK(ranked[0].bag_id == 2);
  CHECK(ranked[1].rel == 1);
  CHECK(PrecisionAtN(tied, 2) == 0.5);
}

TEST_CASE("precision at n matches the brute-force oracle") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const auto triples = RandomTriples(500, seed);
    for (size_t n : {1, 100, 200, 300, 500}) {
      CHECK(PrecisionAtN(triples, n) == OraclePrecisionAtN(triples, n));
    }
    // Top-100 is contained in top-300.
    const auto ranked = Ranked(triples);
    CHECK(ranked == OracleOrder(triples));
  }
}

TEST_CASE("pr curve") {
  const auto pts = PrCurve(InOrder({true, false, true}), 2);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0] == PRPoint{0.5, 1.0});
  CHECK(pts[1] == PRPoint{0.5, 0.5});
  CHECK(pts[2].recall == 1.0);
  CHECK(pts[2].precision == doctest::Approx(2.0 / 3).epsilon(1e-15));

  const auto perfect = PrCurve(InOrder({true, true, true, true}), 4);
  for (const auto &p : perfect) CHECK(p.precision == 1.0);
  CHECK(perfect.back().recall == 1.0);
  CHECK(Auc(perfect) == 1.0);

  CHECK(CodeOf([] { PrCurve(InOrder({true}), 0); }) == ErrorCode::kNoPositives);
}

TEST_CASE("pr curve and auc match the oracles") {
  for (uint64_t seed = 10; seed < 15; ++seed) {
    const auto triples = RandomTriples(200, seed);
    size_t correct = 0;
    for (const auto &t : triples) correct += t.correct;
    const size_t positives = correct + seed % 7;  // some facts never retrieved
    const auto pts = PrCurve(triples, positives);
    const auto counts = OraclePrefixCounts(triples);
    REQUIRE(pts.size() == counts.size());
    for (size_t k = 0; k < pts.size(); ++k) {
      CHECK(pts[k].recall == static_cast<double>(counts[k].correct) / positives);
      CHECK(pts[k].precision == static_cast<double>(counts[k].correct) / counts[k].k);
      if (k) CHECK(pts[k].recall >= pts[k - 1].recall);
    }
    CHECK(pts.back().recall == static_cast<double>(correct) / positives);
    const double auc = Auc(pts);
    CHECK(std::abs(auc - OracleTrapezoid(pts)) < 1e-12);
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
  }
}

TEST_CASE("auc") {
  const std::vector<PRPoint> single = {{1.0, 0.5}};
  CHECK(Auc(single) == 0.5);
  const std::vector<PRPoint> two = {{0.5, 1.0}, {1.0, 0.5}};
  CHECK(Auc(two) == doctest::Approx(0.875));
  CHECK(CodeOf([] { Auc({}); }) == ErrorCode::kEmptyCurve);
}

TEST_CASE("imbalanced rankings have high P@100 and low AUC") {
  // 90% NA bags; a third of the positives are ranked on top, the rest sit
  // among NA scores.
  std::vector<ScoredTriple> triples;
  Rng rng(8);
  size_t positives = 0;
  for (uint32_t b = 0; b < 3000; ++b) {
    const bool positive = b % 10 == 0;
    positives += positive;
    const bool easy = positive && rng.Uniform() < 0.4;
    const double score = easy ? 0.9 + 0.1 * rng.Uniform() : 0.5 * rng.Uniform();
    triples.push_back({b, 1, score, positive});
  }
  const double p100 = PrecisionAtN(triples, 100);
  const double auc = Auc(PrCurve(triples, positives));
  CHECK(p100 == 1.0);
  CHECK(auc < 0.6);
  CHECK(p100 - auc >= 0.2);
}

TEST_CASE("subsampling protocol") {
  const BagDataset data = LoadFixtureBags("ranking", "bags.jsonl");
  const BagDataset all = SubsampleProtocol(data, SampleMode::kAll, 3);
  REQUIRE(all.bags.size() == data.bags.size());
  for (size_t i = 0; i < data.bags.size(); ++i) {
    CHECK(all.bags[i].sentences.size() == data.bags[i].sentences.size());
  }

  size_t long_bags = 0;
  for (const Bag &b : data.bags) long_bags += b.sentences.size() > 2;

  for (SampleMode mode : {SampleMode::kOne, SampleMode::kTwo}) {
    const size_t keep = mode == SampleMode::kOne ? 1 : 2;
    const BagDataset reduced = SubsampleProtocol(data, mode, 3);
    CHECK(reduced.bags.size() == long_bags);
    size_t j = 0;
    for (const Bag &orig : data.bags) {
      if (orig.sentences.size() <= 2) continue;
      const Bag &r = reduced.bags[j++];
      CHECK(r.sub == orig.sub);
      REQUIRE(r.sentences.size() == keep);
      std::set<uint32_t> rows;
      for (const auto &s : orig.sentences) rows.insert(s.emb_row);
      for (const auto &s : r.sentences) CHECK(rows.count(s.emb_row) == 1);
      if (keep == 2) CHECK(r.sentences[0].emb_row != r.sentences[1].emb_row);
    }
    const BagDataset again = SubsampleProtocol(data, mode, 3);
    const BagDataset other = SubsampleProtocol(data, mode, 4);
    bool same = true, differs = false;
    for (size_t i = 0; i < reduced.bags.size(); ++i) {
      for (size_t k = 0; k < keep; ++k) {
        same &= again.bags[i].sentences[k].emb_row == reduced.bags[i].sentences[k].emb_row;
        differs |= other.bags[i].sentences[k].emb_row != reduced.bags[i].sentences[k].emb_row;
      }
    }
    CHECK(same);
    CHECK(differs);
  }

  const BagDataset shorts = LoadFixtureBags("ranking", "short.jsonl");
  CHECK(CodeOf([&] { SubsampleProtocol(shorts, SampleMode::kOne, 1); }) ==
        ErrorCode::kEmptyAfterFilter);
  CHECK(SubsampleProtocol(shorts, SampleMode::kAll, 1).bags.size() == shorts.bags.size());
}

TEST_CASE("subsampled sentences are uniform") {
  BagDataset data = LoadFixtureBags("ranking", "bags.jsonl");
  data.bags.resize(1);
  Bag &b = data.bags[0];
  b.sentences.resize(3);
  while (b.sentences.size() < 5) b.sentences.push_back(b.sentences[0]);
  for (size_t i = 0; i < 5; ++i) b.sentences[i].text = std::to_string(i);
  std::vector<int> hits(5, 0);
  for (uint64_t seed = 0; seed < 5000; ++seed) {
    ++hits[std::stoi(SubsampleProtocol(data, SampleMode::kOne, seed).bags[0].sentences[0].text)];
  }
  for (int h : hits) CHECK(std::abs(h - 1000) < 150);
}

TEST_CASE("pn report with a perfect model") {
  const BagDataset data = LoadFixtureBags("ranking", "bags.jsonl");
  const auto m = testing::OracleRankingModel();
  const SampleMode modes[] = {SampleMode::kOne, SampleMode::kTwo, SampleMode::kAll};
  const size_t ns[] = {100, 200, 300};
  const auto cells = PnReport(m.params, m.config.model, data, 9, modes, ns);
  REQUIRE(cells.size() == 9);
  for (const auto &c : cells) CHECK(c.precision == 1.0);
  CHECK(cells[4].mode == SampleMode::kTwo);
  CHECK(cells[4].n == 200);
  const std::string csv = PnReportCsv(cells);
  CHECK(csv.substr(0, 17) == "mode,n,precision\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

TEST_CASE("pn report with a uniform model matches a replication") {
  const BagDataset data = LoadFixtureBags("ranking", "bags.jsonl");
  auto m = testing::OracleRankingModel();
  m.params.w3.setZero();
  const SampleMode modes[] = {SampleMode::kOne, SampleMode::kTwo, SampleMode::kAll};
  const size_t ns[] = {100, 200, 300};
  const auto cells = PnReport(m.params, m.config.model, data, 21, modes, ns);
  CHECK(cells.size() == 9);
  for (const auto &c : cells) {
    // All scores tie, so the ranking walks surviving bags in order.
    std::vector<ScoredTriple> triples;
    uint32_t id = 0;
    for (const Bag &b : data.bags) {
      if (c.mode != SampleMode::kAll && b.sentences.size() <= 2) continue;
      for (uint32_t r = 1; r < 4; ++r) triples.push_back({id, r, 0.25, r == b.rel});
      ++id;
    }
    CHECK(c.precision == OraclePrecisionAtN(triples, c.n));
    CHECK(c.precision < 0.4);
  }
  CHECK(PnReport(m.params, m.config.model, data, 21, modes, ns).size() == 9);
}

TEST_CASE("pn report needs enough triples") {
  const BagDataset shorts = LoadFixtureBags("ranking", "short.jsonl");
  const auto m = testing::OracleRankingModel();
  const SampleMode all[] = {SampleMode::kAll};
  const size_t big[] = {100};
  CHECK(CodeOf([&] { PnReport(m.params, m.config.model, shorts, 1, all, big); }) ==
        ErrorCode::kNotEnoughTriples);
}

TEST_CASE("bag accuracy") {
  BagDataset data = LoadFixtureBags("ranking", "bags.jsonl");
  const auto m = testing::OracleRankingModel();
  CHECK(BagAccuracy(m.params, m.config.model, data) == 1.0);
  BagDataset wrong = data;
  for (Bag &b : wrong.bags) b.rel = (b.rel + 1) % 4;
  CHECK(BagAccuracy(m.params, m.config.model, wrong) == 0.0);

  Rng rng(6);
  data.bags.resize(50);
  const ModelParams random = InitParams(m.config.model, *data.vocab, 33);
  for (Bag &b : data.bags) b.rel = static_cast<uint32_t>(rng.Below(4));
  size_t hits = 0;
  for (const Bag &b : data.bags) {
    hits += Predict(b, *data.embeddings, random, m.config.model).relation == b.rel;
  }
  CHECK(BagAccuracy(random, m.config.model, data) == static_cast<double>(hits) / 50.0);
}

TEST_CASE("csv export") {
  const std::vector<PRPoint> pts = {{0.1, 1.0}, {1.0 / 3.0, 0.5}};
  const std::string csv = PrCurveCsv(pts);
  CHECK(csv.rfind("recall,precision\n", 0) == 0);
  CHECK(csv.find("0.33333333333333331,0.5\n") != std::string::npos);
  CHECK(ParseSampleMode("two") == SampleMode::kTwo);
  CHECK(SampleModeName(SampleMode::kAll) == "all");
  CHECK(CodeOf([] { ParseSampleMode("three"); }) == ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace bagside
