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
#include <set>

#include "doctest.h"

#include "bagside/error.h"
#include "bagside/search.h"
#include "test_util.h"

namespace bagside {
namespace {

template <typename T>
bool Contains(const std::vector<T> &v, const T &x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

TEST_CASE("sampled configs stay inside the space") {
  const SearchSpace space;
  TrainConfig base;
  base.batch_size = 7;
  base.model.d_a = 9;
  for (uint64_t seed = 0; seed < 500; ++seed) {
    const TrainConfig c = SampleConfig(space, base, seed);
    CHECK(Contains(space.u1_choices, c.model.u1));
    CHECK(Contains(space.u2_choices, c.model.u2));
    CHECK(Contains(space.activation_choices, c.model.a1));
    CHECK(Contains(space.activation_choices, c.model.a2));
    CHECK(Contains(space.optimizer_choices, c.optimizer));
    CHECK(c.model.p1 >= 0.0);
    CHECK(c.model.p1 < 1.0);
    CHECK(c.model.p2 >= 0.0);
    CHECK(c.model.p2 < 1.0);
    CHECK(c.lr > 0.0);
    CHECK(c.lr < 1.0);
    CHECK(c.batch_size == 7);
    CHECK(c.model.d_a == 9);
    CHECK_NOTHROW(c.Validate());
  }
}

TEST_CASE("every choice is reachable") {
  const SearchSpace space;
  std::set<uint32_t> u1, u2;
  std::set<int> acts, opts;
  for (uint64_t seed = 0; seed < 300; ++seed) {
    const TrainConfig c = SampleConfig(space, {}, seed);
    u1.insert(c.model.u1);
    u2.insert(c.model.u2);
    acts.insert(static_cast<int>(c.model.a1));
    opts.insert(static_cast<int>(c.optimizer));
  }
  CHECK(u1.size() == 5);
  CHECK(u2.size() == 4);
  CHECK(acts.size() == 3);
  CHECK(opts.size() == 2);
}

TEST_CASE("stub evaluator scoring lr picks the largest lr") {
  const TrialEvaluator by_lr = [](const TrainConfig &c) { return c.lr; };
  for (uint64_t seed : {0ull, 17ull, 999ull}) {
    const SearchResult r = RandomSearch(SearchSpace{}, 10, {}, seed, by_lr);
    REQUIRE(r.trials.size() == 10);
    size_t best = 0;
    for (size_t i = 1; i < r.trials.size(); ++i) {
      if (r.trials[i].config.lr > r.trials[best].config.lr) best = i;
    }
    CHECK(r.best_index == best);
    CHECK(r.best == r.trials[best].config);
    for (size_t i = 0; i < r.trials.size(); ++i) {
      CHECK(r.trials[i].index == i);
      CHECK(r.trials[i].config == SampleConfig(SearchSpace{}, {}, seed + i));
    }
  }
}

TEST_CASE("search is reproducible and ties go to the earlier trial") {
  const TrialEvaluator constant = [](const TrainConfig &) { return 0.5; };
  const SearchResult a = RandomSearch(SearchSpace{}, 6, {}, 42, constant);
  const SearchResult b = RandomSearch(SearchSpace{}, 6, {}, 42, constant);
  CHECK(a.trials == b.trials);
  CHECK(a.best_index == 0);
  CHECK_THROWS_AS(RandomSearch(SearchSpace{}, 0, {}, 42, constant), Error);
}

TEST_CASE("diverged trials score zero and other errors propagate") {
  size_t calls = 0;
  const TrialEvaluator flaky = [&calls](const TrainConfig &) -> double {
    if (calls++ % 2 == 0) throw Error(ErrorCode::kDiverged, "boom");
    return 0.25;
  };
  const SearchResult r = RandomSearch(SearchSpace{}, 4, {}, 1, flaky);
  CHECK(r.trials[0].diverged);
  CHECK(r.trials[0].valid_accuracy == 0.0);
  CHECK(r.trials[0].error.find("boom") != std::string::npos);
  CHECK_FALSE(r.trials[1].diverged);
  CHECK(r.best_index == 1);

  const TrialEvaluator broken = [](const TrainConfig &) -> double {
    throw Error(ErrorCode::kShapeMismatch, "bad");
  };
  CHECK_THROWS_AS(RandomSearch(SearchSpace{}, 2, {}, 1, broken), Error);
}

TEST_CASE("training evaluator runs real trials") {
  const BagDataset data = testing::LoadFixtureBags("separable", "bags.jsonl");
  TrainConfig base;
  base.model.d_a = 2;
  base.model.d_t = 2;
  base.max_epochs = 2;
  SearchSpace space;
  space.u1_choices = {8};
  space.u2_choices = {4};
  const SearchResult r = RandomSearch(space, 3, base, 7, TrainingEvaluator(data, data));
  CHECK(r.trials.size() == 3);
  for (const Trial &t : r.trials) {
    CHECK(t.valid_accuracy >= 0.0);
    CHECK(t.valid_accuracy <= 1.0);
  }
}

}  // namespace
}  // namespace bagside
