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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"

#include "bagside/bagside.h"

namespace {

namespace fs = std::filesystem;

std::string Fixture(const std::string &rel) { return std::string(BAGSIDE_FIXTURE_DIR) + "/" + rel; }

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path TempDir() {
  const fs::path dir = fs::temp_directory_path() / ("bagside_capi_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

struct Corpus {
  bs_embeddings *emb = nullptr;
  bs_vocab *vocab = nullptr;
  bs_dataset *bags = nullptr;

  Corpus(const std::string &dir, const std::string &file) {
    REQUIRE(bs_embeddings_read(Fixture(dir + "/emb.bin").c_str(), &emb) == BS_OK);
    REQUIRE(bs_vocab_read_dir(Fixture(dir).c_str(), &vocab) == BS_OK);
    REQUIRE(bs_dataset_read(Fixture(dir + "/" + file).c_str(), vocab, emb, nullptr, 0.8, &bags) ==
            BS_OK);
  }
  ~Corpus() {
    bs_dataset_free(bags);
    bs_vocab_free(vocab);
    bs_embeddings_free(emb);
  }
};

bs_train_config SmallConfig() {
  bs_train_config cfg;
  bs_train_config_default(&cfg);
  cfg.model.d_a = 4;
  cfg.model.d_t = 4;
  cfg.model.u1 = 16;
  cfg.model.a1 = BS_TANH;
  cfg.model.u2 = 8;
  cfg.model.a2 = BS_TANH;
  cfg.lr = 0.1;
  cfg.batch_size = 8;
  cfg.max_epochs = 30;
  cfg.patience = 30;
  cfg.seed = 3;
  return cfg;
}

TEST_CASE("status reporting") {
  CHECK(std::strlen(bs_version()) > 0);
  CHECK(std::string(bs_status_name(BS_OK)) == "Ok");
  CHECK(std::string(bs_status_name(BS_ERR_MANIFEST_MISMATCH)) == "ManifestMismatch");
  bs_embeddings *m = nullptr;
  CHECK(bs_embeddings_parse("EMB2", 4, &m) == BS_ERR_BAD_MAGIC);
  CHECK(m == nullptr);
  CHECK(std::string(bs_last_error()).find("EMB1") != std::string::npos);
  CHECK(bs_embeddings_parse(nullptr, 12, &m) == BS_ERR_INVALID_ARGUMENT);
  CHECK(bs_embeddings_parse(nullptr, 0, &m) == BS_ERR_BAD_MAGIC);
  CHECK(bs_embeddings_read("/nonexistent/emb.bin", &m) == BS_ERR_IO);
}

TEST_CASE("embeddings through the C API") {
  const float data[6] = {1.5f, -2.f, 0.f, 3.25f, 1e-30f, -0.f};
  bs_embeddings *m = nullptr;
  REQUIRE(bs_embeddings_create(2, 3, data, &m) == BS_OK);
  CHECK(bs_embeddings_rows(m) == 2);
  CHECK(bs_embeddings_dim(m) == 3);
  const fs::path path = TempDir() / "e.bin";
  REQUIRE(bs_embeddings_write(m, path.c_str()) == BS_OK);
  const std::string bytes = Slurp(path);
  CHECK(bytes.size() == 12 + 24);
  bs_embeddings *back = nullptr;
  REQUIRE(bs_embeddings_parse(bytes.data(), bytes.size(), &back) == BS_OK);
  CHECK(std::memcmp(bs_embeddings_data(back), data, sizeof(data)) == 0);
  CHECK(bs_embeddings_parse(bytes.data(), bytes.size() - 3, &back) == BS_ERR_TRUNCATED);
  const std::string extra = bytes + "!";
  bs_embeddings *bad = nullptr;
  CHECK(bs_embeddings_parse(extra.data(), extra.size(), &bad) == BS_ERR_TRAILING_BYTES);
  const float nan[1] = {NAN};
  CHECK(bs_embeddings_create(1, 1, nan, &bad) == BS_ERR_NON_FINITE);
  CHECK(bs_embeddings_create(0, 1, data, &bad) == BS_ERR_BAD_SHAPE);
  bs_embeddings_free(back);
  bs_embeddings_free(m);
  bs_embeddings_free(nullptr);
}

TEST_CASE("vocab and dataset parsing") {
  bs_vocab *v = nullptr;
  REQUIRE(bs_vocab_parse("NA\nborn_in\n", "NO_TYPE\nperson\n", "NO_ALIAS\n", &v) == BS_OK);
  CHECK(bs_vocab_size(v, BS_RELATIONS) == 2);
  CHECK(std::string(bs_vocab_name(v, BS_TYPES, 1)) == "person");
  CHECK(bs_vocab_name(v, BS_TYPES, 7) == nullptr);
  bs_vocab *bad = nullptr;
  CHECK(bs_vocab_parse("born_in\n", "NO_TYPE", "NO_ALIAS", &bad) == BS_ERR_MISSING_NULL);

  const float rows[4] = {1, 0, 0, 1};
  bs_embeddings *emb = nullptr;
  REQUIRE(bs_embeddings_create(2, 2, rows, &emb) == BS_OK);
  const std::string jsonl =
      R"({"sub":"a","obj":"b","rel":"born_in","sub_types":["person"],"sentences":[{"emb":0},{"emb":1}]})"
      "\n"
      R"({"sub":"c","obj":"d","rel":"NA","sentences":[{"emb":1}]})";
  bs_dataset *d = nullptr;
  REQUIRE(bs_dataset_parse(jsonl.data(), jsonl.size(), v, emb, nullptr, 0.8, &d) == BS_OK);
  CHECK(bs_dataset_bag_count(d) == 2);
  CHECK(bs_dataset_sentence_count(d) == 3);
  CHECK(bs_dataset_positive_count(d) == 1);
  CHECK(bs_dataset_relation_count(d, 0) == 1);
  CHECK(std::string(bs_dataset_bag_obj(d, 1)) == "d");
  CHECK(bs_dataset_bag_relation(d, 0) == 1);
  CHECK(bs_dataset_bag_sentence_count(d, 0) == 2);
  CHECK(bs_vocab_size(bs_dataset_vocab(d), BS_TYPES) == 2);

  const std::string broken = jsonl + "\n" + R"({"sub":"e","obj":"f","rel":0,"sentences":[{"emb":2}]})";
  bs_dataset *e = nullptr;
  CHECK(bs_dataset_parse(broken.data(), broken.size(), v, emb, nullptr, 0.8, &e) ==
        BS_ERR_BAD_EMB_ROW);
  CHECK(std::string(bs_last_error()).find("line 3") != std::string::npos);

  // The alias phrase table must align with the alias vocabulary.
  bs_embeddings *phrases = nullptr;
  REQUIRE(bs_embeddings_create(2, 2, rows, &phrases) == BS_OK);
  CHECK(bs_dataset_parse(jsonl.data(), jsonl.size(), v, emb, phrases, 0.8, &e) ==
        BS_ERR_SHAPE_MISMATCH);

  bs_embeddings_free(phrases);
  bs_dataset_free(d);
  bs_embeddings_free(emb);
  bs_vocab_free(v);
}

TEST_CASE("train config json") {
  bs_train_config cfg = SmallConfig();
  cfg.optimizer = BS_NADAM;
  cfg.model.p2 = 0.37;
  size_t needed = 0;
  REQUIRE(bs_train_config_to_json(&cfg, nullptr, 0, &needed) == BS_OK);
  std::vector<char> buf(needed);
  REQUIRE(bs_train_config_to_json(&cfg, buf.data(), buf.size(), &needed) == BS_OK);
  bs_train_config back;
  bs_train_config_default(&back);
  REQUIRE(bs_train_config_from_json(buf.data(), &back) == BS_OK);
  CHECK(back.optimizer == BS_NADAM);
  CHECK(back.model.p2 == 0.37);
  CHECK(back.model.u1 == 16);
  CHECK(back.seed == 3);
  CHECK(bs_train_config_from_json("{\"lr\":\"fast\"}", &back) != BS_OK);
  CHECK(bs_train_config_from_json("not json", &back) != BS_OK);
}

TEST_CASE("train, save, reload, predict") {
  Corpus c("separable", "bags.jsonl");
  const bs_train_config cfg = SmallConfig();
  bs_model *model = nullptr;
  bs_history *history = nullptr;
  REQUIRE(bs_train(c.bags, c.bags, &cfg, &model, &history) == BS_OK);
  REQUIRE(bs_history_epochs(history) >= 1);
  uint32_t epoch = 0;
  double loss = 0, acc = 0;
  REQUIRE(bs_history_get(history, 0, &epoch, &loss, &acc) == BS_OK);
  CHECK(epoch == 1);
  CHECK(std::isfinite(loss));
  CHECK(bs_history_get(history, 10000, &epoch, &loss, &acc) == BS_ERR_INVALID_ARGUMENT);

  bs_train_config got;
  bs_model_get_config(model, &got);
  CHECK(got.model.d_s == 8);
  CHECK(got.model.n_rel == 2);
  CHECK(bs_model_check(model, c.bags) == BS_OK);

  double accuracy = 0;
  REQUIRE(bs_bag_accuracy(model, c.bags, &accuracy) == BS_OK);
  CHECK(accuracy == bs_model_valid_accuracy(model));

  const fs::path dir = TempDir();
  REQUIRE(bs_model_save(model, (dir / "a.bsd").c_str()) == BS_OK);
  bs_model *loaded = nullptr;
  REQUIRE(bs_model_read((dir / "a.bsd").c_str(), &loaded) == BS_OK);
  REQUIRE(bs_model_save(loaded, (dir / "b.bsd").c_str()) == BS_OK);
  CHECK(Slurp(dir / "a.bsd") == Slurp(dir / "b.bsd"));

  uint32_t rel_a = 9, rel_b = 9;
  double pa[2], pb[2];
  REQUIRE(bs_predict(model, c.bags, 3, &rel_a, pa, 2) == BS_OK);
  REQUIRE(bs_predict(loaded, c.bags, 3, &rel_b, pb, 2) == BS_OK);
  CHECK(rel_a == rel_b);
  CHECK(pa[0] == pb[0]);
  CHECK(pa[0] + pa[1] == doctest::Approx(1.0));
  CHECK(bs_predict(model, c.bags, 1000, &rel_a, pa, 2) == BS_ERR_INVALID_ARGUMENT);

  // Determinism across handles and thread counts.
  bs_train_config threaded = cfg;
  threaded.threads = 3;
  bs_model *again = nullptr;
  REQUIRE(bs_train(c.bags, c.bags, &threaded, &again, nullptr) == BS_OK);
  REQUIRE(bs_model_save(again, (dir / "c.bsd").c_str()) == BS_OK);
  CHECK(Slurp(dir / "a.bsd") == Slurp(dir / "c.bsd"));

  const std::string bytes = Slurp(dir / "a.bsd");
  bs_model *bad = nullptr;
  CHECK(bs_model_parse(bytes.data(), 3, &bad) == BS_ERR_BAD_MAGIC);
  CHECK(bs_model_parse(bytes.data(), bytes.size() - 4, &bad) == BS_ERR_TRUNCATED);

  Corpus other("ranking", "short.jsonl");
  CHECK(bs_model_check(model, other.bags) == BS_ERR_SHAPE_MISMATCH);
  CHECK(bs_bag_accuracy(model, other.bags, &accuracy) == BS_ERR_SHAPE_MISMATCH);

  bs_model_free(again);
  bs_model_free(loaded);
  bs_model_free(model);
  bs_history_free(history);
}

TEST_CASE("divergence returns the last finite model") {
  Corpus c("separable", "bags.jsonl");
  bs_train_config cfg = SmallConfig();
  cfg.lr = 1e300;
  bs_model *model = nullptr;
  bs_history *history = nullptr;
  CHECK(bs_train(c.bags, c.bags, &cfg, &model, &history) == BS_ERR_DIVERGED);
  REQUIRE(model != nullptr);
  REQUIRE(history != nullptr);
  const fs::path path = TempDir() / "last.bsd";
  CHECK(bs_model_save(model, path.c_str()) == BS_OK);
  bs_model_free(model);
  bs_history_free(history);
}

TEST_CASE("tuning") {
  Corpus c("separable", "bags.jsonl");
  bs_train_config base = SmallConfig();
  base.max_epochs = 2;
  bs_search *s = nullptr;
  REQUIRE(bs_tune(c.bags, c.bags, &base, 2, 11, &s) == BS_OK);
  CHECK(bs_search_trial_count(s) == 2);
  CHECK(bs_search_best_index(s) < 2);
  bs_train_config trial;
  double acc = -1;
  int diverged = -1;
  REQUIRE(bs_search_trial(s, 1, &trial, &acc, &diverged) == BS_OK);
  CHECK(trial.seed == 12);
  CHECK(trial.max_epochs == 2);
  CHECK(acc >= 0.0);
  CHECK((diverged == 0 || diverged == 1));
  CHECK(bs_tune(c.bags, c.bags, &base, 0, 11, &s) == BS_ERR_INVALID_ARGUMENT);
  bs_search_free(s);
}

TEST_CASE("ranking metrics through the C API") {
  const uint32_t bags[] = {0, 1, 2};
  const uint32_t rels[] = {1, 1, 1};
  const double scores[] = {0.9, 0.8, 0.7};
  const int correct[] = {1, 0, 1};
  bs_triples *t = nullptr;
  REQUIRE(bs_triples_create(bags, rels, scores, correct, 3, &t) == BS_OK);
  double p = 0;
  REQUIRE(bs_precision_at_n(t, 3, &p) == BS_OK);
  CHECK(p == doctest::Approx(2.0 / 3));
  CHECK(bs_precision_at_n(t, 4, &p) == BS_ERR_NOT_ENOUGH_TRIPLES);

  bs_curve *curve = nullptr;
  REQUIRE(bs_pr_curve(t, 2, &curve) == BS_OK);
  CHECK(bs_curve_size(curve) == 3);
  double r = 0, pr = 0;
  REQUIRE(bs_curve_get(curve, 1, &r, &pr) == BS_OK);
  CHECK(r == 0.5);
  CHECK(pr == 0.5);
  double auc = 0;
  REQUIRE(bs_curve_auc(curve, &auc) == BS_OK);
  CHECK(auc == doctest::Approx(0.5 * 1.0 + 0.5 * (0.5 + 2.0 / 3) / 2));
  const fs::path csv = TempDir() / "pr.csv";
  REQUIRE(bs_curve_write_csv(curve, csv.c_str()) == BS_OK);
  CHECK(Slurp(csv).rfind("recall,precision\n0.5,1\n", 0) == 0);
  CHECK(bs_pr_curve(t, 0, &curve) == BS_ERR_NO_POSITIVES);

  const uint32_t na[] = {0};
  bs_triples *bad = nullptr;
  CHECK(bs_triples_create(bags, na, scores, correct, 1, &bad) == BS_ERR_INVALID_ARGUMENT);

  bs_curve_free(curve);
  bs_triples_free(t);
}

TEST_CASE("score all and P@N report") {
  Corpus c("ranking", "bags.jsonl");
  bs_train_config cfg = SmallConfig();
  cfg.max_epochs = 3;
  cfg.model.u1 = 8;
  cfg.model.u2 = 6;
  bs_model *model = nullptr;
  REQUIRE(bs_train(c.bags, c.bags, &cfg, &model, nullptr) == BS_OK);

  bs_triples *t = nullptr;
  REQUIRE(bs_score_all(model, c.bags, &t) == BS_OK);
  CHECK(bs_triples_count(t) == 3 * bs_dataset_bag_count(c.bags));
  uint32_t bag = 0, rel = 0;
  double score = 0;
  int ok = 0;
  REQUIRE(bs_triples_get(t, 0, &bag, &rel, &score, &ok) == BS_OK);
  CHECK(rel >= 1);

  const bs_sample_mode modes[] = {BS_MODE_ONE, BS_MODE_TWO, BS_MODE_ALL};
  const size_t ns[] = {100, 200, 300};
  double cells[9], again[9];
  const fs::path csv = TempDir() / "pn.csv";
  REQUIRE(bs_pn_report(model, c.bags, 5, modes, 3, ns, 3, cells, csv.c_str()) == BS_OK);
  REQUIRE(bs_pn_report(model, c.bags, 5, modes, 3, ns, 3, again, nullptr) == BS_OK);
  CHECK(std::memcmp(cells, again, sizeof(cells)) == 0);
  for (double v : cells) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  const std::string text = Slurp(csv);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);

  bs_dataset *one = nullptr;
  REQUIRE(bs_dataset_subsample(c.bags, BS_MODE_ONE, 5, &one) == BS_OK);
  CHECK(bs_dataset_sentence_count(one) == bs_dataset_bag_count(one));
  bs_dataset_free(one);

  Corpus shorts("ranking", "short.jsonl");
  CHECK(bs_pn_report(model, shorts.bags, 5, modes, 1, ns, 1, cells, nullptr) ==
        BS_ERR_EMPTY_AFTER_FILTER);
  CHECK(bs_pn_report(model, shorts.bags, 5, modes + 2, 1, ns, 1, cells, nullptr) ==
        BS_ERR_NOT_ENOUGH_TRIPLES);

  bs_triples_free(t);
  bs_model_free(model);
}

}  // namespace
