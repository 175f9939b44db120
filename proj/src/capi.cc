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

#include "bagside/bagside.h"

#include <atomic>
#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "bagside/checkpoint.h"
#include "bagside/corpus.h"
#include "bagside/error.h"
#include "bagside/eval.h"
#include "bagside/search.h"
#include "bagside/trainer.h"

struct bs_embeddings {
  std::shared_ptr<const bagside::EmbeddingMatrix> matrix;
};

struct bs_vocab {
  std::shared_ptr<const bagside::Vocab> vocab;
};

struct bs_dataset {
  bagside::BagDataset data;
  bs_vocab vocab_handle;
};

struct bs_model {
  bagside::Checkpoint checkpoint;
};

struct bs_history {
  std::vector<bagside::EpochStats> epochs;
};

struct bs_search {
  bagside::SearchResult result;
};

struct bs_triples {
  std::vector<bagside::ScoredTriple> triples;
};

struct bs_curve {
  std::vector<bagside::PRPoint> points;
};

namespace {

using bagside::ErrorCode;
using bagside::Fail;

thread_local std::string last_error;
std::atomic<uint32_t> eval_threads{0};

// Runs `fn`, translating exceptions into status codes.
template <typename Fn>
bs_status Guard(Fn &&fn) {
  try {
    fn();
    last_error.clear();
    return BS_OK;
  } catch (const bagside::Error &e) {
    last_error = e.what();
    return static_cast<bs_status>(e.code());
  } catch (const std::bad_alloc &) {
    last_error = "out of memory";
  } catch (const std::exception &e) {
    last_error = e.what();
  }
  return BS_ERR_INTERNAL;
}

void Require(bool ok, const char *what) {
  if (!ok) Fail(ErrorCode::kInvalidArgument, what);
}

bagside::Activation ActivationFromC(bs_activation a) {
  Require(a == BS_TANH || a == BS_RELU || a == BS_SIGMOID, "unknown activation");
  return static_cast<bagside::Activation>(a);
}

bagside::ModelConfig FromC(const bs_model_config &c) {
  bagside::ModelConfig m;
  m.d_s = c.d_s;
  m.d_a = c.d_a;
  m.d_t = c.d_t;
  m.u1 = c.u1;
  m.a1 = ActivationFromC(c.a1);
  m.p1 = c.p1;
  m.u2 = c.u2;
  m.a2 = ActivationFromC(c.a2);
  m.p2 = c.p2;
  m.n_rel = c.n_rel;
  return m;
}

bs_model_config ToC(const bagside::ModelConfig &m) {
  bs_model_config c;
  c.d_s = m.d_s;
  c.d_a = m.d_a;
  c.d_t = m.d_t;
  c.u1 = m.u1;
  c.a1 = static_cast<bs_activation>(m.a1);
  c.p1 = m.p1;
  c.u2 = m.u2;
  c.a2 = static_cast<bs_activation>(m.a2);
  c.p2 = m.p2;
  c.n_rel = m.n_rel;
  return c;
}

bagside::TrainConfig FromC(const bs_train_config &c) {
  Require(c.optimizer == BS_SGD || c.optimizer == BS_NADAM, "unknown optimizer");
  bagside::TrainConfig t;
  t.model = FromC(c.model);
  t.optimizer = c.optimizer == BS_SGD ? bagside::OptimizerKind::kSgd
                                      : bagside::OptimizerKind::kNadam;
  t.lr = c.lr;
  t.batch_size = c.batch_size;
  t.max_epochs = c.max_epochs;
  t.patience = c.patience;
  t.seed = c.seed;
  t.beta1 = c.beta1;
  t.beta2 = c.beta2;
  t.epsilon = c.epsilon;
  t.threads = c.threads;
  return t;
}

bs_train_config ToC(const bagside::TrainConfig &t) {
  bs_train_config c;
  c.model = ToC(t.model);
  c.optimizer = t.optimizer == bagside::OptimizerKind::kSgd ? BS_SGD : BS_NADAM;
  c.lr = t.lr;
  c.batch_size = t.batch_size;
  c.max_epochs = t.max_epochs;
  c.patience = t.patience;
  c.seed = t.seed;
  c.beta1 = t.beta1;
  c.beta2 = t.beta2;
  c.epsilon = t.epsilon;
  c.threads = t.threads;
  return c;
}

bagside::SampleMode ModeFromC(bs_sample_mode m) {
  Require(m == BS_MODE_ONE || m == BS_MODE_TWO || m == BS_MODE_ALL, "unknown sample mode");
  return static_cast<bagside::SampleMode>(m);
}

const bagside::NameTable &Table(const bagside::Vocab &v, bs_vocab_kind kind) {
  switch (kind) {
    case BS_RELATIONS: return v.relations;
    case BS_TYPES: return v.types;
    case BS_ALIASES: break;
  }
  return v.aliases;
}

bs_dataset *MakeDataset(bagside::BagDataset data, const bs_vocab *vocab) {
  auto *d = new bs_dataset{std::move(data), *vocab};
  return d;
}

bs_status ParseDataset(std::string_view jsonl, const bs_vocab *vocab,
                       const bs_embeddings *embeddings, const bs_embeddings *alias_phrases,
                       double alias_threshold, bs_dataset **out) {
  return Guard([&] {
    Require(vocab && embeddings && out, "vocab, embeddings and out are required");
    bagside::AliasMatching matching;
    const bagside::AliasMatching *match_ptr = nullptr;
    if (alias_phrases != nullptr) {
      if (alias_phrases->matrix->rows() != vocab->vocab->aliases.size()) {
        Fail(ErrorCode::kShapeMismatch, "alias phrase table has " +
                                            std::to_string(alias_phrases->matrix->rows()) +
                                            " rows, aliases.txt has " +
                                            std::to_string(vocab->vocab->aliases.size()));
      }
      matching.phrase_table = alias_phrases->matrix;
      matching.threshold = alias_threshold;
      match_ptr = &matching;
    }
    auto data = bagside::LoadBags(jsonl, vocab->vocab, embeddings->matrix, match_ptr);
    *out = MakeDataset(std::move(data), vocab);
  });
}

void CheckModel(const bagside::Checkpoint &ck, const bagside::BagDataset &d) {
  const auto &m = ck.config.model;
  if (m.d_s != d.embeddings->dim() || m.n_rel != d.vocab->relations.size() ||
      static_cast<size_t>(ck.params.alias_table.rows()) != d.vocab->aliases.size() ||
      static_cast<size_t>(ck.params.type_table.rows()) != d.vocab->types.size()) {
    Fail(ErrorCode::kShapeMismatch,
         "model (d_s=" + std::to_string(m.d_s) + ", relations=" + std::to_string(m.n_rel) +
             ") does not fit the dataset (dim=" + std::to_string(d.embeddings->dim()) +
             ", relations=" + std::to_string(d.vocab->relations.size()) + ")");
  }
}

}  // namespace

extern "C" {

const char *bs_version(void) { return "0.1.0"; }

const char *bs_status_name(bs_status status) {
  return bagside::ErrorCodeName(static_cast<ErrorCode>(status)).data();
}

const char *bs_last_error(void) { return last_error.c_str(); }

void bs_set_threads(uint32_t threads) { eval_threads = threads; }

// Embeddings.

bs_status bs_embeddings_parse(const void *bytes, size_t len, bs_embeddings **out) {
  return Guard([&] {
    Require(out && (bytes || len == 0), "bytes and out are required");
    auto m = bagside::ParseEmbeddingFile({static_cast<const char *>(bytes), len});
    *out = new bs_embeddings{std::make_shared<const bagside::EmbeddingMatrix>(std::move(m))};
  });
}

bs_status bs_embeddings_read(const char *path, bs_embeddings **out) {
  return Guard([&] {
    Require(path && out, "path and out are required");
    const std::string bytes = bagside::ReadFile(path);
    auto m = bagside::ParseEmbeddingFile(bytes);
    *out = new bs_embeddings{std::make_shared<const bagside::EmbeddingMatrix>(std::move(m))};
  });
}

bs_status bs_embeddings_create(uint32_t rows, uint32_t dim, const float *data,
                               bs_embeddings **out) {
  return Guard([&] {
    Require(data && out, "data and out are required");
    std::vector<float> values(data, data + static_cast<size_t>(rows) * dim);
    *out = new bs_embeddings{
        std::make_shared<const bagside::EmbeddingMatrix>(rows, dim, std::move(values))};
  });
}

bs_status bs_embeddings_write(const bs_embeddings *m, const char *path) {
  return Guard([&] {
    Require(m && path, "matrix and path are required");
    bagside::WriteFile(path, bagside::WriteEmbeddingFile(*m->matrix));
  });
}

uint32_t bs_embeddings_rows(const bs_embeddings *m) { return m ? m->matrix->rows() : 0; }
uint32_t bs_embeddings_dim(const bs_embeddings *m) { return m ? m->matrix->dim() : 0; }
const float *bs_embeddings_data(const bs_embeddings *m) {
  return m ? m->matrix->data().data() : nullptr;
}
void bs_embeddings_free(bs_embeddings *m) { delete m; }

// Vocabularies.

bs_status bs_vocab_read_dir(const char *dir, bs_vocab **out) {
  return Guard([&] {
    Require(dir && out, "dir and out are required");
    *out = new bs_vocab{std::make_shared<const bagside::Vocab>(bagside::LoadVocabDir(dir))};
  });
}

bs_status bs_vocab_parse(const char *relations, const char *types, const char *aliases,
                         bs_vocab **out) {
  return Guard([&] {
    Require(relations && types && aliases && out, "all vocab texts are required");
    *out = new bs_vocab{
        std::make_shared<const bagside::Vocab>(bagside::LoadVocab(relations, types, aliases))};
  });
}

size_t bs_vocab_size(const bs_vocab *v, bs_vocab_kind kind) {
  return v ? Table(*v->vocab, kind).size() : 0;
}

const char *bs_vocab_name(const bs_vocab *v, bs_vocab_kind kind, uint32_t id) {
  if (!v) return nullptr;
  const auto &table = Table(*v->vocab, kind);
  return id < table.size() ? table.name(id).c_str() : nullptr;
}

void bs_vocab_free(bs_vocab *v) { delete v; }

// Datasets.

bs_status bs_dataset_read(const char *path, const bs_vocab *vocab,
                          const bs_embeddings *embeddings, const bs_embeddings *alias_phrases,
                          double alias_threshold, bs_dataset **out) {
  std::string text;
  bs_status status = Guard([&] {
    Require(path != nullptr, "path is required");
    text = bagside::ReadFile(path);
  });
  if (status != BS_OK) return status;
  return ParseDataset(text, vocab, embeddings, alias_phrases, alias_threshold, out);
}

bs_status bs_dataset_parse(const char *jsonl, size_t len, const bs_vocab *vocab,
                           const bs_embeddings *embeddings, const bs_embeddings *alias_phrases,
                           double alias_threshold, bs_dataset **out) {
  if (jsonl == nullptr && len > 0) {
    last_error = "jsonl is required";
    return BS_ERR_INVALID_ARGUMENT;
  }
  return ParseDataset({jsonl ? jsonl : "", len}, vocab, embeddings, alias_phrases,
                      alias_threshold, out);
}

size_t bs_dataset_bag_count(const bs_dataset *d) { return d ? d->data.bags.size() : 0; }
size_t bs_dataset_sentence_count(const bs_dataset *d) { return d ? d->data.SentenceCount() : 0; }
size_t bs_dataset_positive_count(const bs_dataset *d) { return d ? d->data.PositiveCount() : 0; }

size_t bs_dataset_relation_count(const bs_dataset *d, uint32_t relation) {
  if (!d) return 0;
  size_t n = 0;
  for (const auto &bag : d->data.bags) n += bag.rel == relation;
  return n;
}

const char *bs_dataset_bag_sub(const bs_dataset *d, size_t bag) {
  return d && bag < d->data.bags.size() ? d->data.bags[bag].sub.c_str() : nullptr;
}

const char *bs_dataset_bag_obj(const bs_dataset *d, size_t bag) {
  return d && bag < d->data.bags.size() ? d->data.bags[bag].obj.c_str() : nullptr;
}

uint32_t bs_dataset_bag_relation(const bs_dataset *d, size_t bag) {
  return d && bag < d->data.bags.size() ? d->data.bags[bag].rel : 0;
}

size_t bs_dataset_bag_sentence_count(const bs_dataset *d, size_t bag) {
  return d && bag < d->data.bags.size() ? d->data.bags[bag].sentences.size() : 0;
}

const bs_vocab *bs_dataset_vocab(const bs_dataset *d) { return d ? &d->vocab_handle : nullptr; }

bs_status bs_dataset_subsample(const bs_dataset *d, bs_sample_mode mode, uint64_t seed,
                               bs_dataset **out) {
  return Guard([&] {
    Require(d && out, "dataset and out are required");
    auto reduced = bagside::SubsampleProtocol(d->data, ModeFromC(mode), seed);
    *out = MakeDataset(std::move(reduced), &d->vocab_handle);
  });
}

void bs_dataset_free(bs_dataset *d) { delete d; }

// Training.

void bs_train_config_default(bs_train_config *cfg) {
  if (cfg) *cfg = ToC(bagside::TrainConfig{});
}

bs_status bs_train_config_from_json(const char *json, bs_train_config *cfg) {
  return Guard([&] {
    Require(json && cfg, "json and cfg are required");
    auto parsed = nlohmann::json::parse(json, nullptr, false);
    if (parsed.is_discarded()) Fail(ErrorCode::kInvalidArgument, "config is not valid JSON");
    const uint32_t threads = cfg->threads;
    *cfg = ToC(bagside::TrainConfigFromJson(parsed, FromC(*cfg)));
    cfg->threads = threads;
  });
}

bs_status bs_train_config_to_json(const bs_train_config *cfg, char *buf, size_t cap,
                                  size_t *needed) {
  return Guard([&] {
    Require(cfg != nullptr, "cfg is required");
    const std::string text = bagside::TrainConfigToJson(FromC(*cfg)).dump(2);
    if (needed) *needed = text.size() + 1;
    if (buf && cap > text.size()) std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

bs_status bs_train(const bs_dataset *train, const bs_dataset *valid, const bs_train_config *cfg,
                   bs_model **out_model, bs_history **out_history) {
  return Guard([&] {
    Require(train && valid && cfg, "train, valid and cfg are required");
    try {
      auto result = bagside::Train(train->data, valid->data, FromC(*cfg));
      if (out_model) {
        *out_model = new bs_model{{result.config, std::move(result.best),
                                   {result.config.seed, result.best_valid_accuracy}}};
      }
      if (out_history) *out_history = new bs_history{std::move(result.history)};
    } catch (const bagside::DivergedError &e) {
      const auto &partial = e.partial();
      if (out_model) {
        bagside::ModelParams params = e.last_finite();
        bagside::RoundToFloat(&params);
        *out_model = new bs_model{{partial.config, std::move(params),
                                   {partial.config.seed, partial.best_valid_accuracy}}};
      }
      if (out_history) *out_history = new bs_history{partial.history};
      throw;
    }
  });
}

size_t bs_history_epochs(const bs_history *h) { return h ? h->epochs.size() : 0; }

bs_status bs_history_get(const bs_history *h, size_t index, uint32_t *epoch,
                         double *train_loss, double *valid_accuracy) {
  return Guard([&] {
    Require(h && index < h->epochs.size(), "history index out of range");
    const auto &e = h->epochs[index];
    if (epoch) *epoch = e.epoch;
    if (train_loss) *train_loss = e.train_loss;
    if (valid_accuracy) *valid_accuracy = e.valid_accuracy;
  });
}

void bs_history_free(bs_history *h) { delete h; }

bs_status bs_tune(const bs_dataset *train, const bs_dataset *valid, const bs_train_config *base,
                  size_t trials, uint64_t seed, bs_search **out) {
  return Guard([&] {
    Require(train && valid && base && out, "train, valid, base and out are required");
    auto result = bagside::RandomSearch(bagside::SearchSpace{}, trials, FromC(*base), seed,
                                        bagside::TrainingEvaluator(train->data, valid->data));
    *out = new bs_search{std::move(result)};
  });
}

size_t bs_search_trial_count(const bs_search *s) { return s ? s->result.trials.size() : 0; }
size_t bs_search_best_index(const bs_search *s) { return s ? s->result.best_index : 0; }

bs_status bs_search_trial(const bs_search *s, size_t index, bs_train_config *cfg,
                          double *valid_accuracy, int *diverged) {
  return Guard([&] {
    Require(s && index < s->result.trials.size(), "trial index out of range");
    const auto &t = s->result.trials[index];
    if (cfg) *cfg = ToC(t.config);
    if (valid_accuracy) *valid_accuracy = t.valid_accuracy;
    if (diverged) *diverged = t.diverged ? 1 : 0;
  });
}

void bs_search_free(bs_search *s) { delete s; }

// Models.

bs_status bs_model_save(const bs_model *m, const char *path) {
  return Guard([&] {
    Require(m && path, "model and path are required");
    const auto &ck = m->checkpoint;
    bagside::WriteFile(path, bagside::SaveCheckpoint(ck.params, ck.config, ck.meta));
  });
}

bs_status bs_model_parse(const void *bytes, size_t len, bs_model **out) {
  return Guard([&] {
    Require(out && (bytes || len == 0), "bytes and out are required");
    *out = new bs_model{bagside::LoadCheckpoint({static_cast<const char *>(bytes), len})};
  });
}

bs_status bs_model_read(const char *path, bs_model **out) {
  return Guard([&] {
    Require(path && out, "path and out are required");
    *out = new bs_model{bagside::LoadCheckpoint(bagside::ReadFile(path))};
  });
}

void bs_model_get_config(const bs_model *m, bs_train_config *cfg) {
  if (m && cfg) *cfg = ToC(m->checkpoint.config);
}

double bs_model_valid_accuracy(const bs_model *m) {
  return m ? m->checkpoint.meta.valid_accuracy : 0.0;
}

bs_status bs_model_check(const bs_model *m, const bs_dataset *d) {
  return Guard([&] {
    Require(m && d, "model and dataset are required");
    CheckModel(m->checkpoint, d->data);
  });
}

bs_status bs_predict(const bs_model *m, const bs_dataset *d, size_t bag, uint32_t *relation,
                     double *probs, size_t probs_len) {
  return Guard([&] {
    Require(m && d && bag < d->data.bags.size(), "bag index out of range");
    CheckModel(m->checkpoint, d->data);
    const auto &ck = m->checkpoint;
    auto pred = bagside::Predict(d->data.bags[bag], *d->data.embeddings, ck.params,
                                 ck.config.model);
    if (relation) *relation = pred.relation;
    if (probs) {
      Require(probs_len >= static_cast<size_t>(pred.probs.size()), "probs buffer too small");
      for (Eigen::Index r = 0; r < pred.probs.size(); ++r) probs[r] = pred.probs[r];
    }
  });
}

bs_status bs_bag_accuracy(const bs_model *m, const bs_dataset *d, double *out) {
  return Guard([&] {
    Require(m && d && out, "model, dataset and out are required");
    CheckModel(m->checkpoint, d->data);
    *out = bagside::BagAccuracy(m->checkpoint.params, m->checkpoint.config.model, d->data,
                                eval_threads);
  });
}

void bs_model_free(bs_model *m) { delete m; }

// Ranking evaluation.

bs_status bs_score_all(const bs_model *m, const bs_dataset *d, bs_triples **out) {
  return Guard([&] {
    Require(m && d && out, "model, dataset and out are required");
    CheckModel(m->checkpoint, d->data);
    *out = new bs_triples{bagside::ScoreAll(m->checkpoint.params, m->checkpoint.config.model,
                                            d->data, eval_threads)};
  });
}

bs_status bs_triples_create(const uint32_t *bag_ids, const uint32_t *relations,
                            const double *scores, const int *correct, size_t count,
                            bs_triples **out) {
  return Guard([&] {
    Require(out && (count == 0 || (bag_ids && relations && scores && correct)),
            "triple arrays are required");
    std::vector<bagside::ScoredTriple> triples(count);
    for (size_t i = 0; i < count; ++i) {
      if (relations[i] == 0) Fail(ErrorCode::kInvalidArgument, "triples never carry NA");
      if (!std::isfinite(scores[i])) Fail(ErrorCode::kNonFinite, "triple score is not finite");
      triples[i] = {bag_ids[i], relations[i], scores[i], correct[i] != 0};
    }
    *out = new bs_triples{std::move(triples)};
  });
}

size_t bs_triples_count(const bs_triples *t) { return t ? t->triples.size() : 0; }

bs_status bs_triples_get(const bs_triples *t, size_t index, uint32_t *bag_id,
                         uint32_t *relation, double *score, int *correct) {
  return Guard([&] {
    Require(t && index < t->triples.size(), "triple index out of range");
    const auto &x = t->triples[index];
    if (bag_id) *bag_id = x.bag_id;
    if (relation) *relation = x.rel;
    if (score) *score = x.score;
    if (correct) *correct = x.correct ? 1 : 0;
  });
}

bs_status bs_precision_at_n(const bs_triples *t, size_t n, double *out) {
  return Guard([&] {
    Require(t && out, "triples and out are required");
    *out = bagside::PrecisionAtN(t->triples, n);
  });
}

void bs_triples_free(bs_triples *t) { delete t; }

bs_status bs_pr_curve(const bs_triples *t, size_t total_positives, bs_curve **out) {
  return Guard([&] {
    Require(t && out, "triples and out are required");
    *out = new bs_curve{bagside::PrCurve(t->triples, total_positives)};
  });
}

size_t bs_curve_size(const bs_curve *c) { return c ? c->points.size() : 0; }

bs_status bs_curve_get(const bs_curve *c, size_t index, double *recall, double *precision) {
  return Guard([&] {
    Require(c && index < c->points.size(), "curve index out of range");
    if (recall) *recall = c->points[index].recall;
    if (precision) *precision = c->points[index].precision;
  });
}

bs_status bs_curve_auc(const bs_curve *c, double *out) {
  return Guard([&] {
    Require(c && out, "curve and out are required");
    *out = bagside::Auc(c->points);
  });
}

bs_status bs_curve_write_csv(const bs_curve *c, const char *path) {
  return Guard([&] {
    Require(c && path, "curve and path are required");
    bagside::WriteFile(path, bagside::PrCurveCsv(c->points));
  });
}

void bs_curve_free(bs_curve *c) { delete c; }

bs_status bs_pn_report(const bs_model *m, const bs_dataset *d, uint64_t seed,
                       const bs_sample_mode *modes, size_t n_modes, const size_t *ns,
                       size_t n_ns, double *out, const char *csv_path) {
  return Guard([&] {
    Require(m && d && modes && ns && n_modes > 0 && n_ns > 0,
            "model, dataset, modes and ns are required");
    CheckModel(m->checkpoint, d->data);
    std::vector<bagside::SampleMode> mode_list;
    for (size_t i = 0; i < n_modes; ++i) mode_list.push_back(ModeFromC(modes[i]));
    const auto cells = bagside::PnReport(m->checkpoint.params, m->checkpoint.config.model,
                                         d->data, seed, mode_list, {ns, n_ns}, eval_threads);
    if (out) {
      for (size_t i = 0; i < cells.size(); ++i) out[i] = cells[i].precision;
    }
    if (csv_path) bagside::WriteFile(csv_path, bagside::PnReportCsv(cells));
  });
}

}  // extern "C"
