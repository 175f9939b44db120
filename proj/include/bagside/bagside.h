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

/*
 * BagSide C API.
 *
 * Distantly supervised relation extraction over bags of precomputed sentence
 * embeddings with alias and entity-type side information. All objects are
 * opaque handles owned by the caller and released with the matching
 * bs_*_free function. Every fallible call returns a bs_status; on failure a
 * human-readable message for the calling thread is available from
 * bs_last_error(). Output handles are left untouched on failure unless noted.
 */
#ifndef BAGSIDE_BAGSIDE_H_
#define BAGSIDE_BAGSIDE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(BAGSIDE_BUILDING_LIBRARY)
#define BS_API __attribute__((visibility("default")))
#else
#define BS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bs_status {
  BS_OK = 0,
  BS_ERR_BAD_MAGIC = 1,
  BS_ERR_TRUNCATED = 2,
  BS_ERR_NON_FINITE = 3,
  BS_ERR_BAD_SHAPE = 4,
  BS_ERR_TRAILING_BYTES = 5,
  BS_ERR_MANIFEST_MISMATCH = 6,
  BS_ERR_MISSING_NULL = 10,
  BS_ERR_DUPLICATE_NAME = 11,
  BS_ERR_UNKNOWN_RELATION = 12,
  BS_ERR_UNKNOWN_TYPE = 13,
  BS_ERR_UNKNOWN_ALIAS = 14,
  BS_ERR_EMPTY_BAG = 15,
  BS_ERR_BAD_EMB_ROW = 16,
  BS_ERR_MALFORMED_RECORD = 17,
  BS_ERR_ZERO_VECTOR = 20,
  BS_ERR_DIM_MISMATCH = 21,
  BS_ERR_BAD_ALIAS_ID = 22,
  BS_ERR_BAD_TYPE_ID = 23,
  BS_ERR_EMPTY_TYPES = 24,
  BS_ERR_SHAPE_MISMATCH = 30,
  BS_ERR_BAD_LABEL = 31,
  BS_ERR_CACHE_MISMATCH = 32,
  BS_ERR_DIVERGED = 33,
  BS_ERR_NOT_ENOUGH_TRIPLES = 40,
  BS_ERR_EMPTY_AFTER_FILTER = 41,
  BS_ERR_NO_POSITIVES = 42,
  BS_ERR_EMPTY_CURVE = 43,
  BS_ERR_INVALID_ARGUMENT = 90,
  BS_ERR_IO = 91,
  BS_ERR_INTERNAL = 99
} bs_status;

typedef enum bs_activation { BS_TANH = 0, BS_RELU = 1, BS_SIGMOID = 2 } bs_activation;
typedef enum bs_optimizer { BS_SGD = 0, BS_NADAM = 1 } bs_optimizer;
typedef enum bs_sample_mode { BS_MODE_ONE = 0, BS_MODE_TWO = 1, BS_MODE_ALL = 2 } bs_sample_mode;
typedef enum bs_vocab_kind { BS_RELATIONS = 0, BS_TYPES = 1, BS_ALIASES = 2 } bs_vocab_kind;

typedef struct bs_embeddings bs_embeddings;
typedef struct bs_vocab bs_vocab;
typedef struct bs_dataset bs_dataset;
typedef struct bs_model bs_model;
typedef struct bs_history bs_history;
typedef struct bs_search bs_search;
typedef struct bs_triples bs_triples;
typedef struct bs_curve bs_curve;

typedef struct bs_model_config {
  uint32_t d_s; /* sentence encoding dim; filled from the data by bs_train */
  uint32_t d_a;
  uint32_t d_t;
  uint32_t u1;
  bs_activation a1;
  double p1;
  uint32_t u2;
  bs_activation a2;
  double p2;
  uint32_t n_rel; /* filled from the relation vocabulary by bs_train */
} bs_model_config;

typedef struct bs_train_config {
  bs_model_config model;
  bs_optimizer optimizer;
  double lr;
  uint32_t batch_size;
  uint32_t max_epochs;
  uint32_t patience;
  uint64_t seed;
  double beta1;
  double beta2;
  double epsilon;
  uint32_t threads; /* 0 = auto; never changes results */
} bs_train_config;

/* ---- Errors and process settings ---------------------------------------- */

BS_API const char *bs_version(void);
BS_API const char *bs_status_name(bs_status status);
/* Message of the last failed call on this thread ("" if none). */
BS_API const char *bs_last_error(void);
/* Worker cap for evaluation calls; 0 = hardware concurrency. */
BS_API void bs_set_threads(uint32_t threads);

/* ---- Embedding matrices (EMB1) ------------------------------------------ */

BS_API bs_status bs_embeddings_read(const char *path, bs_embeddings **out);
BS_API bs_status bs_embeddings_parse(const void *bytes, size_t len, bs_embeddings **out);
BS_API bs_status bs_embeddings_create(uint32_t rows, uint32_t dim, const float *data,
                                      bs_embeddings **out);
BS_API bs_status bs_embeddings_write(const bs_embeddings *m, const char *path);
BS_API uint32_t bs_embeddings_rows(const bs_embeddings *m);
BS_API uint32_t bs_embeddings_dim(const bs_embeddings *m);
/* Row-major rows * dim values, valid while the handle lives. */
BS_API const float *bs_embeddings_data(const bs_embeddings *m);
BS_API void bs_embeddings_free(bs_embeddings *m);

/* ---- Vocabularies -------------------------------------------------------- */

/* Reads relations.txt, types.txt and aliases.txt from `dir`. */
BS_API bs_status bs_vocab_read_dir(const char *dir, bs_vocab **out);
BS_API bs_status bs_vocab_parse(const char *relations, const char *types, const char *aliases,
                                bs_vocab **out);
BS_API size_t bs_vocab_size(const bs_vocab *v, bs_vocab_kind kind);
/* NULL when id is out of range. */
BS_API const char *bs_vocab_name(const bs_vocab *v, bs_vocab_kind kind, uint32_t id);
BS_API void bs_vocab_free(bs_vocab *v);

/* ---- Bag datasets -------------------------------------------------------- */

/* `alias_phrases` (nullable) enables alias matching for sentences that carry
 * a "phrase" row instead of "aliases" ids. The dataset keeps its own
 * references to the vocabulary and embeddings. */
BS_API bs_status bs_dataset_read(const char *path, const bs_vocab *vocab,
                                 const bs_embeddings *embeddings,
                                 const bs_embeddings *alias_phrases, double alias_threshold,
                                 bs_dataset **out);
BS_API bs_status bs_dataset_parse(const char *jsonl, size_t len, const bs_vocab *vocab,
                                  const bs_embeddings *embeddings,
                                  const bs_embeddings *alias_phrases, double alias_threshold,
                                  bs_dataset **out);
BS_API size_t bs_dataset_bag_count(const bs_dataset *d);
BS_API size_t bs_dataset_sentence_count(const bs_dataset *d);
/* Bags whose gold relation is not NA. */
BS_API size_t bs_dataset_positive_count(const bs_dataset *d);
BS_API size_t bs_dataset_relation_count(const bs_dataset *d, uint32_t relation);
BS_API const char *bs_dataset_bag_sub(const bs_dataset *d, size_t bag);
BS_API const char *bs_dataset_bag_obj(const bs_dataset *d, size_t bag);
BS_API uint32_t bs_dataset_bag_relation(const bs_dataset *d, size_t bag);
BS_API size_t bs_dataset_bag_sentence_count(const bs_dataset *d, size_t bag);
BS_API const bs_vocab *bs_dataset_vocab(const bs_dataset *d);
/* One / Two / All sentence-subsampling protocol. */
BS_API bs_status bs_dataset_subsample(const bs_dataset *d, bs_sample_mode mode, uint64_t seed,
                                      bs_dataset **out);
BS_API void bs_dataset_free(bs_dataset *d);

/* ---- Training ------------------------------------------------------------ */

BS_API void bs_train_config_default(bs_train_config *cfg);
/* Overwrites the fields present in the JSON object, keeps the rest. */
BS_API bs_status bs_train_config_from_json(const char *json, bs_train_config *cfg);
/* Writes a NUL-terminated JSON object into buf (if cap is large enough) and
 * stores the required size including the terminator in *needed. */
BS_API bs_status bs_train_config_to_json(const bs_train_config *cfg, char *buf, size_t cap,
                                         size_t *needed);

/* Trains with validation-accuracy model selection. On BS_ERR_DIVERGED,
 * *out_model holds the last finite parameters and *out_history the epochs
 * completed so far (either may be NULL if not requested). */
BS_API bs_status bs_train(const bs_dataset *train, const bs_dataset *valid,
                          const bs_train_config *cfg, bs_model **out_model,
                          bs_history **out_history);
BS_API size_t bs_history_epochs(const bs_history *h);
BS_API bs_status bs_history_get(const bs_history *h, size_t index, uint32_t *epoch,
                                double *train_loss, double *valid_accuracy);
BS_API void bs_history_free(bs_history *h);

/* Random search over the layer sizes, activations, dropout rates, optimizer
 * and learning rate. Trial i uses seed + i. */
BS_API bs_status bs_tune(const bs_dataset *train, const bs_dataset *valid,
                         const bs_train_config *base, size_t trials, uint64_t seed,
                         bs_search **out);
BS_API size_t bs_search_trial_count(const bs_search *s);
BS_API size_t bs_search_best_index(const bs_search *s);
BS_API bs_status bs_search_trial(const bs_search *s, size_t index, bs_train_config *cfg,
                                 double *valid_accuracy, int *diverged);
BS_API void bs_search_free(bs_search *s);

/* ---- Models and checkpoints (BSD1) -------------------------------------- */

BS_API bs_status bs_model_save(const bs_model *m, const char *path);
BS_API bs_status bs_model_read(const char *path, bs_model **out);
BS_API bs_status bs_model_parse(const void *bytes, size_t len, bs_model **out);
BS_API void bs_model_get_config(const bs_model *m, bs_train_config *cfg);
BS_API double bs_model_valid_accuracy(const bs_model *m);
/* BS_ERR_SHAPE_MISMATCH unless the model fits the dataset's vocabulary and
 * embedding dim. */
BS_API bs_status bs_model_check(const bs_model *m, const bs_dataset *d);
/* Eval-mode prediction for one bag; probs (nullable) receives n_rel values. */
BS_API bs_status bs_predict(const bs_model *m, const bs_dataset *d, size_t bag,
                            uint32_t *relation, double *probs, size_t probs_len);
BS_API bs_status bs_bag_accuracy(const bs_model *m, const bs_dataset *d, double *out);
BS_API void bs_model_free(bs_model *m);

/* ---- Ranking evaluation -------------------------------------------------- */

/* One triple per (bag, non-NA relation). */
BS_API bs_status bs_score_all(const bs_model *m, const bs_dataset *d, bs_triples **out);
BS_API bs_status bs_triples_create(const uint32_t *bag_ids, const uint32_t *relations,
                                   const double *scores, const int *correct, size_t count,
                                   bs_triples **out);
BS_API size_t bs_triples_count(const bs_triples *t);
BS_API bs_status bs_triples_get(const bs_triples *t, size_t index, uint32_t *bag_id,
                                uint32_t *relation, double *score, int *correct);
BS_API bs_status bs_precision_at_n(const bs_triples *t, size_t n, double *out);
BS_API void bs_triples_free(bs_triples *t);

BS_API bs_status bs_pr_curve(const bs_triples *t, size_t total_positives, bs_curve **out);
BS_API size_t bs_curve_size(const bs_curve *c);
BS_API bs_status bs_curve_get(const bs_curve *c, size_t index, double *recall,
                              double *precision);
BS_API bs_status bs_curve_auc(const bs_curve *c, double *out);
/* CSV with header "recall,precision", 17 significant digits. */
BS_API bs_status bs_curve_write_csv(const bs_curve *c, const char *path);
BS_API void bs_curve_free(bs_curve *c);

/* P@N for each (mode, n) pair; out receives n_modes * n_ns values, modes
 * outermost. When csv_path is non-NULL the table is also written as CSV with
 * header "mode,n,precision". */
BS_API bs_status bs_pn_report(const bs_model *m, const bs_dataset *d, uint64_t seed,
                              const bs_sample_mode *modes, size_t n_modes, const size_t *ns,
                              size_t n_ns, double *out, const char *csv_path);

#ifdef __cplusplus
}
#endif

#endif /* BAGSIDE_BAGSIDE_H_ */
