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

// Command-line front end. Talks to the library only through the C API.
//
//   bagside validate --bags B --embeddings E --vocab-dir V
//   bagside train    --config C [--seed S] [--out DIR]
//   bagside tune     --config C --trials N [--seed S] [--out DIR]
//   bagside eval     --checkpoint M --bags B [--mode one|two|all] [--n 100,200,300]
//   bagside pr-curve --checkpoint M --bags B
//   bagside predict  --checkpoint M --bags B
//
// Exit codes: 0 success, 2 input/config error, 3 divergence, 4 evaluation
// infeasible, 64 usage.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bagside/bagside.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitUsage = 64;

// Thrown to leave a command with a specific exit code.
struct Exit {
  int code;
  std::string message;
};

int ExitCodeFor(bs_status status) {
  switch (status) {
    case BS_OK: return kExitOk;
    case BS_ERR_DIVERGED: return kExitDiverged;
    case BS_ERR_NOT_ENOUGH_TRIPLES:
    case BS_ERR_EMPTY_AFTER_FILTER:
    case BS_ERR_NO_POSITIVES:
    case BS_ERR_EMPTY_CURVE: return kExitInfeasible;
    case BS_ERR_INTERNAL: return kExitInternal;
    default: return kExitInput;
  }
}

void Check(bs_status status, const std::string &context) {
  if (status == BS_OK) return;
  throw Exit{ExitCodeFor(status), context + ": " + bs_status_name(status) + ": " + bs_last_error()};
}

template <typename T, void (*Free)(T *)>
struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using Embeddings = std::unique_ptr<bs_embeddings, Deleter<bs_embeddings, bs_embeddings_free>>;
using Vocab = std::unique_ptr<bs_vocab, Deleter<bs_vocab, bs_vocab_free>>;
using Dataset = std::unique_ptr<bs_dataset, Deleter<bs_dataset, bs_dataset_free>>;
using Model = std::unique_ptr<bs_model, Deleter<bs_model, bs_model_free>>;
using History = std::unique_ptr<bs_history, Deleter<bs_history, bs_history_free>>;
using Search = std::unique_ptr<bs_search, Deleter<bs_search, bs_search_free>>;
using Triples = std::unique_ptr<bs_triples, Deleter<bs_triples, bs_triples_free>>;
using Curve = std::unique_ptr<bs_curve, Deleter<bs_curve, bs_curve_free>>;

std::string Real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Exit{kExitInput, "cannot write " + path.string()};
  out << text;
}

// Everything a run can be configured with. Flags override config-file values,
// which override defaults.
struct RunConfig {
  std::string train_bags;
  std::string valid_bags;
  std::string test_bags;
  std::string embeddings;
  std::string vocab_dir;
  std::string alias_table;
  double alias_threshold = 0.8;
  std::string out = ".";
  std::optional<uint64_t> eval_seed;
  json train;  // TrainConfig keys, forwarded to bs_train_config_from_json
};

const std::set<std::string> kPathKeys = {"train_bags", "valid_bags", "test_bags",
                                         "embeddings", "vocab_dir",  "alias_table", "out"};
const std::set<std::string> kTrainKeys = {"model",      "optimizer", "lr",    "batch_size",
                                          "max_epochs", "patience",  "seed",  "beta1",
                                          "beta2",      "epsilon"};

RunConfig LoadRunConfig(const std::string &path) {
  RunConfig rc;
  if (path.empty()) return rc;
  std::ifstream in(path);
  if (!in) throw Exit{kExitInput, "cannot open config " + path};
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Exit{kExitInput, path + ": not a JSON object"};

  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string &p) {
    return fs::path(p).is_absolute() || base.empty() ? p : (base / p).string();
  };
  rc.train = json::object();
  for (auto &[key, value] : j.items()) {
    try {
      if (kPathKeys.count(key)) {
        std::string p = resolve(value.get<std::string>());
        if (key == "train_bags") rc.train_bags = p;
        if (key == "valid_bags") rc.valid_bags = p;
        if (key == "test_bags") rc.test_bags = p;
        if (key == "embeddings") rc.embeddings = p;
        if (key == "vocab_dir") rc.vocab_dir = p;
        if (key == "alias_table") rc.alias_table = p;
        if (key == "out") rc.out = p;
      } else if (key == "alias_threshold") {
        rc.alias_threshold = value.get<double>();
      } else if (key == "eval_seed") {
        rc.eval_seed = value.get<uint64_t>();
      } else if (kTrainKeys.count(key)) {
        rc.train[key] = value;
      } else {
        throw Exit{kExitInput, path + ": unknown config key \"" + key + "\""};
      }
    } catch (const json::exception &e) {
      throw Exit{kExitInput, path + ": bad value for \"" + key + "\": " + e.what()};
    }
  }
  return rc;
}

// Flags shared by the commands; unset values fall back to the config file.
struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string bags;
  std::string train_bags;
  std::string valid_bags;
  std::string embeddings;
  std::string vocab_dir;
  std::string alias_table;
  std::optional<double> alias_threshold;
  std::string checkpoint;
  std::optional<double> lr;
  std::optional<uint32_t> max_epochs;
  size_t trials = 0;
  std::string mode;
  std::vector<size_t> ns = {100, 200, 300};
};

RunConfig Resolve(const Flags &f) {
  RunConfig rc = LoadRunConfig(f.config);
  auto take = [](std::string *dst, const std::string &src) {
    if (!src.empty()) *dst = src;
  };
  take(&rc.train_bags, f.train_bags);
  take(&rc.valid_bags, f.valid_bags);
  take(&rc.test_bags, f.bags);
  take(&rc.embeddings, f.embeddings);
  take(&rc.vocab_dir, f.vocab_dir);
  take(&rc.alias_table, f.alias_table);
  take(&rc.out, f.out);
  if (f.alias_threshold) rc.alias_threshold = *f.alias_threshold;
  if (f.seed) rc.train["seed"] = *f.seed;
  if (f.lr) rc.train["lr"] = *f.lr;
  if (f.max_epochs) rc.train["max_epochs"] = *f.max_epochs;
  return rc;
}

void RequirePath(const std::string &value, const char *flag) {
  if (value.empty()) throw Exit{kExitUsage, std::string("missing required input ") + flag};
}

uint32_t ThreadsFromEnv() {
  const char *v = std::getenv("BAGSIDE_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  char *end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0') throw Exit{kExitUsage, "BAGSIDE_THREADS must be a non-negative integer"};
  return static_cast<uint32_t>(n);
}

uint64_t EvalSeed(const RunConfig &rc) {
  if (rc.eval_seed) return *rc.eval_seed;
  return rc.train.contains("seed") ? rc.train["seed"].get<uint64_t>() : 0;
}

// Shared inputs for every command that reads bags.
struct Corpus {
  Vocab vocab;
  Embeddings embeddings;
  Embeddings alias_phrases;
  double alias_threshold = 0.8;

  Dataset Load(const std::string &path) const {
    bs_dataset *d = nullptr;
    Check(bs_dataset_read(path.c_str(), vocab.get(), embeddings.get(), alias_phrases.get(),
                          alias_threshold, &d),
          path);
    return Dataset(d);
  }
};

Corpus OpenCorpus(const RunConfig &rc) {
  RequirePath(rc.embeddings, "--embeddings");
  RequirePath(rc.vocab_dir, "--vocab-dir");
  Corpus c;
  bs_vocab *v = nullptr;
  Check(bs_vocab_read_dir(rc.vocab_dir.c_str(), &v), rc.vocab_dir);
  c.vocab.reset(v);
  bs_embeddings *e = nullptr;
  Check(bs_embeddings_read(rc.embeddings.c_str(), &e), rc.embeddings);
  c.embeddings.reset(e);
  if (!rc.alias_table.empty()) {
    Check(bs_embeddings_read(rc.alias_table.c_str(), &e), rc.alias_table);
    c.alias_phrases.reset(e);
  }
  c.alias_threshold = rc.alias_threshold;
  return c;
}

bs_train_config TrainConfigFor(const RunConfig &rc) {
  bs_train_config cfg;
  bs_train_config_default(&cfg);
  cfg.threads = ThreadsFromEnv();
  Check(bs_train_config_from_json(rc.train.dump().c_str(), &cfg), "config");
  return cfg;
}

fs::path OutDir(const RunConfig &rc) {
  std::error_code ec;
  fs::create_directories(rc.out, ec);
  if (ec) throw Exit{kExitInput, "cannot create output directory " + rc.out};
  return rc.out;
}

std::string ConfigJson(const bs_train_config &cfg) {
  size_t needed = 0;
  Check(bs_train_config_to_json(&cfg, nullptr, 0, &needed), "config");
  std::string buf(needed, '\0');
  Check(bs_train_config_to_json(&cfg, buf.data(), buf.size(), &needed), "config");
  buf.resize(needed - 1);
  return buf;
}

const char *ActivationName(bs_activation a) {
  switch (a) {
    case BS_TANH: return "tanh";
    case BS_RELU: return "relu";
    case BS_SIGMOID: return "sigmoid";
  }
  return "?";
}

// ---- Commands --------------------------------------------------------------

int CmdValidate(const Flags &f) {
  RunConfig rc = Resolve(f);
  RequirePath(rc.test_bags, "--bags");
  Corpus corpus = OpenCorpus(rc);
  Dataset d = corpus.Load(rc.test_bags);

  std::cout << "bags=" << bs_dataset_bag_count(d.get())
            << " sentences=" << bs_dataset_sentence_count(d.get())
            << " positives=" << bs_dataset_positive_count(d.get()) << "\n";
  const size_t relations = bs_vocab_size(corpus.vocab.get(), BS_RELATIONS);
  for (uint32_t r = 0; r < relations; ++r) {
    std::cout << "  " << bs_vocab_name(corpus.vocab.get(), BS_RELATIONS, r) << "="
              << bs_dataset_relation_count(d.get(), r) << "\n";
  }
  return kExitOk;
}

int CmdTrain(const Flags &f) {
  RunConfig rc = Resolve(f);
  RequirePath(rc.train_bags, "--train-bags");
  RequirePath(rc.valid_bags, "--valid-bags");
  const bs_train_config cfg = TrainConfigFor(rc);
  Corpus corpus = OpenCorpus(rc);
  Dataset train = corpus.Load(rc.train_bags);
  Dataset valid = corpus.Load(rc.valid_bags);
  const fs::path out = OutDir(rc);

  bs_model *m = nullptr;
  bs_history *h = nullptr;
  const bs_status status = bs_train(train.get(), valid.get(), &cfg, &m, &h);
  Model model(m);
  History history(h);

  if (history) {
    std::string csv = "epoch,train_loss,valid_acc\n";
    for (size_t i = 0; i < bs_history_epochs(history.get()); ++i) {
      uint32_t epoch = 0;
      double loss = 0.0, acc = 0.0;
      Check(bs_history_get(history.get(), i, &epoch, &loss, &acc), "history");
      csv += std::to_string(epoch) + "," + Real(loss) + "," + Real(acc) + "\n";
    }
    WriteText(out / "history.csv", csv);
  }
  if (status == BS_ERR_DIVERGED && model) {
    Check(bs_model_save(model.get(), (out / "last_finite.bsd").string().c_str()), "checkpoint");
  }
  Check(status, "train");
  Check(bs_model_save(model.get(), (out / "model.bsd").string().c_str()), "checkpoint");
  std::cout << "valid_accuracy=" << Real(bs_model_valid_accuracy(model.get())) << "\n"
            << "checkpoint=" << (out / "model.bsd").string() << "\n";
  return kExitOk;
}

int CmdTune(const Flags &f) {
  if (f.trials == 0) throw Exit{kExitUsage, "--trials must be >= 1"};
  RunConfig rc = Resolve(f);
  RequirePath(rc.train_bags, "--train-bags");
  RequirePath(rc.valid_bags, "--valid-bags");
  const bs_train_config base = TrainConfigFor(rc);
  Corpus corpus = OpenCorpus(rc);
  Dataset train = corpus.Load(rc.train_bags);
  Dataset valid = corpus.Load(rc.valid_bags);
  const fs::path out = OutDir(rc);

  bs_search *s = nullptr;
  Check(bs_tune(train.get(), valid.get(), &base, f.trials, base.seed, &s), "tune");
  Search search(s);

  std::string csv = "trial,u1,a1,p1,u2,a2,p2,optimizer,lr,valid_accuracy,diverged\n";
  for (size_t i = 0; i < bs_search_trial_count(search.get()); ++i) {
    bs_train_config t;
    double acc = 0.0;
    int diverged = 0;
    Check(bs_search_trial(search.get(), i, &t, &acc, &diverged), "trial");
    csv += std::to_string(i) + "," + std::to_string(t.model.u1) + "," +
           ActivationName(t.model.a1) + "," + Real(t.model.p1) + "," +
           std::to_string(t.model.u2) + "," + ActivationName(t.model.a2) + "," +
           Real(t.model.p2) + "," + (t.optimizer == BS_SGD ? "sgd" : "nadam") + "," +
           Real(t.lr) + "," + Real(acc) + "," + std::to_string(diverged) + "\n";
  }
  WriteText(out / "trials.csv", csv);

  bs_train_config best;
  Check(bs_search_trial(search.get(), bs_search_best_index(search.get()), &best, nullptr, nullptr),
        "trial");
  WriteText(out / "best_config.json", ConfigJson(best) + "\n");
  std::cout << "best_trial=" << bs_search_best_index(search.get()) << "\n";
  return kExitOk;
}

struct Loaded {
  Corpus corpus;
  Dataset bags;
  Model model;
};

Loaded LoadForEval(const RunConfig &rc, const Flags &f) {
  RequirePath(f.checkpoint, "--checkpoint");
  RequirePath(rc.test_bags, "--bags");
  Loaded l{OpenCorpus(rc), nullptr, nullptr};
  l.bags = l.corpus.Load(rc.test_bags);
  bs_model *m = nullptr;
  Check(bs_model_read(f.checkpoint.c_str(), &m), f.checkpoint);
  l.model.reset(m);
  Check(bs_model_check(l.model.get(), l.bags.get()), "checkpoint");
  bs_set_threads(ThreadsFromEnv());
  return l;
}

bs_sample_mode ModeFromName(const std::string &name) {
  if (name == "one") return BS_MODE_ONE;
  if (name == "two") return BS_MODE_TWO;
  if (name == "all") return BS_MODE_ALL;
  throw Exit{kExitUsage, "--mode must be one of one, two, all"};
}

int CmdEval(const Flags &f) {
  RunConfig rc = Resolve(f);
  Loaded l = LoadForEval(rc, f);
  std::vector<bs_sample_mode> modes;
  if (f.mode.empty()) {
    modes = {BS_MODE_ONE, BS_MODE_TWO, BS_MODE_ALL};
  } else {
    modes = {ModeFromName(f.mode)};
  }
  if (f.ns.empty()) throw Exit{kExitUsage, "--n needs at least one value"};
  const fs::path out = OutDir(rc);
  const std::string csv = (out / "pn.csv").string();
  std::vector<double> values(modes.size() * f.ns.size());
  Check(bs_pn_report(l.model.get(), l.bags.get(), EvalSeed(rc), modes.data(), modes.size(),
                     f.ns.data(), f.ns.size(), values.data(), csv.c_str()),
        "eval");
  std::ifstream in(csv);
  std::cout << in.rdbuf();
  return kExitOk;
}

int CmdPrCurve(const Flags &f) {
  RunConfig rc = Resolve(f);
  Loaded l = LoadForEval(rc, f);
  bs_triples *t = nullptr;
  Check(bs_score_all(l.model.get(), l.bags.get(), &t), "score");
  Triples triples(t);
  bs_curve *c = nullptr;
  Check(bs_pr_curve(triples.get(), bs_dataset_positive_count(l.bags.get()), &c), "pr-curve");
  Curve curve(c);
  double auc = 0.0;
  Check(bs_curve_auc(curve.get(), &auc), "auc");
  const fs::path out = OutDir(rc);
  Check(bs_curve_write_csv(curve.get(), (out / "pr.csv").string().c_str()), "pr-curve");
  std::cout << "points=" << bs_curve_size(curve.get()) << " auc=" << Real(auc) << "\n";
  return kExitOk;
}

int CmdPredict(const Flags &f) {
  RunConfig rc = Resolve(f);
  Loaded l = LoadForEval(rc, f);
  const bs_vocab *vocab = l.corpus.vocab.get();
  const size_t n_rel = bs_vocab_size(vocab, BS_RELATIONS);
  std::vector<double> probs(n_rel);
  std::string csv = "bag,sub,obj,gold,predicted,probability\n";
  for (size_t b = 0; b < bs_dataset_bag_count(l.bags.get()); ++b) {
    uint32_t rel = 0;
    Check(bs_predict(l.model.get(), l.bags.get(), b, &rel, probs.data(), probs.size()),
          "predict");
    csv += std::to_string(b) + "," + bs_dataset_bag_sub(l.bags.get(), b) + "," +
           bs_dataset_bag_obj(l.bags.get(), b) + "," +
           bs_vocab_name(vocab, BS_RELATIONS, bs_dataset_bag_relation(l.bags.get(), b)) + "," +
           bs_vocab_name(vocab, BS_RELATIONS, rel) + "," + Real(probs[rel]) + "\n";
  }
  const fs::path out = OutDir(rc);
  WriteText(out / "predictions.csv", csv);
  double acc = 0.0;
  Check(bs_bag_accuracy(l.model.get(), l.bags.get(), &acc), "accuracy");
  std::cout << "bags=" << bs_dataset_bag_count(l.bags.get()) << " accuracy=" << Real(acc)
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"BagSide: bag-level relation extraction with side information"};
  app.require_subcommand(1);
  Flags f;

  auto shared = [&f](CLI::App *cmd) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--seed", f.seed, "Seed for every random choice of the run");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--embeddings", f.embeddings, "EMB1 sentence embeddings");
    cmd->add_option("--vocab-dir", f.vocab_dir, "Directory with relations/types/aliases.txt");
    cmd->add_option("--alias-table", f.alias_table, "EMB1 alias phrase vectors");
    cmd->add_option("--alias-threshold", f.alias_threshold, "Cosine threshold for aliases");
  };

  auto *validate = app.add_subcommand("validate", "Check a bags file and print a summary");
  shared(validate);
  validate->add_option("--bags", f.bags, "Bags JSON Lines file");

  auto *train = app.add_subcommand("train", "Train a model and write a checkpoint");
  shared(train);
  train->add_option("--train-bags", f.train_bags, "Training bags");
  train->add_option("--valid-bags", f.valid_bags, "Validation bags");
  train->add_option("--lr", f.lr, "Learning rate");
  train->add_option("--max-epochs", f.max_epochs, "Epoch budget");

  auto *tune = app.add_subcommand("tune", "Random hyperparameter search");
  shared(tune);
  tune->add_option("--train-bags", f.train_bags, "Training bags");
  tune->add_option("--valid-bags", f.valid_bags, "Validation bags");
  tune->add_option("--trials", f.trials, "Number of sampled configurations")->required();
  tune->add_option("--max-epochs", f.max_epochs, "Epoch budget per trial");

  auto *eval = app.add_subcommand("eval", "P@N under the one/two/all protocol");
  auto *pr = app.add_subcommand("pr-curve", "Precision-recall curve and AUC");
  auto *predict = app.add_subcommand("predict", "Per-bag predictions");
  for (auto *cmd : {eval, pr, predict}) {
    shared(cmd);
    cmd->add_option("--checkpoint", f.checkpoint, "BSD1 checkpoint")->required();
    cmd->add_option("--bags", f.bags, "Bags JSON Lines file");
  }
  eval->add_option("--mode", f.mode, "one, two or all (default: all three)");
  eval->add_option("--n", f.ns, "Comma-separated N values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*validate) return CmdValidate(f);
    if (*train) return CmdTrain(f);
    if (*tune) return CmdTune(f);
    if (*eval) return CmdEval(f);
    if (*pr) return CmdPrCurve(f);
    if (*predict) return CmdPredict(f);
  } catch (const Exit &e) {
    std::cerr << "bagside: " << e.message << "\n";
    return e.code;
  } catch (const std::exception &e) {
    std::cerr << "bagside: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
