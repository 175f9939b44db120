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

#include "bagside/model.h"

#include <cmath>
#include <string>
#include <type_traits>

#include "bagside/error.h"

namespace bagside {

namespace {

Eigen::VectorXd Activate(Activation a, const Eigen::VectorXd &x) {
  switch (a) {
    case Activation::kTanh: return x.array().tanh().matrix();
    case Activation::kRelu: return x.cwiseMax(0.0);
    case Activation::kSigmoid: return (1.0 / (1.0 + (-x.array()).exp())).matrix();
  }
  return x;
}

// Derivative expressed through the pre-activation and its output.
Eigen::VectorXd ActivationGrad(Activation a, const Eigen::VectorXd &pre,
                               const Eigen::VectorXd &out) {
  switch (a) {
    case Activation::kTanh: return (1.0 - out.array().square()).matrix();
    case Activation::kRelu: return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::kSigmoid: return (out.array() * (1.0 - out.array())).matrix();
  }
  return Eigen::VectorXd::Ones(pre.size());
}

Eigen::VectorXd DropoutMask(size_t n, double rate, Mode mode, Rng *rng) {
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
  if (mode == Mode::kEval || rate == 0.0) return mask;
  if (rng == nullptr) Fail(ErrorCode::kInvalidArgument, "train-mode dropout needs a generator");
  const double keep = 1.0 / (1.0 - rate);
  for (size_t i = 0; i < n; ++i) mask[i] = rng->Uniform() < rate ? 0.0 : keep;
  return mask;
}

template <typename View, typename Params>
std::vector<View> CollectTensors(Params &p) {
  auto mat = [](std::string_view name, auto &m) {
    constexpr bool is_vector = std::decay_t<decltype(m)>::ColsAtCompileTime == 1;
    return View{name, static_cast<size_t>(m.rows()), static_cast<size_t>(m.cols()), is_vector,
                {m.data(), static_cast<size_t>(m.size())}};
  };
  return {mat("alias_table", p.alias_table), mat("type_table", p.type_table),
          mat("q", p.q), mat("w1", p.w1), mat("b1", p.b1), mat("w2", p.w2),
          mat("b2", p.b2), mat("w3", p.w3), mat("b3", p.b3)};
}

void ScatterMean(std::span<const uint32_t> ids, const Eigen::VectorXd &grad,
                 double scale, Table *table) {
  const double w = scale / static_cast<double>(ids.size());
  for (uint32_t id : ids) table->row(id) += w * grad.transpose();
}

}  // namespace

std::string_view ActivationName(Activation a) {
  switch (a) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "unknown";
}

Activation ParseActivation(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  Fail(ErrorCode::kInvalidArgument, "unknown activation \"" + std::string(name) + "\"");
}

void ModelConfig::Validate() const {
  if (d_s == 0 || d_a == 0 || d_t == 0 || u1 == 0 || u2 == 0 || n_rel == 0) {
    Fail(ErrorCode::kInvalidArgument, "model dims and units must be >= 1");
  }
  for (double p : {p1, p2}) {
    if (!(p >= 0.0 && p < 1.0)) Fail(ErrorCode::kInvalidArgument, "dropout must lie in [0, 1)");
  }
}

ModelParams ModelParams::Zeros(const ModelConfig &cfg, size_t aliases, size_t types) {
  ModelParams p;
  p.alias_table = Table::Zero(aliases, cfg.d_a);
  p.type_table = Table::Zero(types, cfg.d_t);
  p.q = Eigen::VectorXd::Zero(cfg.rep_dim());
  p.w1 = Table::Zero(cfg.u1, cfg.input_dim());
  p.b1 = Eigen::VectorXd::Zero(cfg.u1);
  p.w2 = Table::Zero(cfg.u2, cfg.u1);
  p.b2 = Eigen::VectorXd::Zero(cfg.u2);
  p.w3 = Table::Zero(cfg.n_rel, cfg.u2);
  p.b3 = Eigen::VectorXd::Zero(cfg.n_rel);
  return p;
}

std::vector<TensorView> ModelParams::Tensors() {
  return CollectTensors<TensorView>(*this);
}

std::vector<ConstTensorView> ModelParams::Tensors() const {
  return CollectTensors<ConstTensorView>(*this);
}

void ModelParams::CheckShapes(const ModelConfig &cfg, size_t aliases, size_t types) const {
  if (!SameShape(Zeros(cfg, aliases, types))) {
    Fail(ErrorCode::kShapeMismatch, "parameter shapes do not match the model config");
  }
}

bool ModelParams::SameShape(const ModelParams &other) const {
  auto a = Tensors();
  auto b = other.Tensors();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows != b[i].rows || a[i].cols != b[i].cols) return false;
  }
  return true;
}

bool ModelParams::AllFinite() const {
  for (const auto &t : Tensors()) {
    for (double v : t.data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool ModelParams::operator==(const ModelParams &other) const {
  if (!SameShape(other)) return false;
  auto a = Tensors();
  auto b = other.Tensors();
  for (size_t i = 0; i < a.size(); ++i) {
    if (!std::equal(a[i].data.begin(), a[i].data.end(), b[i].data.begin())) return false;
  }
  return true;
}

void AddScaled(ModelParams *acc, const ModelParams &other, double scale) {
  if (!acc->SameShape(other)) Fail(ErrorCode::kShapeMismatch, "gradient shape mismatch");
  auto dst = acc->Tensors();
  auto src = other.Tensors();
  for (size_t t = 0; t < dst.size(); ++t) {
    for (size_t i = 0; i < dst[t].data.size(); ++i) dst[t].data[i] += scale * src[t].data[i];
  }
}

void SetZero(ModelParams *params) {
  for (auto &t : params->Tensors()) std::fill(t.data.begin(), t.data.end(), 0.0);
}

Eigen::VectorXd StableSoftmax(const Eigen::VectorXd &logits) {
  if (logits.size() == 0) return logits;
  Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

AttentionResult AttentionPool(const std::vector<Eigen::VectorXd> &reps,
                              const Eigen::VectorXd &q) {
  if (reps.empty()) Fail(ErrorCode::kEmptyBag, "attention over an empty bag");
  Eigen::VectorXd scores(reps.size());
  for (size_t i = 0; i < reps.size(); ++i) {
    if (reps[i].size() != q.size()) Fail(ErrorCode::kShapeMismatch, "sentence rep dim != query dim");
    scores[i] = q.dot(reps[i]);
  }
  AttentionResult out;
  out.alpha = StableSoftmax(scores);
  out.bag = Eigen::VectorXd::Zero(q.size());
  for (size_t i = 0; i < reps.size(); ++i) out.bag += out.alpha[i] * reps[i];
  return out;
}

ForwardCache Forward(const Bag &bag, const EmbeddingMatrix &embeddings,
                     const ModelParams &params, const ModelConfig &cfg, Mode mode,
                     Rng *rng) {
  if (bag.sentences.empty()) Fail(ErrorCode::kEmptyBag, "bag has no sentences");
  if (embeddings.dim() != cfg.d_s) {
    Fail(ErrorCode::kShapeMismatch, "embedding dim " + std::to_string(embeddings.dim()) +
                                        " != model d_s " + std::to_string(cfg.d_s));
  }
  params.CheckShapes(cfg, params.alias_table.rows(), params.type_table.rows());

  ForwardCache c;
  c.mode = mode;
  c.a1 = cfg.a1;
  c.a2 = cfg.a2;
  c.reps.reserve(bag.sentences.size());
  for (const auto &s : bag.sentences) {
    if (s.emb_row >= embeddings.rows()) Fail(ErrorCode::kBadEmbRow, "emb row out of range");
    Eigen::VectorXd rep(cfg.rep_dim());
    auto row = embeddings.row(s.emb_row);
    for (uint32_t k = 0; k < cfg.d_s; ++k) rep[k] = row[k];
    rep.tail(cfg.d_a) = AliasVector(s.alias_ids, params.alias_table);
    c.reps.push_back(std::move(rep));
  }

  c.scores.resize(c.reps.size());
  for (size_t i = 0; i < c.reps.size(); ++i) c.scores[i] = params.q.dot(c.reps[i]);
  c.alpha = StableSoftmax(c.scores);
  c.bag = Eigen::VectorXd::Zero(cfg.rep_dim());
  for (size_t i = 0; i < c.reps.size(); ++i) c.bag += c.alpha[i] * c.reps[i];

  c.z.resize(cfg.input_dim());
  c.z.head(cfg.rep_dim()) = c.bag;
  c.z.segment(cfg.rep_dim(), cfg.d_t) = TypeVector(bag.sub_types, params.type_table);
  c.z.tail(cfg.d_t) = TypeVector(bag.obj_types, params.type_table);

  c.pre1 = params.w1 * c.z + params.b1;
  c.h1 = Activate(cfg.a1, c.pre1);
  c.mask1 = DropoutMask(cfg.u1, cfg.p1, mode, rng);
  c.out1 = c.h1.cwiseProduct(c.mask1);

  c.pre2 = params.w2 * c.out1 + params.b2;
  c.h2 = Activate(cfg.a2, c.pre2);
  c.mask2 = DropoutMask(cfg.u2, cfg.p2, mode, rng);
  c.out2 = c.h2.cwiseProduct(c.mask2);

  c.logits = params.w3 * c.out2 + params.b3;
  c.probs = StableSoftmax(c.logits);
  return c;
}

double CrossEntropy(const Eigen::VectorXd &probs, uint32_t label) {
  if (label >= probs.size()) {
    Fail(ErrorCode::kBadLabel, "label " + std::to_string(label) + " outside " +
                                   std::to_string(probs.size()) + " classes");
  }
  return -std::log(std::max(probs[label], kLossFloor));
}

void AccumulateBackward(const ForwardCache &c, const Bag &bag, uint32_t label,
                        const ModelParams &params, double scale, Gradients *g) {
  const auto n = static_cast<Eigen::Index>(bag.sentences.size());
  if (static_cast<Eigen::Index>(c.reps.size()) != n || c.alpha.size() != n ||
      c.probs.size() != params.b3.size() || c.z.size() != params.w1.cols() ||
      c.mask1.size() != params.b1.size() || c.mask2.size() != params.b2.size()) {
    Fail(ErrorCode::kCacheMismatch, "forward cache does not match this bag and parameters");
  }
  if (label >= c.probs.size()) Fail(ErrorCode::kBadLabel, "label out of range");
  if (!g->SameShape(params)) Fail(ErrorCode::kShapeMismatch, "gradient buffer shape mismatch");

  // Softmax + cross-entropy.
  Eigen::VectorXd d_logits = c.probs;
  d_logits[label] -= 1.0;
  d_logits *= scale;

  g->w3.noalias() += d_logits * c.out2.transpose();
  g->b3 += d_logits;
  Eigen::VectorXd d_pre2 = (params.w3.transpose() * d_logits)
                               .cwiseProduct(c.mask2)
                               .cwiseProduct(ActivationGrad(c.a2, c.pre2, c.h2));

  g->w2.noalias() += d_pre2 * c.out1.transpose();
  g->b2 += d_pre2;
  Eigen::VectorXd d_pre1 = (params.w2.transpose() * d_pre2)
                               .cwiseProduct(c.mask1)
                               .cwiseProduct(ActivationGrad(c.a1, c.pre1, c.h1));

  g->w1.noalias() += d_pre1 * c.z.transpose();
  g->b1 += d_pre1;
  const Eigen::VectorXd d_z = params.w1.transpose() * d_pre1;

  const Eigen::Index rep_dim = params.q.size();
  const Eigen::Index d_t = params.type_table.cols();
  const Eigen::Index d_a = params.alias_table.cols();
  ScatterMean(bag.sub_types, d_z.segment(rep_dim, d_t), 1.0, &g->type_table);
  ScatterMean(bag.obj_types, d_z.tail(d_t), 1.0, &g->type_table);

  // Attention: b = sum_i alpha_i s_i with alpha = softmax(q . s_i).
  const Eigen::VectorXd d_bag = d_z.head(rep_dim);
  Eigen::VectorXd d_alpha(n);
  for (Eigen::Index i = 0; i < n; ++i) d_alpha[i] = d_bag.dot(c.reps[i]);
  const double mean_d_alpha = c.alpha.dot(d_alpha);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d_score = c.alpha[i] * (d_alpha[i] - mean_d_alpha);
    g->q += d_score * c.reps[i];
    const Eigen::VectorXd d_rep = c.alpha[i] * d_bag + d_score * params.q;
    const auto &ids = bag.sentences[i].alias_ids;
    if (ids.empty()) {
      g->alias_table.row(0) += d_rep.tail(d_a).transpose();
    } else {
      ScatterMean(ids, d_rep.tail(d_a), 1.0, &g->alias_table);
    }
  }
}

Gradients Backward(const ForwardCache &cache, const Bag &bag, uint32_t label,
                   const ModelParams &params) {
  Gradients g = params;
  SetZero(&g);
  AccumulateBackward(cache, bag, label, params, 1.0, &g);
  return g;
}

uint32_t ArgMax(const Eigen::VectorXd &probs) {
  uint32_t best = 0;
  for (Eigen::Index r = 1; r < probs.size(); ++r) {
    if (probs[r] > probs[best]) best = static_cast<uint32_t>(r);
  }
  return best;
}

Prediction Predict(const Bag &bag, const EmbeddingMatrix &embeddings,
                   const ModelParams &params, const ModelConfig &cfg) {
  Prediction out;
  out.probs = Forward(bag, embeddings, params, cfg, Mode::kEval).probs;
  out.relation = ArgMax(out.probs);
  return out;
}

}  // namespace bagside
