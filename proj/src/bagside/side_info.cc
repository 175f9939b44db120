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

#include "bagside/side_info.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bagside/error.h"

namespace bagside {

namespace {

double Norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

Eigen::VectorXd MeanOfRows(std::span<const uint32_t> ids, const Table &table,
                           ErrorCode bad_id, const char *what) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(table.cols());
  for (uint32_t id : ids) {
    if (id >= table.rows()) {
      Fail(bad_id, std::string(what) + " id " + std::to_string(id) +
                       " out of range for table with " +
                       std::to_string(table.rows()) + " rows");
    }
    mean += table.row(id).transpose();
  }
  return mean / static_cast<double>(ids.size());
}

}  // namespace

double Cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    Fail(ErrorCode::kDimMismatch, "cosine of vectors with dims " +
                                      std::to_string(u.size()) + " and " +
                                      std::to_string(v.size()));
  }
  const double nu = Norm(u);
  const double nv = Norm(v);
  if (nu == 0.0 || nv == 0.0) Fail(ErrorCode::kZeroVector, "cosine of a zero vector");
  double dot = 0.0;
  for (size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

std::vector<uint32_t> MatchAliases(std::span<const double> phrase,
                                   const EmbeddingMatrix &table, double threshold) {
  if (phrase.size() != table.dim()) {
    Fail(ErrorCode::kDimMismatch, "phrase vector has dim " + std::to_string(phrase.size()) +
                                      ", alias table has dim " +
                                      std::to_string(table.dim()));
  }
  if (Norm(phrase) == 0.0) Fail(ErrorCode::kZeroVector, "phrase vector has zero norm");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "alias threshold must lie in [0, 1]");
  }

  std::vector<std::pair<double, uint32_t>> hits;
  std::vector<double> row(table.dim());
  for (uint32_t id = 1; id < table.rows(); ++id) {
    auto src = table.row(id);
    std::copy(src.begin(), src.end(), row.begin());
    if (Norm(row) == 0.0) continue;
    const double sim = Cosine(phrase, row);
    if (sim >= threshold) hits.emplace_back(sim, id);
  }
  std::sort(hits.begin(), hits.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  std::vector<uint32_t> ids;
  ids.reserve(hits.size());
  for (const auto &hit : hits) ids.push_back(hit.second);
  return ids;
}

Eigen::VectorXd AliasVector(std::span<const uint32_t> alias_ids, const Table &table) {
  if (alias_ids.empty()) {
    if (table.rows() == 0) Fail(ErrorCode::kBadAliasId, "alias table is empty");
    return table.row(0).transpose();
  }
  return MeanOfRows(alias_ids, table, ErrorCode::kBadAliasId, "alias");
}

Eigen::VectorXd TypeVector(std::span<const uint32_t> type_ids, const Table &table) {
  if (type_ids.empty()) Fail(ErrorCode::kEmptyTypes, "entity has no type ids");
  return MeanOfRows(type_ids, table, ErrorCode::kBadTypeId, "type");
}

}  // namespace bagside
