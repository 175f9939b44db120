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

#ifndef BAGSIDE_SIDE_INFO_H_
#define BAGSIDE_SIDE_INFO_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bagside/corpus.h"

namespace bagside {

// Row-major lookup table, one embedding per id (alias or entity type).
using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// u.v / (|u| |v|). Fails with DimMismatch or ZeroVector.
double Cosine(std::span<const double> u, std::span<const double> v);

// Alias ids (NO_ALIAS excluded) whose phrase vector has cosine >= threshold
// with `phrase`, most similar first, ties by ascending id. Zero-norm table
// rows never match.
std::vector<uint32_t> MatchAliases(std::span<const double> phrase,
                                   const EmbeddingMatrix &table, double threshold);

// Mean of the alias rows; the NO_ALIAS row when no alias matched.
Eigen::VectorXd AliasVector(std::span<const uint32_t> alias_ids, const Table &table);

// Mean of the entity-type rows. Fails with EmptyTypes on an empty list.
Eigen::VectorXd TypeVector(std::span<const uint32_t> type_ids, const Table &table);

}  // namespace bagside

#endif  // BAGSIDE_SIDE_INFO_H_
