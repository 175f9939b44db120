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

#ifndef BAGSIDE_CORPUS_H_
#define BAGSIDE_CORPUS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bagside {

// Dense rows x dim table of 32-bit reals, row-major. Holds precomputed
// sentence encodings (and alias phrase vectors) exactly as stored on disk.
class EmbeddingMatrix {
 public:
  // Fails with BadShape if rows or dim is zero or data.size() != rows * dim,
  // and with NonFinite if any value is NaN or infinite.
  EmbeddingMatrix(uint32_t rows, uint32_t dim, std::vector<float> data);

  uint32_t rows() const { return rows_; }
  uint32_t dim() const { return dim_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(uint32_t r) const {
    return {data_.data() + static_cast<size_t>(r) * dim_, dim_};
  }

  bool operator==(const EmbeddingMatrix &other) const = default;

 private:
  uint32_t rows_;
  uint32_t dim_;
  std::vector<float> data_;
};

// EMB1 codec: "EMB1", u32 rows, u32 dim (little-endian), then rows*dim
// little-endian IEEE-754 floats.
EmbeddingMatrix ParseEmbeddingFile(std::string_view bytes);
std::string WriteEmbeddingFile(const EmbeddingMatrix &m);

// One name<->id table. Ids are dense line indices.
class NameTable {
 public:
  NameTable() = default;
  explicit NameTable(std::vector<std::string> names);

  size_t size() const { return names_.size(); }
  const std::string &name(uint32_t id) const { return names_.at(id); }
  std::optional<uint32_t> Find(std::string_view name) const;
  const std::vector<std::string> &names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, uint32_t> ids_;
};

inline constexpr std::string_view kNullRelation = "NA";
inline constexpr std::string_view kNullType = "NO_TYPE";
inline constexpr std::string_view kNullAlias = "NO_ALIAS";

struct Vocab {
  NameTable relations;  // id 0 = NA
  NameTable types;      // id 0 = NO_TYPE
  NameTable aliases;    // id 0 = NO_ALIAS
};

// Builds a vocabulary from three newline-separated name lists. A trailing
// newline is allowed; interior empty lines are not.
Vocab LoadVocab(std::string_view relations_text, std::string_view types_text,
                std::string_view aliases_text);

// Reads relations.txt, types.txt and aliases.txt from a directory.
Vocab LoadVocabDir(const std::string &dir);

struct SentenceRec {
  uint32_t emb_row = 0;
  std::vector<uint32_t> alias_ids;
  std::string text;
};

struct Bag {
  std::string sub;
  std::string obj;
  uint32_t rel = 0;
  std::vector<uint32_t> sub_types;
  std::vector<uint32_t> obj_types;
  std::vector<SentenceRec> sentences;
};

// A validated, immutable set of bags sharing one vocabulary and embedding
// matrix. Safe to read from many threads.
struct BagDataset {
  std::vector<Bag> bags;
  std::shared_ptr<const EmbeddingMatrix> embeddings;
  std::shared_ptr<const Vocab> vocab;

  size_t SentenceCount() const;
  // Number of bags whose gold relation is not NA.
  size_t PositiveCount() const;
  std::vector<size_t> RelationHistogram() const;
};

// Optional in-process alias matching for sentences that carry a `phrase` row
// instead of precomputed `aliases` ids.
struct AliasMatching {
  std::shared_ptr<const EmbeddingMatrix> phrase_table;  // aligned with aliases.txt
  double threshold = 0.8;
};

// Parses bags JSON Lines. Blank lines are skipped; error messages name the
// 1-based line number of the offending record.
BagDataset LoadBags(std::string_view jsonl, std::shared_ptr<const Vocab> vocab,
                    std::shared_ptr<const EmbeddingMatrix> embeddings,
                    const AliasMatching *matching = nullptr);

// Checks every Bag invariant against the dataset's vocabulary and embeddings.
void ValidateBag(const Bag &bag, const Vocab &vocab, const EmbeddingMatrix &emb);

// Seeded permutation of all bag ids split into chunks of batch_size.
std::vector<std::vector<uint32_t>> Batches(size_t bag_count, size_t batch_size,
                                           uint64_t seed);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view bytes);

}  // namespace bagside

#endif  // BAGSIDE_CORPUS_H_
