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

#include "bagside/corpus.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "bagside/error.h"
#include "bagside/rng.h"
#include "bagside/side_info.h"

namespace bagside {

namespace {

constexpr std::string_view kEmbMagic = "EMB1";
constexpr size_t kEmbHeaderSize = 12;

uint32_t ReadU32(std::string_view bytes, size_t pos) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) {
    v = (v << 8) | static_cast<uint8_t>(bytes[pos + i]);
  }
  return v;
}

void AppendU32(std::string *out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

NameTable LoadNames(std::string_view text, std::string_view null_name, const char *file) {
  std::vector<std::string> names = SplitLines(text);
  while (!names.empty() && names.back().empty()) names.pop_back();
  if (names.empty() || names[0] != null_name) {
    Fail(ErrorCode::kMissingNull, std::string(file) + ": line 0 must be \"" +
                                      std::string(null_name) + "\"");
  }
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) {
      Fail(ErrorCode::kMalformedRecord,
           std::string(file) + ": empty name at line " + std::to_string(i));
    }
  }
  return NameTable(std::move(names));
}

using nlohmann::json;

[[noreturn]] void RecordError(ErrorCode code, size_t line, const std::string &what) {
  Fail(code, "line " + std::to_string(line) + ": " + what);
}

// Resolves a name-or-id field against a name table.
uint32_t ResolveId(const json &value, const NameTable &table, ErrorCode unknown,
                   size_t line, const char *what) {
  if (value.is_string()) {
    auto id = table.Find(value.get<std::string>());
    if (!id) RecordError(unknown, line, std::string("unknown ") + what + " \"" +
                                            value.get<std::string>() + "\"");
    return *id;
  }
  if (value.is_number_integer()) {
    const int64_t id = value.get<int64_t>();
    if (id < 0 || static_cast<uint64_t>(id) >= table.size()) {
      RecordError(unknown, line, std::string(what) + " id " + std::to_string(id) +
                                     " out of range");
    }
    return static_cast<uint32_t>(id);
  }
  RecordError(ErrorCode::kMalformedRecord, line,
              std::string(what) + " must be a string or integer");
}

std::vector<uint32_t> ParseTypes(const json &record, const char *key, const Vocab &vocab,
                                 size_t line) {
  std::vector<uint32_t> ids;
  auto it = record.find(key);
  if (it != record.end() && !it->is_null()) {
    if (!it->is_array()) {
      RecordError(ErrorCode::kMalformedRecord, line, std::string(key) + " must be an array");
    }
    for (const auto &v : *it) {
      ids.push_back(ResolveId(v, vocab.types, ErrorCode::kUnknownType, line, "type"));
    }
  }
  if (ids.empty()) ids.push_back(0);
  return ids;
}

SentenceRec ParseSentence(const json &s, const Vocab &vocab, const EmbeddingMatrix &emb,
                          const AliasMatching *matching, size_t line) {
  if (!s.is_object()) {
    RecordError(ErrorCode::kMalformedRecord, line, "sentence must be an object");
  }
  SentenceRec rec;
  auto row = s.find("emb");
  if (row == s.end() || !row->is_number_integer()) {
    RecordError(ErrorCode::kMalformedRecord, line, "sentence needs an integer \"emb\"");
  }
  const int64_t r = row->get<int64_t>();
  if (r < 0 || r >= static_cast<int64_t>(emb.rows())) {
    RecordError(ErrorCode::kBadEmbRow, line,
                "emb row " + std::to_string(r) + " outside embeddings with " +
                    std::to_string(emb.rows()) + " rows");
  }
  rec.emb_row = static_cast<uint32_t>(r);

  auto aliases = s.find("aliases");
  auto phrase = s.find("phrase");
  if (aliases != s.end() && !aliases->is_null()) {
    if (!aliases->is_array()) {
      RecordError(ErrorCode::kMalformedRecord, line, "\"aliases\" must be an array");
    }
    for (const auto &a : *aliases) {
      if (!a.is_number_integer()) {
        RecordError(ErrorCode::kMalformedRecord, line, "alias ids must be integers");
      }
      const int64_t id = a.get<int64_t>();
      if (id < 0 || static_cast<uint64_t>(id) >= vocab.aliases.size()) {
        RecordError(ErrorCode::kUnknownAlias, line,
                    "alias id " + std::to_string(id) + " out of range");
      }
      rec.alias_ids.push_back(static_cast<uint32_t>(id));
    }
  } else if (phrase != s.end() && !phrase->is_null()) {
    if (matching == nullptr || !matching->phrase_table) {
      RecordError(ErrorCode::kMalformedRecord, line,
                  "sentence has a \"phrase\" but no alias phrase table was given");
    }
    if (!phrase->is_number_integer() || phrase->get<int64_t>() < 0 ||
        phrase->get<int64_t>() >= static_cast<int64_t>(emb.rows())) {
      RecordError(ErrorCode::kBadEmbRow, line, "\"phrase\" row out of range");
    }
    auto src = emb.row(static_cast<uint32_t>(phrase->get<int64_t>()));
    std::vector<double> vec(src.begin(), src.end());
    try {
      rec.alias_ids = MatchAliases(vec, *matching->phrase_table, matching->threshold);
    } catch (const Error &e) {
      RecordError(e.code(), line, e.what());
    }
  }

  auto text = s.find("text");
  if (text != s.end() && text->is_string()) rec.text = text->get<std::string>();
  return rec;
}

Bag ParseBag(const json &record, const Vocab &vocab, const EmbeddingMatrix &emb,
             const AliasMatching *matching, size_t line) {
  if (!record.is_object()) {
    RecordError(ErrorCode::kMalformedRecord, line, "record must be a JSON object");
  }
  Bag bag;
  for (const char *key : {"sub", "obj"}) {
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) {
      RecordError(ErrorCode::kMalformedRecord, line,
                  std::string("missing string field \"") + key + "\"");
    }
  }
  bag.sub = record["sub"].get<std::string>();
  bag.obj = record["obj"].get<std::string>();

  auto rel = record.find("rel");
  if (rel == record.end()) RecordError(ErrorCode::kMalformedRecord, line, "missing \"rel\"");
  bag.rel = ResolveId(*rel, vocab.relations, ErrorCode::kUnknownRelation, line, "relation");

  bag.sub_types = ParseTypes(record, "sub_types", vocab, line);
  bag.obj_types = ParseTypes(record, "obj_types", vocab, line);

  auto sentences = record.find("sentences");
  if (sentences == record.end() || !sentences->is_array()) {
    RecordError(ErrorCode::kMalformedRecord, line, "missing \"sentences\" array");
  }
  if (sentences->empty()) RecordError(ErrorCode::kEmptyBag, line, "bag has no sentences");
  for (const auto &s : *sentences) {
    bag.sentences.push_back(ParseSentence(s, vocab, emb, matching, line));
  }
  return bag;
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(uint32_t rows, uint32_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (rows == 0 || dim == 0) Fail(ErrorCode::kBadShape, "embedding matrix must be non-empty");
  if (data_.size() != static_cast<size_t>(rows) * dim) {
    Fail(ErrorCode::kBadShape, "embedding data length does not match rows x dim");
  }
  for (size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      Fail(ErrorCode::kNonFinite, "non-finite embedding value at row " +
                                      std::to_string(i / dim) + ", column " +
                                      std::to_string(i % dim));
    }
  }
}

EmbeddingMatrix ParseEmbeddingFile(std::string_view bytes) {
  if (bytes.size() < kEmbMagic.size() || bytes.substr(0, 4) != kEmbMagic) {
    Fail(ErrorCode::kBadMagic, "embedding file does not start with \"EMB1\"");
  }
  if (bytes.size() < kEmbHeaderSize) Fail(ErrorCode::kTruncated, "EMB1 header is truncated");
  const uint32_t rows = ReadU32(bytes, 4);
  const uint32_t dim = ReadU32(bytes, 8);
  if (rows == 0 || dim == 0) Fail(ErrorCode::kBadShape, "EMB1 header declares an empty matrix");
  const uint64_t count = static_cast<uint64_t>(rows) * dim;
  const uint64_t payload = bytes.size() - kEmbHeaderSize;
  if (payload < count * 4) {
    Fail(ErrorCode::kTruncated, "EMB1 payload has " + std::to_string(payload) +
                                    " bytes, header declares " + std::to_string(count * 4));
  }
  if (payload > count * 4) {
    Fail(ErrorCode::kTrailingBytes, "EMB1 payload has " +
                                        std::to_string(payload - count * 4) +
                                        " bytes past the declared matrix");
  }
  std::vector<float> data(count);
  for (uint64_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(ReadU32(bytes, kEmbHeaderSize + 4 * i));
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

std::string WriteEmbeddingFile(const EmbeddingMatrix &m) {
  std::string out;
  out.reserve(kEmbHeaderSize + m.data().size() * 4);
  out.append(kEmbMagic);
  AppendU32(&out, m.rows());
  AppendU32(&out, m.dim());
  for (float v : m.data()) AppendU32(&out, std::bit_cast<uint32_t>(v));
  return out;
}

NameTable::NameTable(std::vector<std::string> names) : names_(std::move(names)) {
  for (size_t i = 0; i < names_.size(); ++i) {
    auto [it, inserted] = ids_.emplace(names_[i], static_cast<uint32_t>(i));
    if (!inserted) {
      Fail(ErrorCode::kDuplicateName, "duplicate name \"" + names_[i] + "\" at lines " +
                                          std::to_string(it->second) + " and " +
                                          std::to_string(i));
    }
  }
}

std::optional<uint32_t> NameTable::Find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Vocab LoadVocab(std::string_view relations_text, std::string_view types_text,
                std::string_view aliases_text) {
  Vocab vocab;
  vocab.relations = LoadNames(relations_text, kNullRelation, "relations.txt");
  vocab.types = LoadNames(types_text, kNullType, "types.txt");
  vocab.aliases = LoadNames(aliases_text, kNullAlias, "aliases.txt");
  return vocab;
}

Vocab LoadVocabDir(const std::string &dir) {
  return LoadVocab(ReadFile(dir + "/relations.txt"), ReadFile(dir + "/types.txt"),
                   ReadFile(dir + "/aliases.txt"));
}

size_t BagDataset::SentenceCount() const {
  size_t n = 0;
  for (const auto &bag : bags) n += bag.sentences.size();
  return n;
}

size_t BagDataset::PositiveCount() const {
  size_t n = 0;
  for (const auto &bag : bags) n += bag.rel != 0;
  return n;
}

std::vector<size_t> BagDataset::RelationHistogram() const {
  std::vector<size_t> hist(vocab ? vocab->relations.size() : 0, 0);
  for (const auto &bag : bags) {
    if (bag.rel >= hist.size()) hist.resize(bag.rel + 1, 0);
    ++hist[bag.rel];
  }
  return hist;
}

void ValidateBag(const Bag &bag, const Vocab &vocab, const EmbeddingMatrix &emb) {
  if (bag.sentences.empty()) Fail(ErrorCode::kEmptyBag, "bag has no sentences");
  if (bag.rel >= vocab.relations.size()) Fail(ErrorCode::kUnknownRelation, "relation id out of range");
  for (const auto *types : {&bag.sub_types, &bag.obj_types}) {
    if (types->empty()) Fail(ErrorCode::kEmptyTypes, "entity has no type ids");
    for (uint32_t t : *types) {
      if (t >= vocab.types.size()) Fail(ErrorCode::kUnknownType, "type id out of range");
    }
  }
  for (const auto &s : bag.sentences) {
    if (s.emb_row >= emb.rows()) Fail(ErrorCode::kBadEmbRow, "emb row out of range");
    for (uint32_t a : s.alias_ids) {
      if (a >= vocab.aliases.size()) Fail(ErrorCode::kUnknownAlias, "alias id out of range");
    }
  }
}

BagDataset LoadBags(std::string_view jsonl, std::shared_ptr<const Vocab> vocab,
                    std::shared_ptr<const EmbeddingMatrix> embeddings,
                    const AliasMatching *matching) {
  if (!vocab || !embeddings) Fail(ErrorCode::kInvalidArgument, "vocab and embeddings are required");
  BagDataset dataset;
  dataset.vocab = vocab;
  dataset.embeddings = embeddings;

  size_t line_no = 0;
  for (const std::string &line : SplitLines(jsonl)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) RecordError(ErrorCode::kMalformedRecord, line_no, "invalid JSON");
    dataset.bags.push_back(ParseBag(record, *vocab, *embeddings, matching, line_no));
  }
  if (dataset.bags.empty()) Fail(ErrorCode::kEmptyBag, "bags file contains no records");
  return dataset;
}

std::vector<std::vector<uint32_t>> Batches(size_t bag_count, size_t batch_size,
                                           uint64_t seed) {
  if (batch_size == 0) Fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  std::vector<uint32_t> order(bag_count);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(seed);
  rng.Shuffle(std::span<uint32_t>(order));

  std::vector<std::vector<uint32_t>> batches;
  for (size_t start = 0; start < bag_count; start += batch_size) {
    const size_t end = std::min(bag_count, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string &path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "short write to " + path);
}

}  // namespace bagside
