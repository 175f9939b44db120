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

#ifndef BAGSIDE_ERROR_H_
#define BAGSIDE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bagside {

// Error kinds raised by the library. The numeric values are part of the C API
// (see include/bagside/bagside.h) and must stay in sync with bs_status.
enum class ErrorCode : int {
  kOk = 0,
  // Binary formats.
  kBadMagic = 1,
  kTruncated = 2,
  kNonFinite = 3,
  kBadShape = 4,
  kTrailingBytes = 5,
  kManifestMismatch = 6,
  // Vocabulary and bag records.
  kMissingNull = 10,
  kDuplicateName = 11,
  kUnknownRelation = 12,
  kUnknownType = 13,
  kUnknownAlias = 14,
  kEmptyBag = 15,
  kBadEmbRow = 16,
  kMalformedRecord = 17,
  // Side information.
  kZeroVector = 20,
  kDimMismatch = 21,
  kBadAliasId = 22,
  kBadTypeId = 23,
  kEmptyTypes = 24,
  // Model and training.
  kShapeMismatch = 30,
  kBadLabel = 31,
  kCacheMismatch = 32,
  kDiverged = 33,
  // Evaluation.
  kNotEnoughTriples = 40,
  kEmptyAfterFilter = 41,
  kNoPositives = 42,
  kEmptyCurve = 43,
  // Generic.
  kInvalidArgument = 90,
  kIo = 91,
  kInternal = 99,
};

// Stable identifier such as "BadMagic".
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string &message);

}  // namespace bagside

#endif  // BAGSIDE_ERROR_H_
