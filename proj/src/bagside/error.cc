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

#include "bagside/error.h"

namespace bagside {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBadShape: return "BadShape";
    case ErrorCode::kTrailingBytes: return "TrailingBytes";
    case ErrorCode::kManifestMismatch: return "ManifestMismatch";
    case ErrorCode::kMissingNull: return "MissingNull";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kUnknownRelation: return "UnknownRelation";
    case ErrorCode::kUnknownType: return "UnknownType";
    case ErrorCode::kUnknownAlias: return "UnknownAlias";
    case ErrorCode::kEmptyBag: return "EmptyBag";
    case ErrorCode::kBadEmbRow: return "BadEmbRow";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kBadAliasId: return "BadAliasId";
    case ErrorCode::kBadTypeId: return "BadTypeId";
    case ErrorCode::kEmptyTypes: return "EmptyTypes";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBadLabel: return "BadLabel";
    case ErrorCode::kCacheMismatch: return "CacheMismatch";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kNotEnoughTriples: return "NotEnoughTriples";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kEmptyCurve: return "EmptyCurve";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

}  // namespace bagside
