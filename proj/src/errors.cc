// Copyright 2026 The async-admm Authors
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

#include "async_admm/errors.h"

namespace async_admm {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidProblem: return "InvalidProblem";
    case ErrorCode::kUnsupportedTerm: return "UnsupportedTerm";
    case ErrorCode::kUnsupportedSet: return "UnsupportedSet";
    case ErrorCode::kNonfiniteInput: return "NonfiniteInput";
    case ErrorCode::kUnboundedSubproblem: return "UnboundedSubproblem";
    case ErrorCode::kImproperPartition: return "ImproperPartition";
    case ErrorCode::kNonCovering: return "NonCovering";
    case ErrorCode::kZeroProbabilityBlock: return "ZeroProbabilityBlock";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kUnsupportedMix: return "UnsupportedMix";
    case ErrorCode::kNonPositiveSeries: return "NonPositiveSeries";
    case ErrorCode::kNonCompactSets: return "NonCompactSets";
    case ErrorCode::kGridTooLarge: return "GridTooLarge";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kUnknownBenchmark: return "UnknownBenchmark";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace async_admm
