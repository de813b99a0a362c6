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

#ifndef ASYNC_ADMM_ERRORS_H_
#define ASYNC_ADMM_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace async_admm {

enum class ErrorCode {
  kDimensionMismatch,
  kInvalidArgument,
  kInvalidProblem,
  kUnsupportedTerm,
  kUnsupportedSet,
  kNonfiniteInput,
  kUnboundedSubproblem,
  kImproperPartition,
  kNonCovering,
  kZeroProbabilityBlock,
  kDisconnectedGraph,
  kUnsupportedMix,
  kNonPositiveSeries,
  kNonCompactSets,
  kGridTooLarge,
  kMissingReference,
  kDivergence,
  kParseError,
  kValidationError,
  kUnknownBenchmark,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can dispatch on it.
class AdmmError : public std::runtime_error {
 public:
  AdmmError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace async_admm

#endif  // ASYNC_ADMM_ERRORS_H_
