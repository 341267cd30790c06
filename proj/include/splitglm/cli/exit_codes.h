// Copyright 2026 The splitglm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPLITGLM_CLI_EXIT_CODES_H_
#define SPLITGLM_CLI_EXIT_CODES_H_

#include <array>
#include <string_view>
#include <utility>

#include "splitglm/error.h"

namespace splitglm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
// The session ended at the iteration cap; results were still written.
inline constexpr int kExitNotConverged = 3;

inline constexpr std::array<std::pair<ErrorCode, int>, 23> kExitCodes = {{
    {ErrorCode::kInvalidArgument, 10},
    {ErrorCode::kNonFinite, 11},
    {ErrorCode::kConstantColumn, 12},
    {ErrorCode::kDegenerateColumn, 13},
    {ErrorCode::kSingularGram, 14},
    {ErrorCode::kShapeMismatch, 15},
    {ErrorCode::kDigestMismatch, 16},
    {ErrorCode::kVersionMismatch, 17},
    {ErrorCode::kConfigMismatch, 18},
    {ErrorCode::kAuthFailure, 19},
    {ErrorCode::kConnectFailure, 20},
    {ErrorCode::kTransportFailure, 21},
    {ErrorCode::kDecodeFailure, 22},
    {ErrorCode::kPeerAbort, 23},
    {ErrorCode::kProtocolViolation, 24},
    {ErrorCode::kRankDeficientTrace, 25},
    {ErrorCode::kRankAmbiguous, 26},
    {ErrorCode::kDfExhausted, 27},
    {ErrorCode::kNoCoefficients, 28},
    {ErrorCode::kMissingValue, 29},
    {ErrorCode::kUnknownColumn, 30},
    {ErrorCode::kEmptyData, 31},
    {ErrorCode::kIoError, 32},
}};

constexpr int ExitCodeFor(ErrorCode code) {
  for (const auto& [c, exit] : kExitCodes) {
    if (c == code) return exit;
  }
  return kExitInternal;
}

}  // namespace splitglm::cli

#endif  // SPLITGLM_CLI_EXIT_CODES_H_
