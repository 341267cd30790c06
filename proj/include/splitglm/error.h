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

#ifndef SPLITGLM_ERROR_H_
#define SPLITGLM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace splitglm {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps each code to a distinct process exit status (see cli/exit_codes.h).
enum class ErrorCode {
  kInvalidArgument,
  kNonFinite,
  kConstantColumn,
  kDegenerateColumn,
  kSingularGram,
  kShapeMismatch,
  kDigestMismatch,
  kVersionMismatch,
  kConfigMismatch,
  kAuthFailure,
  kConnectFailure,
  kTransportFailure,
  kDecodeFailure,
  kPeerAbort,
  kProtocolViolation,
  kRankDeficientTrace,
  kRankAmbiguous,
  kDfExhausted,
  kNoCoefficients,
  kMissingValue,
  kUnknownColumn,
  kEmptyData,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace splitglm

#endif  // SPLITGLM_ERROR_H_
