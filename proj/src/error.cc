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

#include "splitglm/error.h"

namespace splitglm {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kConstantColumn: return "ConstantColumn";
    case ErrorCode::kDegenerateColumn: return "DegenerateColumn";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kConnectFailure: return "ConnectFailure";
    case ErrorCode::kTransportFailure: return "TransportFailure";
    case ErrorCode::kDecodeFailure: return "DecodeFailure";
    case ErrorCode::kPeerAbort: return "PeerAbort";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kRankDeficientTrace: return "RankDeficientTrace";
    case ErrorCode::kRankAmbiguous: return "RankAmbiguous";
    case ErrorCode::kDfExhausted: return "DfExhausted";
    case ErrorCode::kNoCoefficients: return "NoCoefficients";
    case ErrorCode::kMissingValue: return "MissingValue";
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kEmptyData: return "EmptyData";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace splitglm
