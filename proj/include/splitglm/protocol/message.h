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

#ifndef SPLITGLM_PROTOCOL_MESSAGE_H_
#define SPLITGLM_PROTOCOL_MESSAGE_H_

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"
#include "splitglm/transport/crypto.h"

namespace splitglm::protocol {

enum class PartyRole : std::uint8_t { kInitiator = 0, kResponder = 1 };

inline constexpr std::uint16_t kProtocolVersion = 1;

enum class MessageKind : std::uint8_t {
  kHello = 1,
  kHelloAck = 2,
  kPrediction = 3,
  kConvergedFlag = 4,
  kDone = 5,
  kAbort = 6,
};

std::string_view MessageKindName(MessageKind kind);

// version u16 | family u8 | N u64 | tolerance f64 | min_iterations u32 |
// target digest [32]
struct HelloPayload {
  std::uint16_t version = kProtocolVersion;
  Family family = Family::kGaussian;
  std::uint64_t n = 0;
  double tolerance = 0.0;
  std::uint32_t min_iterations = 0;
  transport::Digest target_digest{};

  bool operator==(const HelloPayload&) const = default;
};

// version u16 | N u64 | min_iterations u32 | max_iterations u32 |
// target digest [32]
struct HelloAckPayload {
  std::uint16_t version = kProtocolVersion;
  std::uint64_t n = 0;
  std::uint32_t min_iterations = 0;
  std::uint32_t max_iterations = 0;
  transport::Digest target_digest{};

  bool operator==(const HelloAckPayload&) const = default;
};

// N binary64 values followed by the sender's max_delta.
struct PredictionPayload {
  Vector values;
  double max_delta = 0.0;

  bool operator==(const PredictionPayload& o) const {
    return max_delta == o.max_delta && values.size() == o.values.size() &&
           values == o.values;
  }
};

// converged u8 (1 = both parties below tolerance, 0 = iteration cap)
struct ConvergedPayload {
  bool converged = false;
  bool operator==(const ConvergedPayload&) const = default;
};

struct AbortPayload {
  std::string reason;
  bool operator==(const AbortPayload&) const = default;
};

using Payload = std::variant<std::monostate, HelloPayload, HelloAckPayload,
                             PredictionPayload, ConvergedPayload, AbortPayload>;

struct ProtocolMessage {
  MessageKind kind = MessageKind::kDone;
  std::uint32_t iteration = 0;
  Payload payload;

  bool operator==(const ProtocolMessage&) const = default;

  static ProtocolMessage Hello(const HelloPayload& p);
  static ProtocolMessage HelloAck(const HelloAckPayload& p);
  static ProtocolMessage Prediction(std::uint32_t iteration, Vector values,
                                    double max_delta);
  static ProtocolMessage Converged(std::uint32_t iteration, bool converged);
  static ProtocolMessage Done(std::uint32_t iteration);
  static ProtocolMessage Abort(std::uint32_t iteration, std::string reason);
};

inline constexpr std::size_t kMessageHeaderBytes = 9;
inline constexpr std::size_t kHelloPayloadBytes = 2 + 1 + 8 + 8 + 4 + 32;
inline constexpr std::size_t kHelloAckPayloadBytes = 2 + 8 + 4 + 4 + 32;

// kind u8 | iteration u32 LE | payload length u32 LE | payload
std::vector<std::uint8_t> Encode(const ProtocolMessage& message);
// Throws DecodeFailure on any structural inconsistency.
ProtocolMessage Decode(std::span<const std::uint8_t> bytes);

}  // namespace splitglm::protocol

#endif  // SPLITGLM_PROTOCOL_MESSAGE_H_
