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

#include "splitglm/protocol/message.h"

#include <bit>
#include <cstring>

#include "splitglm/error.h"

namespace splitglm::protocol {
namespace {

class Writer {
 public:
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U16(std::uint16_t v) { Le(v, 2); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Bytes(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
  }
  std::vector<std::uint8_t>& out() { return out_; }

 private:
  void Le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t U8() { return static_cast<std::uint8_t>(Le(1)); }
  std::uint16_t U16() { return static_cast<std::uint16_t>(Le(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  double F64() { return std::bit_cast<double>(U64()); }
  void Bytes(std::span<std::uint8_t> dst) {
    Need(dst.size());
    std::memcpy(dst.data(), in_.data() + pos_, dst.size());
    pos_ += dst.size();
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      Fail(ErrorCode::kDecodeFailure, "truncated message");
    }
  }
  std::uint64_t Le(int bytes) {
    Need(bytes);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += bytes;
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void ExpectLength(std::size_t actual, std::size_t expected, MessageKind kind) {
  if (actual != expected) {
    Fail(ErrorCode::kDecodeFailure,
         std::string(MessageKindName(kind)) + " payload has length " +
             std::to_string(actual) + ", expected " + std::to_string(expected));
  }
}

Family DecodeFamily(std::uint8_t tag) {
  if (tag > static_cast<std::uint8_t>(Family::kPoisson)) {
    Fail(ErrorCode::kDecodeFailure, "unknown family tag");
  }
  return static_cast<Family>(tag);
}

}  // namespace

std::string_view MessageKindName(MessageKind kind) {
  switch (kind) {
    case MessageKind::kHello: return "HELLO";
    case MessageKind::kHelloAck: return "HELLO_ACK";
    case MessageKind::kPrediction: return "PREDICTION";
    case MessageKind::kConvergedFlag: return "CONVERGED_FLAG";
    case MessageKind::kDone: return "DONE";
    case MessageKind::kAbort: return "ABORT";
  }
  return "UNKNOWN";
}

ProtocolMessage ProtocolMessage::Hello(const HelloPayload& p) {
  return {MessageKind::kHello, 0, p};
}
ProtocolMessage ProtocolMessage::HelloAck(const HelloAckPayload& p) {
  return {MessageKind::kHelloAck, 0, p};
}
ProtocolMessage ProtocolMessage::Prediction(std::uint32_t iteration,
                                            Vector values, double max_delta) {
  return {MessageKind::kPrediction, iteration,
          PredictionPayload{std::move(values), max_delta}};
}
ProtocolMessage ProtocolMessage::Converged(std::uint32_t iteration,
                                           bool converged) {
  return {MessageKind::kConvergedFlag, iteration, ConvergedPayload{converged}};
}
ProtocolMessage ProtocolMessage::Done(std::uint32_t iteration) {
  return {MessageKind::kDone, iteration, std::monostate{}};
}
ProtocolMessage ProtocolMessage::Abort(std::uint32_t iteration,
                                       std::string reason) {
  return {MessageKind::kAbort, iteration, AbortPayload{std::move(reason)}};
}

std::vector<std::uint8_t> Encode(const ProtocolMessage& message) {
  Writer payload;
  switch (message.kind) {
    case MessageKind::kHello: {
      const auto& p = std::get<HelloPayload>(message.payload);
      payload.U16(p.version);
      payload.U8(static_cast<std::uint8_t>(p.family));
      payload.U64(p.n);
      payload.F64(p.tolerance);
      payload.U32(p.min_iterations);
      payload.Bytes(p.target_digest);
      break;
    }
    case MessageKind::kHelloAck: {
      const auto& p = std::get<HelloAckPayload>(message.payload);
      payload.U16(p.version);
      payload.U64(p.n);
      payload.U32(p.min_iterations);
      payload.U32(p.max_iterations);
      payload.Bytes(p.target_digest);
      break;
    }
    case MessageKind::kPrediction: {
      const auto& p = std::get<PredictionPayload>(message.payload);
      payload.out().reserve(8 * (p.values.size() + 1));
      for (Eigen::Index i = 0; i < p.values.size(); ++i) {
        payload.F64(p.values[i]);
      }
      payload.F64(p.max_delta);
      break;
    }
    case MessageKind::kConvergedFlag:
      payload.U8(std::get<ConvergedPayload>(message.payload).converged ? 1 : 0);
      break;
    case MessageKind::kDone:
      break;
    case MessageKind::kAbort: {
      const auto& reason = std::get<AbortPayload>(message.payload).reason;
      payload.Bytes(std::span(
          reinterpret_cast<const std::uint8_t*>(reason.data()), reason.size()));
      break;
    }
  }
  Writer out;
  out.out().reserve(kMessageHeaderBytes + payload.out().size());
  out.U8(static_cast<std::uint8_t>(message.kind));
  out.U32(message.iteration);
  out.U32(static_cast<std::uint32_t>(payload.out().size()));
  out.Bytes(payload.out());
  return std::move(out.out());
}

ProtocolMessage Decode(std::span<const std::uint8_t> bytes) {
  Reader header(bytes);
  const std::uint8_t kind_tag = header.U8();
  if (kind_tag < 1 || kind_tag > 6) {
    Fail(ErrorCode::kDecodeFailure, "unknown message kind " +
                                        std::to_string(kind_tag));
  }
  ProtocolMessage message;
  message.kind = static_cast<MessageKind>(kind_tag);
  message.iteration = header.U32();
  const std::uint32_t length = header.U32();
  ExpectLength(header.remaining(), length, message.kind);
  Reader r(bytes.subspan(kMessageHeaderBytes));

  switch (message.kind) {
    case MessageKind::kHello: {
      ExpectLength(length, kHelloPayloadBytes, message.kind);
      HelloPayload p;
      p.version = r.U16();
      p.family = DecodeFamily(r.U8());
      p.n = r.U64();
      p.tolerance = r.F64();
      p.min_iterations = r.U32();
      r.Bytes(p.target_digest);
      message.payload = p;
      break;
    }
    case MessageKind::kHelloAck: {
      ExpectLength(length, kHelloAckPayloadBytes, message.kind);
      HelloAckPayload p;
      p.version = r.U16();
      p.n = r.U64();
      p.min_iterations = r.U32();
      p.max_iterations = r.U32();
      r.Bytes(p.target_digest);
      message.payload = p;
      break;
    }
    case MessageKind::kPrediction: {
      if (length < 8 || length % 8 != 0) {
        Fail(ErrorCode::kDecodeFailure, "PREDICTION payload not a multiple of 8");
      }
      PredictionPayload p;
      p.values.resize(length / 8 - 1);
      for (Eigen::Index i = 0; i < p.values.size(); ++i) p.values[i] = r.F64();
      p.max_delta = r.F64();
      message.payload = std::move(p);
      break;
    }
    case MessageKind::kConvergedFlag: {
      ExpectLength(length, 1, message.kind);
      const std::uint8_t flag = r.U8();
      if (flag > 1) Fail(ErrorCode::kDecodeFailure, "bad convergence flag");
      message.payload = ConvergedPayload{flag == 1};
      break;
    }
    case MessageKind::kDone:
      ExpectLength(length, 0, message.kind);
      message.payload = std::monostate{};
      break;
    case MessageKind::kAbort: {
      std::string reason(length, '\0');
      r.Bytes(std::span(reinterpret_cast<std::uint8_t*>(reason.data()),
                        reason.size()));
      message.payload = AbortPayload{std::move(reason)};
      break;
    }
  }
  return message;
}

}  // namespace splitglm::protocol
