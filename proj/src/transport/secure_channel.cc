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

#include "splitglm/transport/secure_channel.h"

#include <string_view>

#include "splitglm/error.h"

namespace splitglm::transport {
namespace {

constexpr std::string_view kConfirmLabel = "splitglm-key-confirm-v1";

Bytes ConfirmationPlaintext(PartyRole sender) {
  Bytes out(kConfirmLabel.begin(), kConfirmLabel.end());
  out.push_back(static_cast<std::uint8_t>(sender));
  return out;
}

}  // namespace

SecureChannel::SecureChannel(std::unique_ptr<FrameLink> link, const Key& psk,
                             const SessionId& session_id, PartyRole role)
    : link_(std::move(link)), session_id_(session_id), role_(role) {
  const bool initiator = role == PartyRole::kInitiator;
  send_key_ = DeriveDirectionKey(psk, session_id,
                                 initiator ? Direction::kInitiatorToResponder
                                           : Direction::kResponderToInitiator);
  receive_key_ = DeriveDirectionKey(
      psk, session_id,
      initiator ? Direction::kResponderToInitiator
                : Direction::kInitiatorToResponder);
}

SecureChannel::~SecureChannel() {
  if (link_) link_->Close();
}

Bytes SecureChannel::SealFrame(std::span<const std::uint8_t> plaintext) {
  const Nonce nonce = CounterNonce(send_counter_++);
  const std::size_t ct_len = plaintext.size() + kTagBytes;
  if (ct_len > kMaxCiphertextBytes) {
    Fail(ErrorCode::kInvalidArgument, "message too large for one frame");
  }
  Bytes frame(nonce.begin(), nonce.end());
  for (int i = 0; i < 4; ++i) {
    frame.push_back(static_cast<std::uint8_t>(ct_len >> (8 * i)));
  }
  const Bytes ct = Seal(send_key_, nonce,
                        std::span(frame.data(), kFrameHeaderBytes), plaintext);
  frame.insert(frame.end(), ct.begin(), ct.end());
  return frame;
}

Bytes SecureChannel::OpenFrame(const Bytes& frame) {
  if (frame.size() < kFrameHeaderBytes + kTagBytes) {
    link_->Close();
    Fail(ErrorCode::kAuthFailure, "short frame");
  }
  std::uint32_t length = 0;
  for (int i = 0; i < 4; ++i) {
    length |= static_cast<std::uint32_t>(frame[kNonceBytes + i]) << (8 * i);
  }
  Nonce nonce{};
  std::copy_n(frame.begin(), kNonceBytes, nonce.begin());
  if (length != frame.size() - kFrameHeaderBytes ||
      nonce != CounterNonce(receive_counter_)) {
    link_->Close();
    Fail(ErrorCode::kAuthFailure, "unexpected frame nonce or length");
  }
  Bytes plaintext;
  if (!Open(receive_key_, nonce, std::span(frame.data(), kFrameHeaderBytes),
            std::span(frame).subspan(kFrameHeaderBytes), plaintext)) {
    link_->Close();
    Fail(ErrorCode::kAuthFailure, "frame failed authentication");
  }
  ++receive_counter_;
  return plaintext;
}

void SecureChannel::Send(const ProtocolMessage& message) {
  const Bytes plaintext = protocol::Encode(message);
  if (observer_) observer_(true, message, plaintext);
  link_->Send(SealFrame(plaintext));
}

ProtocolMessage SecureChannel::Receive() {
  const Bytes plaintext = OpenFrame(link_->Receive());
  ProtocolMessage message = protocol::Decode(plaintext);
  if (observer_) observer_(false, message, plaintext);
  return message;
}

void SecureChannel::ConfirmKeys() {
  link_->Send(SealFrame(ConfirmationPlaintext(role_)));
  const PartyRole peer = role_ == PartyRole::kInitiator
                             ? PartyRole::kResponder
                             : PartyRole::kInitiator;
  if (OpenFrame(link_->Receive()) != ConfirmationPlaintext(peer)) {
    link_->Close();
    Fail(ErrorCode::kAuthFailure, "bad key confirmation");
  }
}

void SecureChannel::Close() { link_->Close(); }

std::pair<std::unique_ptr<SecureChannel>, std::unique_ptr<SecureChannel>>
OpenLoopbackChannels(const Key& initiator_psk, const Key& responder_psk,
                     const SessionId& session_id, FrameObserver initiator_tap) {
  auto [a, b] = MakeLoopbackPair();
  if (initiator_tap) a = Tap(std::move(a), std::move(initiator_tap));
  return {std::make_unique<SecureChannel>(std::move(a), initiator_psk,
                                          session_id, PartyRole::kInitiator),
          std::make_unique<SecureChannel>(std::move(b), responder_psk,
                                          session_id, PartyRole::kResponder)};
}

}  // namespace splitglm::transport
