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

#ifndef SPLITGLM_TRANSPORT_SECURE_CHANNEL_H_
#define SPLITGLM_TRANSPORT_SECURE_CHANNEL_H_

#include <functional>
#include <memory>
#include <utility>

#include "splitglm/protocol/message.h"
#include "splitglm/transport/crypto.h"
#include "splitglm/transport/link.h"

namespace splitglm::transport {

using protocol::PartyRole;
using protocol::ProtocolMessage;

// Sees every message in plaintext, after encoding (outgoing) or before
// decoding (incoming).
using MessageObserver = std::function<void(
    bool outgoing, const ProtocolMessage& message,
    std::span<const std::uint8_t> encoded)>;

// AEAD channel over a FrameLink. Each direction has its own key and a counter
// nonce starting at zero; the receiver accepts only the next counter.
class SecureChannel {
 public:
  SecureChannel(std::unique_ptr<FrameLink> link, const Key& psk,
                const SessionId& session_id, PartyRole role);
  ~SecureChannel();
  SecureChannel(const SecureChannel&) = delete;
  SecureChannel& operator=(const SecureChannel&) = delete;

  void Send(const ProtocolMessage& message);
  // AuthFailure on a forged, tampered, replayed or reordered frame;
  // DecodeFailure on malformed plaintext; TransportFailure on close.
  ProtocolMessage Receive();

  // Both sides send an encrypted confirmation and check the peer's. A psk
  // mismatch surfaces here as AuthFailure before any protocol message.
  void ConfirmKeys();

  void Close();
  void set_observer(MessageObserver observer) { observer_ = std::move(observer); }

  PartyRole role() const { return role_; }
  const SessionId& session_id() const { return session_id_; }

  // Builds the frame the channel would send next; exposed for tests.
  Bytes SealFrame(std::span<const std::uint8_t> plaintext);

 private:
  Bytes OpenFrame(const Bytes& frame);

  std::unique_ptr<FrameLink> link_;
  SessionId session_id_;
  PartyRole role_;
  Key send_key_;
  Key receive_key_;
  std::uint64_t send_counter_ = 0;
  std::uint64_t receive_counter_ = 0;
  MessageObserver observer_;
};

std::pair<std::unique_ptr<SecureChannel>, std::unique_ptr<SecureChannel>>
OpenLoopbackChannels(const Key& initiator_psk, const Key& responder_psk,
                     const SessionId& session_id,
                     FrameObserver initiator_tap = nullptr);

}  // namespace splitglm::transport

#endif  // SPLITGLM_TRANSPORT_SECURE_CHANNEL_H_
