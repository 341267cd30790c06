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

#ifndef SPLITGLM_TRANSPORT_LINK_H_
#define SPLITGLM_TRANSPORT_LINK_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splitglm/transport/crypto.h"

namespace splitglm::transport {

// nonce[12] | ciphertext length u32 LE | ciphertext
inline constexpr std::size_t kFrameHeaderBytes = kNonceBytes + 4;
inline constexpr std::uint32_t kMaxCiphertextBytes = 256u << 20;

using Bytes = std::vector<std::uint8_t>;

// Moves whole serialized frames between two endpoints. One sender and one
// receiver may use a link concurrently.
class FrameLink {
 public:
  virtual ~FrameLink() = default;
  virtual void Send(Bytes frame) = 0;
  // Blocks until a frame arrives. Throws TransportFailure once the link is
  // closed from either side and no frame is pending.
  virtual Bytes Receive() = 0;
  virtual void Close() = 0;
};

std::pair<std::unique_ptr<FrameLink>, std::unique_ptr<FrameLink>>
MakeLoopbackPair();

// Sees every frame that crosses the wrapped link. `outgoing` is from the
// point of view of the wrapped endpoint.
using FrameObserver =
    std::function<void(bool outgoing, std::span<const std::uint8_t> frame)>;

std::unique_ptr<FrameLink> Tap(std::unique_ptr<FrameLink> inner,
                               FrameObserver observer);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

Endpoint ParseEndpoint(const std::string& text);

class TcpListener {
 public:
  explicit TcpListener(const Endpoint& bind_to);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Waits for one peer and reads its session preamble.
  std::pair<std::unique_ptr<FrameLink>, SessionId> Accept(
      std::chrono::milliseconds timeout);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Connects (retrying until `timeout`) and writes the session preamble.
std::unique_ptr<FrameLink> TcpConnect(const Endpoint& peer,
                                      const SessionId& session_id,
                                      std::chrono::milliseconds timeout);

// Receive timeout applied to accepted and connected TCP links.
inline constexpr std::chrono::seconds kTcpIdleTimeout{600};

}  // namespace splitglm::transport

#endif  // SPLITGLM_TRANSPORT_LINK_H_
