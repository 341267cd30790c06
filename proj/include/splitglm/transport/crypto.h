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

#ifndef SPLITGLM_TRANSPORT_CRYPTO_H_
#define SPLITGLM_TRANSPORT_CRYPTO_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace splitglm::transport {

inline constexpr std::size_t kKeyBytes = 32;
inline constexpr std::size_t kSessionIdBytes = 16;
inline constexpr std::size_t kNonceBytes = 12;
inline constexpr std::size_t kTagBytes = 16;

using Key = std::array<std::uint8_t, kKeyBytes>;
using SessionId = std::array<std::uint8_t, kSessionIdBytes>;
using Digest = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, kNonceBytes>;

// Initializes libsodium once; safe to call from any thread.
void EnsureSodium();

enum class Direction : std::uint8_t { kInitiatorToResponder = 1, kResponderToInitiator = 2 };

// Keyed BLAKE2b-256(psk; "splitglm/v1/key" || session_id || direction).
Key DeriveDirectionKey(const Key& psk, const SessionId& session_id,
                       Direction direction);

Digest Sha256(std::span<const std::uint8_t> data);

SessionId RandomSessionId();

// 4 zero bytes followed by the little-endian 64-bit counter.
Nonce CounterNonce(std::uint64_t counter);

// ChaCha20-Poly1305 (IETF) seal/open. Open returns false when authentication
// fails.
std::vector<std::uint8_t> Seal(const Key& key, const Nonce& nonce,
                               std::span<const std::uint8_t> aad,
                               std::span<const std::uint8_t> plaintext);
bool Open(const Key& key, const Nonce& nonce, std::span<const std::uint8_t> aad,
          std::span<const std::uint8_t> ciphertext,
          std::vector<std::uint8_t>& plaintext);

std::string ToHex(std::span<const std::uint8_t> bytes);
// Exactly 64 hex characters (surrounding whitespace ignored).
Key ParseHexKey(std::string_view hex);
SessionId ParseHexSessionId(std::string_view hex);

}  // namespace splitglm::transport

#endif  // SPLITGLM_TRANSPORT_CRYPTO_H_
