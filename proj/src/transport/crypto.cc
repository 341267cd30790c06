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

#include "splitglm/transport/crypto.h"

#include <sodium.h>

#include <cctype>
#include <mutex>

#include "splitglm/error.h"

namespace splitglm::transport {
namespace {

constexpr char kKdfLabel[] = "splitglm/v1/key";

template <std::size_t N>
std::array<std::uint8_t, N> ParseHexFixed(std::string_view hex) {
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.front()))) {
    hex.remove_prefix(1);
  }
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) {
    hex.remove_suffix(1);
  }
  if (hex.size() != 2 * N) {
    Fail(ErrorCode::kInvalidArgument, "expected " + std::to_string(2 * N) +
                                          " hex characters, got " +
                                          std::to_string(hex.size()));
  }
  std::array<std::uint8_t, N> out{};
  std::size_t written = 0;
  if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr,
                     &written, nullptr) != 0 ||
      written != N) {
    Fail(ErrorCode::kInvalidArgument, "malformed hex string");
  }
  return out;
}

}  // namespace

void EnsureSodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) {
      Fail(ErrorCode::kIoError, "libsodium initialization failed");
    }
  });
}

Key DeriveDirectionKey(const Key& psk, const SessionId& session_id,
                       Direction direction) {
  EnsureSodium();
  crypto_generichash_state state;
  crypto_generichash_init(&state, psk.data(), psk.size(), kKeyBytes);
  crypto_generichash_update(&state,
                            reinterpret_cast<const unsigned char*>(kKdfLabel),
                            sizeof(kKdfLabel) - 1);
  crypto_generichash_update(&state, session_id.data(), session_id.size());
  const auto dir = static_cast<std::uint8_t>(direction);
  crypto_generichash_update(&state, &dir, 1);
  Key key{};
  crypto_generichash_final(&state, key.data(), key.size());
  return key;
}

Digest Sha256(std::span<const std::uint8_t> data) {
  EnsureSodium();
  Digest digest{};
  crypto_hash_sha256(digest.data(), data.data(), data.size());
  return digest;
}

SessionId RandomSessionId() {
  EnsureSodium();
  SessionId id{};
  randombytes_buf(id.data(), id.size());
  return id;
}

Nonce CounterNonce(std::uint64_t counter) {
  Nonce nonce{};
  for (int i = 0; i < 8; ++i) {
    nonce[4 + i] = static_cast<std::uint8_t>(counter >> (8 * i));
  }
  return nonce;
}

std::vector<std::uint8_t> Seal(const Key& key, const Nonce& nonce,
                               std::span<const std::uint8_t> aad,
                               std::span<const std::uint8_t> plaintext) {
  EnsureSodium();
  std::vector<std::uint8_t> out(plaintext.size() + kTagBytes);
  unsigned long long out_len = 0;
  crypto_aead_chacha20poly1305_ietf_encrypt(
      out.data(), &out_len, plaintext.data(), plaintext.size(), aad.data(),
      aad.size(), nullptr, nonce.data(), key.data());
  out.resize(out_len);
  return out;
}

bool Open(const Key& key, const Nonce& nonce, std::span<const std::uint8_t> aad,
          std::span<const std::uint8_t> ciphertext,
          std::vector<std::uint8_t>& plaintext) {
  EnsureSodium();
  if (ciphertext.size() < kTagBytes) return false;
  plaintext.resize(ciphertext.size() - kTagBytes);
  unsigned long long out_len = 0;
  if (crypto_aead_chacha20poly1305_ietf_decrypt(
          plaintext.data(), &out_len, nullptr, ciphertext.data(),
          ciphertext.size(), aad.data(), aad.size(), nonce.data(),
          key.data()) != 0) {
    plaintext.clear();
    return false;
  }
  plaintext.resize(out_len);
  return true;
}

std::string ToHex(std::span<const std::uint8_t> bytes) {
  std::string out(bytes.size() * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), bytes.data(), bytes.size());
  out.pop_back();
  return out;
}

Key ParseHexKey(std::string_view hex) { return ParseHexFixed<kKeyBytes>(hex); }

SessionId ParseHexSessionId(std::string_view hex) {
  return ParseHexFixed<kSessionIdBytes>(hex);
}

}  // namespace splitglm::transport
