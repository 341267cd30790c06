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

#ifndef SPLITGLM_PROTOCOL_SESSION_H_
#define SPLITGLM_PROTOCOL_SESSION_H_

#include <cstdint>
#include <optional>
#include <string>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"
#include "splitglm/protocol/message.h"
#include "splitglm/stderr/standard_errors.h"
#include "splitglm/transport/secure_channel.h"

namespace splitglm::protocol {

using stderr_recovery::IterationTrace;

struct SessionConfig {
  FamilySpec family = FamilySpec::Gaussian();
  double tolerance = 1e-8;
  int max_iterations = 10000;
  // Private floor requested by this party; unset means P_local + 5.
  std::optional<int> min_iterations;
  transport::Key psk{};
  double noise_sd = 0.0;
  transport::SessionId session_id{};
  std::uint64_t noise_seed = 0;
  bool compute_standard_errors = true;

  void Validate() const;
  int MinIterationsFor(Eigen::Index p_local) const;
};

struct AgreedParameters {
  std::uint16_t version = kProtocolVersion;
  std::uint64_t n = 0;
  FamilySpec family = FamilySpec::Gaussian();
  double tolerance = 0.0;
  int min_iterations = 0;
  int max_iterations = 0;
};

// Canonical target serialization: N as u64 LE, then each value as binary64 LE.
transport::Digest TargetDigest(const TargetVector& y);

// Initiator sends HELLO, responder answers HELLO_ACK or ABORT. Differing
// targets raise DigestMismatch on both sides; differing family raises
// ConfigMismatch; differing protocol version raises VersionMismatch.
AgreedParameters Handshake(const SessionConfig& cfg, const TargetVector& y,
                           int local_min_iterations, PartyRole role,
                           transport::SecureChannel& channel);

struct FitResult {
  Vector local_coefficients;
  Vector local_standard_errors;  // NaN when recovery failed, see se_note
  int iterations_used = 0;
  bool converged = false;
  Vector final_partner_prediction;
  Vector own_prediction;
  int active_sweeps = 0;
  double own_delta = 0.0;
  double partner_delta = 0.0;
  double sigma2 = 1.0;
  Eigen::Index estimated_partner_rank = 0;
  std::string se_note;
  AgreedParameters agreed;

  Vector CombinedLinearPredictor() const {
    return own_prediction + final_partner_prediction;
  }
};

struct PartyOutcome {
  FitResult result;
  IterationTrace trace;
};

// Confirms keys, runs the handshake and the alternating block updates.
// Reaching max_iterations is not an error: converged is false.
PartyOutcome RunParty(const DesignBlock& block, const TargetVector& y,
                      const SessionConfig& cfg, PartyRole role,
                      transport::SecureChannel& channel);

// mean(X_local beta_local + partner share).
Vector PredictJoint(const FitResult& local, const DesignBlock& block,
                    const Vector& partner_prediction, const FamilySpec& family);

struct TwoPartyOutcome {
  PartyOutcome initiator;
  PartyOutcome responder;
  double wall_seconds = 0.0;
};

// Both parties in one process over a loopback channel, the responder on its
// own thread. `tap` sees every frame on the initiator's endpoint.
TwoPartyOutcome SimulateTwoParty(const DesignBlock& initiator_block,
                                 const DesignBlock& responder_block,
                                 const TargetVector& y,
                                 const SessionConfig& initiator_cfg,
                                 const SessionConfig& responder_cfg,
                                 transport::FrameObserver tap = nullptr,
                                 transport::MessageObserver message_tap = nullptr);

}  // namespace splitglm::protocol

#endif  // SPLITGLM_PROTOCOL_SESSION_H_
