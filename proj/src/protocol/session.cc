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

#include "splitglm/protocol/session.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "splitglm/bcd/descent.h"
#include "splitglm/core/least_squares.h"
#include "splitglm/error.h"

namespace splitglm::protocol {
namespace {

using transport::SecureChannel;

// Codes that a peer may report in an ABORT during the handshake and that we
// re-raise locally so both sides fail the same way.
constexpr ErrorCode kMirroredCodes[] = {
    ErrorCode::kDigestMismatch, ErrorCode::kVersionMismatch,
    ErrorCode::kConfigMismatch};

[[noreturn]] void RaiseFromAbort(const ProtocolMessage& message) {
  const std::string& reason = std::get<AbortPayload>(message.payload).reason;
  for (ErrorCode code : kMirroredCodes) {
    const std::string prefix = std::string(ErrorCodeName(code)) + ": ";
    if (reason.rfind(prefix, 0) == 0) {
      Fail(code, "peer reported: " + reason.substr(prefix.size()));
    }
  }
  Fail(ErrorCode::kPeerAbort, reason);
}

void TrySendAbort(SecureChannel& channel, std::uint32_t iteration,
                  const std::string& reason) {
  try {
    channel.Send(ProtocolMessage::Abort(iteration, reason));
  } catch (const Error&) {
  }
}

[[noreturn]] void AbortAndFail(SecureChannel& channel, std::uint32_t iteration,
                               ErrorCode code, const std::string& message) {
  const Error error(code, message);
  TrySendAbort(channel, iteration, error.what());
  throw error;
}

ProtocolMessage Expect(SecureChannel& channel, MessageKind kind,
                       std::uint32_t iteration, bool& peer_aborted) {
  ProtocolMessage message = channel.Receive();
  if (message.kind == MessageKind::kAbort) {
    peer_aborted = true;
    RaiseFromAbort(message);
  }
  if (message.kind != kind || message.iteration != iteration) {
    Fail(ErrorCode::kProtocolViolation,
         "expected " + std::string(MessageKindName(kind)) + " #" +
             std::to_string(iteration) + ", got " +
             std::string(MessageKindName(message.kind)) + " #" +
             std::to_string(message.iteration));
  }
  return message;
}

const PredictionPayload& CheckPrediction(const ProtocolMessage& message,
                                         std::uint64_t n) {
  const auto& p = std::get<PredictionPayload>(message.payload);
  if (static_cast<std::uint64_t>(p.values.size()) != n) {
    Fail(ErrorCode::kProtocolViolation,
         "prediction has length " + std::to_string(p.values.size()) +
             ", agreed N is " + std::to_string(n));
  }
  if (!p.values.allFinite() || std::isnan(p.max_delta)) {
    Fail(ErrorCode::kProtocolViolation, "prediction contains non-finite values");
  }
  return p;
}

class Noise {
 public:
  Noise(double sd, std::uint64_t seed) : sd_(sd), rng_(seed) {}
  Vector Apply(const Vector& v) {
    if (sd_ == 0.0) return v;
    std::normal_distribution<double> draw(0.0, sd_);
    Vector out = v;
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += draw(rng_);
    return out;
  }

 private:
  double sd_;
  std::mt19937_64 rng_;
};

double MaxAbsChange(const Vector& next, const Vector& prev) {
  return next.size() == 0 ? 0.0 : (next - prev).cwiseAbs().maxCoeff();
}

}  // namespace

void SessionConfig::Validate() const {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    Fail(ErrorCode::kInvalidArgument, "tolerance must be positive");
  }
  if (max_iterations < 1) {
    Fail(ErrorCode::kInvalidArgument, "max_iterations must be at least 1");
  }
  if (min_iterations &&
      (*min_iterations < 0 || *min_iterations > max_iterations)) {
    Fail(ErrorCode::kInvalidArgument,
         "need 0 <= min_iterations <= max_iterations");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    Fail(ErrorCode::kInvalidArgument, "noise_sd must be finite and >= 0");
  }
}

int SessionConfig::MinIterationsFor(Eigen::Index p_local) const {
  if (min_iterations) return *min_iterations;
  return static_cast<int>(
      std::min<Eigen::Index>(p_local + 5, max_iterations));
}

transport::Digest TargetDigest(const TargetVector& y) {
  const std::uint64_t n = static_cast<std::uint64_t>(y.size());
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 * (n + 1));
  auto put = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(n);
  for (Eigen::Index i = 0; i < y.values().size(); ++i) {
    put(std::bit_cast<std::uint64_t>(y.values()[i]));
  }
  return transport::Sha256(bytes);
}

AgreedParameters Handshake(const SessionConfig& cfg, const TargetVector& y,
                           int local_min_iterations, PartyRole role,
                           SecureChannel& channel) {
  const transport::Digest digest = TargetDigest(y);
  const std::uint64_t n = static_cast<std::uint64_t>(y.size());
  AgreedParameters agreed;
  agreed.n = n;
  bool peer_aborted = false;

  if (role == PartyRole::kInitiator) {
    HelloPayload hello;
    hello.family = cfg.family.family();
    hello.n = n;
    hello.tolerance = cfg.tolerance;
    hello.min_iterations = static_cast<std::uint32_t>(local_min_iterations);
    hello.target_digest = digest;
    channel.Send(ProtocolMessage::Hello(hello));
    ProtocolMessage reply;
    try {
      reply = Expect(channel, MessageKind::kHelloAck, 0, peer_aborted);
    } catch (const Error& e) {
      if (!peer_aborted && e.code() == ErrorCode::kProtocolViolation) {
        TrySendAbort(channel, 0, e.what());
      }
      throw;
    }
    const auto& ack = std::get<HelloAckPayload>(reply.payload);
    if (ack.version != kProtocolVersion) {
      AbortAndFail(channel, 0, ErrorCode::kVersionMismatch,
                   "peer speaks protocol version " + std::to_string(ack.version));
    }
    if (ack.n != n || ack.target_digest != digest) {
      AbortAndFail(channel, 0, ErrorCode::kDigestMismatch,
                   "target vectors differ between parties");
    }
    if (ack.min_iterations < static_cast<std::uint32_t>(local_min_iterations) ||
        ack.max_iterations < 1) {
      AbortAndFail(channel, 0, ErrorCode::kProtocolViolation,
                   "HELLO_ACK iteration bounds are inconsistent");
    }
    agreed.family = cfg.family;
    agreed.tolerance = cfg.tolerance;
    agreed.max_iterations = static_cast<int>(
        std::min<std::uint32_t>(ack.max_iterations, cfg.max_iterations));
    agreed.min_iterations = static_cast<int>(std::min<std::uint32_t>(
        ack.min_iterations, static_cast<std::uint32_t>(agreed.max_iterations)));
    return agreed;
  }

  ProtocolMessage first;
  try {
    first = Expect(channel, MessageKind::kHello, 0, peer_aborted);
  } catch (const Error& e) {
    if (!peer_aborted && e.code() == ErrorCode::kProtocolViolation) {
      TrySendAbort(channel, 0, e.what());
    }
    throw;
  }
  const auto& hello = std::get<HelloPayload>(first.payload);
  if (hello.version != kProtocolVersion) {
    AbortAndFail(channel, 0, ErrorCode::kVersionMismatch,
                 "peer speaks protocol version " + std::to_string(hello.version));
  }
  if (hello.family != cfg.family.family()) {
    AbortAndFail(channel, 0, ErrorCode::kConfigMismatch,
                 "family differs: initiator uses " +
                     std::string(FamilySpec::FromFamily(hello.family).name()) +
                     ", responder uses " + std::string(cfg.family.name()));
  }
  if (hello.n != n || hello.target_digest != digest) {
    AbortAndFail(channel, 0, ErrorCode::kDigestMismatch,
                 "target vectors differ between parties");
  }
  if (!(hello.tolerance > 0.0) || !std::isfinite(hello.tolerance)) {
    AbortAndFail(channel, 0, ErrorCode::kProtocolViolation,
                 "initiator sent an invalid tolerance");
  }
  agreed.family = cfg.family;
  agreed.tolerance = hello.tolerance;
  agreed.max_iterations = cfg.max_iterations;
  agreed.min_iterations = static_cast<int>(std::min<std::uint32_t>(
      std::max<std::uint32_t>(hello.min_iterations, local_min_iterations),
      static_cast<std::uint32_t>(cfg.max_iterations)));

  HelloAckPayload ack;
  ack.n = n;
  ack.min_iterations = static_cast<std::uint32_t>(
      std::max<std::uint32_t>(hello.min_iterations, local_min_iterations));
  ack.max_iterations = static_cast<std::uint32_t>(cfg.max_iterations);
  ack.target_digest = digest;
  channel.Send(ProtocolMessage::HelloAck(ack));
  return agreed;
}

PartyOutcome RunParty(const DesignBlock& block, const TargetVector& y,
                      const SessionConfig& cfg, PartyRole role,
                      SecureChannel& channel) {
  cfg.Validate();
  if (block.rows() != y.size()) {
    Fail(ErrorCode::kShapeMismatch, "block and target differ in N");
  }
  if (!(y.family() == cfg.family)) {
    Fail(ErrorCode::kInvalidArgument, "target family differs from session family");
  }
  channel.ConfirmKeys();
  const AgreedParameters agreed = Handshake(
      cfg, y, cfg.MinIterationsFor(block.cols()), role, channel);

  const FamilySpec& family = agreed.family;
  const double tol = agreed.tolerance;
  const Eigen::Index n = block.rows();
  const BlockSolver solver(block.values());
  Noise noise(cfg.noise_sd, cfg.noise_seed);
  stderr_recovery::TraceRecorder recorder;
  std::vector<double> round_deltas;

  Vector beta = Vector::Zero(block.cols());
  Vector own = Vector::Zero(n);
  Vector partner = Vector::Zero(n);
  double own_delta = std::numeric_limits<double>::infinity();
  double partner_delta = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  bool peer_aborted = false;
  std::uint32_t at = 0;

  try {
    if (role == PartyRole::kInitiator) {
      for (int r = 1;; ++r) {
        at = static_cast<std::uint32_t>(r);
        bcd::BlockUpdate update =
            bcd::UpdateBlock(solver, family, y, own, partner);
        own_delta = MaxAbsChange(update.coefficients, beta);
        beta = std::move(update.coefficients);
        own = std::move(update.prediction);
        const Vector sent = noise.Apply(own);
        // What the partner will project this round, as far as we can tell.
        Vector partner_input =
            bcd::BlockWorkingResidual(family, y, partner, sent).residual;
        channel.Send(ProtocolMessage::Prediction(at, sent, own_delta));

        const ProtocolMessage reply =
            Expect(channel, MessageKind::kPrediction, at, peer_aborted);
        const PredictionPayload& p = CheckPrediction(reply, agreed.n);
        partner = p.values;
        partner_delta = p.max_delta;
        recorder.Record(sent, partner_input, partner);
        round_deltas.push_back(std::max(own_delta, partner_delta));

        const bool done =
            own_delta < tol && partner_delta < tol && r >= agreed.min_iterations;
        if (done || r >= agreed.max_iterations) {
          converged = done;
          iterations = r;
          at = static_cast<std::uint32_t>(r + 1);
          channel.Send(ProtocolMessage::Converged(at, converged));
          Expect(channel, MessageKind::kDone, at, peer_aborted);
          break;
        }
      }
    } else {
      Vector partner_prev_own = Vector::Zero(n);
      Vector sent_prev = Vector::Zero(n);
      for (int r = 1;; ++r) {
        at = static_cast<std::uint32_t>(r);
        const ProtocolMessage message = channel.Receive();
        if (message.kind == MessageKind::kAbort) {
          peer_aborted = true;
          RaiseFromAbort(message);
        }
        if (message.kind == MessageKind::kConvergedFlag && message.iteration == at &&
            r > 1) {
          const bool flag = std::get<ConvergedPayload>(message.payload).converged;
          if (flag && !(own_delta < tol && partner_delta < tol)) {
            Fail(ErrorCode::kProtocolViolation,
                 "peer claimed convergence while a delta is above tolerance");
          }
          converged = flag;
          iterations = r - 1;
          channel.Send(ProtocolMessage::Done(at));
          break;
        }
        if (message.kind != MessageKind::kPrediction || message.iteration != at) {
          Fail(ErrorCode::kProtocolViolation,
               "expected PREDICTION #" + std::to_string(r) + ", got " +
                   std::string(MessageKindName(message.kind)) + " #" +
                   std::to_string(message.iteration));
        }
        if (r > agreed.max_iterations) {
          Fail(ErrorCode::kProtocolViolation,
               "peer exceeded the agreed iteration cap");
        }
        const PredictionPayload& p = CheckPrediction(message, agreed.n);
        Vector partner_input =
            bcd::BlockWorkingResidual(family, y, partner_prev_own, sent_prev)
                .residual;
        partner = p.values;
        partner_delta = p.max_delta;

        bcd::BlockUpdate update =
            bcd::UpdateBlock(solver, family, y, own, partner);
        own_delta = MaxAbsChange(update.coefficients, beta);
        beta = std::move(update.coefficients);
        own = std::move(update.prediction);
        Vector sent = noise.Apply(own);
        channel.Send(ProtocolMessage::Prediction(at, sent, own_delta));

        recorder.Record(sent, partner_input, partner);
        round_deltas.push_back(std::max(own_delta, partner_delta));
        partner_prev_own = partner;
        sent_prev = std::move(sent);
      }
    }
  } catch (const Error& e) {
    const ErrorCode code = e.code();
    if (!peer_aborted && code != ErrorCode::kTransportFailure &&
        code != ErrorCode::kAuthFailure) {
      TrySendAbort(channel, at, e.what());
    }
    throw;
  }

  PartyOutcome out;
  FitResult& result = out.result;
  result.agreed = agreed;
  result.local_coefficients = beta;
  result.iterations_used = iterations;
  result.converged = converged;
  result.own_prediction = own;
  result.final_partner_prediction = partner;
  result.own_delta = own_delta;
  result.partner_delta = partner_delta;
  result.active_sweeps = static_cast<int>(round_deltas.size());
  for (std::size_t i = 0; i < round_deltas.size(); ++i) {
    if (round_deltas[i] < tol) {
      result.active_sweeps = static_cast<int>(i);
      break;
    }
  }
  const Vector eta = own + partner;
  out.trace = recorder.Finish(WorkingWeights(family, eta));

  result.local_standard_errors =
      Vector::Constant(block.cols(), std::numeric_limits<double>::quiet_NaN());
  if (cfg.compute_standard_errors) {
    try {
      const auto recovered =
          stderr_recovery::RecoverStandardErrors(block, out.trace, y, eta);
      result.local_standard_errors = recovered.covariance.standard_errors;
      result.sigma2 = recovered.covariance.sigma2;
      result.estimated_partner_rank =
          recovered.substitute.estimated_partner_rank;
      if (recovered.substitute.saturated) {
        result.se_note =
            "partner rank estimate (" +
            std::to_string(result.estimated_partner_rank) +
            ") equals the trace rank; the partner may hold more columns than "
            "the trace reveals";
      }
    } catch (const Error& e) {
      result.se_note = e.what();
    }
  } else {
    result.se_note = "standard errors not requested";
  }
  return out;
}

Vector PredictJoint(const FitResult& local, const DesignBlock& block,
                    const Vector& partner_prediction, const FamilySpec& family) {
  if (block.cols() != local.local_coefficients.size() ||
      partner_prediction.size() != block.rows()) {
    Fail(ErrorCode::kShapeMismatch, "joint prediction inputs disagree in shape");
  }
  const Vector eta = block.values() * local.local_coefficients + partner_prediction;
  return eta.unaryExpr([&](double v) { return family.Mean(v); });
}

TwoPartyOutcome SimulateTwoParty(const DesignBlock& initiator_block,
                                 const DesignBlock& responder_block,
                                 const TargetVector& y,
                                 const SessionConfig& initiator_cfg,
                                 const SessionConfig& responder_cfg,
                                 transport::FrameObserver tap,
                                 transport::MessageObserver message_tap) {
  auto [a, b] = transport::OpenLoopbackChannels(
      initiator_cfg.psk, responder_cfg.psk, initiator_cfg.session_id,
      std::move(tap));
  if (message_tap) a->set_observer(std::move(message_tap));

  TwoPartyOutcome out;
  std::exception_ptr initiator_error;
  std::exception_ptr responder_error;
  const auto start = std::chrono::steady_clock::now();
  std::thread responder([&, channel = b.get()] {
    try {
      out.responder = RunParty(responder_block, y, responder_cfg,
                               PartyRole::kResponder, *channel);
    } catch (...) {
      responder_error = std::current_exception();
      channel->Close();
    }
  });
  try {
    out.initiator = RunParty(initiator_block, y, initiator_cfg,
                             PartyRole::kInitiator, *a);
  } catch (...) {
    initiator_error = std::current_exception();
    a->Close();
  }
  responder.join();
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  // Prefer the error that explains the failure over the transport fallout.
  auto is_fallout = [](const std::exception_ptr& p) {
    try {
      std::rethrow_exception(p);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kTransportFailure ||
             e.code() == ErrorCode::kPeerAbort;
    } catch (...) {
      return false;
    }
  };
  if (initiator_error && responder_error && is_fallout(initiator_error) &&
      !is_fallout(responder_error)) {
    std::rethrow_exception(responder_error);
  }
  if (initiator_error) std::rethrow_exception(initiator_error);
  if (responder_error) std::rethrow_exception(responder_error);
  return out;
}

}  // namespace splitglm::protocol
