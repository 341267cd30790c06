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

#include "splitglm/stderr/standard_errors.h"

#include <Eigen/SVD>

#include "splitglm/core/least_squares.h"
#include "splitglm/error.h"

namespace splitglm::stderr_recovery {
namespace {

Matrix Stack(const std::vector<Vector>& columns) {
  if (columns.empty()) return Matrix();
  Matrix out(columns.front().size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  return out;
}

struct ThinSvd {
  Matrix u;
  Vector s;
  Matrix v;
  Eigen::Index rank = 0;
};

ThinSvd Decompose(const Matrix& a, double relative_cutoff) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV(), 0};
  if (out.s.size() > 0 && out.s[0] > 0.0) {
    const double cut = relative_cutoff * out.s[0];
    while (out.rank < out.s.size() && out.s[out.rank] > cut) ++out.rank;
  }
  return out;
}

// Ehat = U S V^T; Yhat Ehat^+ = (Yhat V_k S_k^-1) U_k^T.
HatFactor Factor(const IterationTrace& trace) {
  trace.Validate();
  if (trace.rounds() < 2) {
    Fail(ErrorCode::kRankDeficientTrace,
         "trace has " + std::to_string(trace.rounds()) +
             " rounds; at least 2 are needed");
  }
  HatFactor out;
  out.trace_rounds = trace.rounds();
  if (trace.received_predictions.isZero(0.0)) {
    // The partner contributed nothing, so the estimate is exactly zero.
    out.left.resize(trace.rows(), 0);
    out.right.resize(trace.rows(), 0);
    return out;
  }
  const ThinSvd e = Decompose(trace.received_residual_inputs, kPinvCutoff);
  if (e.rank < 2) {
    Fail(ErrorCode::kRankDeficientTrace,
         "residual inputs span " + std::to_string(e.rank) +
             " direction(s); at least 2 are needed");
  }
  out.left = trace.received_predictions * e.v.leftCols(e.rank) *
             e.s.head(e.rank).cwiseInverse().asDiagonal();
  out.right = e.u.leftCols(e.rank);
  out.trace_rank = e.rank;
  return out;
}

SubstituteBlock FromSvd(const ThinSvd& svd) {
  SubstituteBlock out;
  out.v = svd.u.leftCols(svd.rank);
  out.estimated_partner_rank = svd.rank;
  out.eigenvalues = svd.s;
  return out;
}

}  // namespace

void IterationTrace::Validate() const {
  const auto n = received_residual_inputs.rows();
  const auto r = received_residual_inputs.cols();
  if (received_predictions.rows() != n || received_predictions.cols() != r ||
      (sent_predictions.size() > 0 &&
       (sent_predictions.rows() != n || sent_predictions.cols() != r))) {
    Fail(ErrorCode::kShapeMismatch, "trace matrices disagree in shape");
  }
  if (weights_final.size() != 0 && weights_final.size() != n) {
    Fail(ErrorCode::kShapeMismatch, "final weights have the wrong length");
  }
}

void TraceRecorder::Record(const Vector& sent, const Vector& residual_input,
                           const Vector& partner_output) {
  sent_.push_back(sent);
  inputs_.push_back(residual_input);
  outputs_.push_back(partner_output);
}

IterationTrace TraceRecorder::Finish(Vector weights_final) const {
  return {Stack(sent_), Stack(inputs_), Stack(outputs_),
          std::move(weights_final)};
}

Matrix EstimateHat(const IterationTrace& trace) { return Factor(trace).Dense(); }

HatFactor EstimateHatFactored(const IterationTrace& trace) {
  return Factor(trace);
}

SubstituteBlock ExtractSubstitute(const Matrix& h) {
  if (h.rows() != h.cols()) {
    Fail(ErrorCode::kShapeMismatch, "hat estimate must be square");
  }
  return FromSvd(Decompose(h, kRankCutoff));
}

SubstituteBlock ExtractSubstitute(const HatFactor& h) {
  // right has orthonormal columns, so left carries the whole spectrum.
  if (h.left.cols() == 0) {
    SubstituteBlock empty;
    empty.v.resize(h.left.rows(), 0);
    return empty;
  }
  const ThinSvd svd = Decompose(h.left, kRankCutoff);
  if (svd.rank >= h.trace_rounds) {
    Fail(ErrorCode::kRankAmbiguous,
         "every one of the " + std::to_string(h.trace_rounds) +
             " trace rounds added a partner direction; the trace is too "
             "short or too noisy");
  }
  SubstituteBlock out = FromSvd(svd);
  out.saturated = svd.rank >= h.trace_rank;
  return out;
}

CovarianceEstimate AugmentedCovariance(const DesignBlock& own,
                                       const SubstituteBlock& sub,
                                       const TargetVector& y,
                                       const Vector& final_eta) {
  const Eigen::Index n = own.rows();
  if (sub.v.rows() != n || y.values().size() != n || final_eta.size() != n) {
    Fail(ErrorCode::kShapeMismatch, "augmented covariance inputs disagree in N");
  }
  const Eigen::Index p = own.cols() + sub.v.cols();
  CovarianceEstimate out;
  out.df = n - p;
  if (out.df <= 0) {
    Fail(ErrorCode::kDfExhausted,
         "no residual degrees of freedom (N=" + std::to_string(n) +
             ", columns=" + std::to_string(p) + ")");
  }
  Matrix z(n, p);
  z << own.values(), sub.v;
  const FamilySpec& family = y.family();
  const Vector w = WorkingWeights(family, final_eta);
  if (family.is_gaussian()) {
    out.sigma2 = (y.values() - final_eta).squaredNorm() /
                 static_cast<double>(out.df);
  }
  const Vector diag = InverseGramDiagonal(z, w);
  out.standard_errors = (out.sigma2 * diag.head(own.cols())).cwiseSqrt();
  return out;
}

RecoveredErrors RecoverStandardErrors(const DesignBlock& own,
                                      const IterationTrace& trace,
                                      const TargetVector& y,
                                      const Vector& final_eta) {
  RecoveredErrors out;
  out.substitute = ExtractSubstitute(EstimateHatFactored(trace));
  out.covariance = AugmentedCovariance(own, out.substitute, y, final_eta);
  return out;
}

}  // namespace splitglm::stderr_recovery
