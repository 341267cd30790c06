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

#ifndef SPLITGLM_STDERR_STANDARD_ERRORS_H_
#define SPLITGLM_STDERR_STANDARD_ERRORS_H_

#include <vector>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"

namespace splitglm::stderr_recovery {

// Everything one party saw during a session, one column per protocol round.
// For Alice, received_residual_inputs(:, r) = z - yhat_a^(r), the vector Bob
// projected in round r, and received_predictions(:, r) is Bob's answer.
struct IterationTrace {
  Matrix sent_predictions;
  Matrix received_residual_inputs;
  Matrix received_predictions;
  Vector weights_final;

  Eigen::Index rows() const { return received_residual_inputs.rows(); }
  Eigen::Index rounds() const { return received_residual_inputs.cols(); }
  void Validate() const;
};

// Columns appended round by round, assembled into an IterationTrace at the end.
class TraceRecorder {
 public:
  void Record(const Vector& sent, const Vector& residual_input,
              const Vector& partner_output);
  IterationTrace Finish(Vector weights_final) const;
  std::size_t rounds() const { return sent_.size(); }

 private:
  std::vector<Vector> sent_;
  std::vector<Vector> inputs_;
  std::vector<Vector> outputs_;
};

inline constexpr double kPinvCutoff = 1e-10;
inline constexpr double kRankCutoff = 1e-6;

// Dense minimum-norm estimate Yhat * Ehat^+ (N x N). Meant for small N.
Matrix EstimateHat(const IterationTrace& trace);

// The same estimate kept as left * right^T with right having orthonormal
// columns, so that memory stays O(N * R).
struct HatFactor {
  Matrix left;
  Matrix right;
  Eigen::Index trace_rounds = 0;
  Eigen::Index trace_rank = 0;  // numerical rank of the residual inputs

  Matrix Dense() const { return left * right.transpose(); }
};

// RankDeficientTrace when fewer than 2 rounds or fewer than 2 independent
// residual inputs were seen. A partner that only ever answered with exact
// zeros yields an empty factor.
HatFactor EstimateHatFactored(const IterationTrace& trace);

struct SubstituteBlock {
  Matrix v;  // N x k, orthonormal columns spanning the estimate's range
  Eigen::Index estimated_partner_rank = 0;
  Vector eigenvalues;  // singular values of the hat estimate, descending
  // Every independent trace direction carried partner signal, so the partner
  // may hold more columns than the trace can reveal.
  bool saturated = false;
};

// Range of H: left singular vectors whose singular value exceeds
// kRankCutoff * largest. An all-zero H gives an empty block.
SubstituteBlock ExtractSubstitute(const Matrix& h);
// Same for the factored estimate. Also RankAmbiguous when every trace round
// contributed a new direction, since the partner's range is then not pinned
// down by the trace.
SubstituteBlock ExtractSubstitute(const HatFactor& h);

struct CovarianceEstimate {
  Vector standard_errors;
  double sigma2 = 1.0;
  Eigen::Index df = 0;
};

// SEs for `own` from Z = [X_own, V] with Gram Z^T W Z. Gaussian: sigma2 from
// the combined residual y - eta with df N - P_own - k. Other families:
// weights at final_eta and dispersion 1.
CovarianceEstimate AugmentedCovariance(const DesignBlock& own,
                                       const SubstituteBlock& sub,
                                       const TargetVector& y,
                                       const Vector& final_eta);

// EstimateHatFactored -> ExtractSubstitute -> AugmentedCovariance.
struct RecoveredErrors {
  CovarianceEstimate covariance;
  SubstituteBlock substitute;
};

RecoveredErrors RecoverStandardErrors(const DesignBlock& own,
                                      const IterationTrace& trace,
                                      const TargetVector& y,
                                      const Vector& final_eta);

}  // namespace splitglm::stderr_recovery

#endif  // SPLITGLM_STDERR_STANDARD_ERRORS_H_
