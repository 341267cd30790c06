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

#ifndef SPLITGLM_ATTACK_RECONSTRUCTION_H_
#define SPLITGLM_ATTACK_RECONSTRUCTION_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "splitglm/core/design_block.h"
#include "splitglm/protocol/session.h"

namespace splitglm::attack {

// What a semi-honest partner holds: the victim's predictions (N x R, one
// column per round) and whichever coefficient vectors were disclosed, each
// tied to the round whose prediction it produced.
struct AdversaryView {
  Matrix received_predictions;
  Matrix known_coefficients;  // P_a x R_known, may have zero columns
  std::vector<Eigen::Index> known_rounds;

  void Validate() const;
};

// X_hat = Y_known B_known^+ (minimum norm). NoCoefficients when nothing was
// disclosed.
Matrix Reconstruct(const AdversaryView& view);

// sigma2 (1 - r/p).
double ExpectedMse(double sigma2, Eigen::Index r, Eigen::Index p);

// Mean squared elementwise error.
double Mse(const Matrix& truth, const Matrix& estimate);

// 1 - MSE(X, X_hat) / mean(X^2), clamped to [0, 1]. X is assumed centered.
double RevealedFraction(const DesignBlock& truth, const Matrix& x_hat);
double RevealedFraction(const Matrix& truth, const Matrix& x_hat);

// Adds N(0, noise_sd^2) elementwise; identity when noise_sd is 0.
Vector AddPredictionNoise(const Vector& predictions, double noise_sd,
                          std::mt19937_64& rng);

// Mitigations expressed as session settings for the protocol.
struct Mitigation {
  double noise_sd = 0.0;
  std::optional<int> iteration_cap;
};

protocol::SessionConfig ApplyMitigation(protocol::SessionConfig cfg,
                                        const Mitigation& mitigation);

// Best guess available without any coefficient: each column of X is taken
// proportional to the final prediction, scaled to unit variance. Used to show
// that predictions alone reveal nothing beyond chance.
Matrix GuessWithoutCoefficients(const Matrix& received_predictions,
                                Eigen::Index p);

struct ReconstructionReport {
  Eigen::Index p = 0;
  Eigen::Index r_known = 0;
  double mse = 0.0;
  double expected_mse = 0.0;
  double revealed_fraction = 0.0;
  std::uint64_t replication = 0;
};

// Monte-Carlo study: uncorrelated features with variance sigma2 (or
// equicorrelated with `covariance`), random coefficient matrix with r_known
// independent columns, predictions Y = X B.
struct StudySpec {
  Eigen::Index n = 1000;
  Eigen::Index p = 20;
  Eigen::Index r_known = 1;
  double sigma2 = 2.0;
  double covariance = 0.0;
  int replications = 200;
  std::uint64_t seed = 1;
};

std::vector<ReconstructionReport> RunStudy(const StudySpec& spec);

void WriteReportCsv(std::ostream& out,
                    const std::vector<ReconstructionReport>& rows);
void WriteReportJsonLines(std::ostream& out,
                          const std::vector<ReconstructionReport>& rows);

}  // namespace splitglm::attack

#endif  // SPLITGLM_ATTACK_RECONSTRUCTION_H_
