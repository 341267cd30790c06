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

#include "splitglm/attack/reconstruction.h"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"

#include "splitglm/error.h"

namespace splitglm::attack {
namespace {

constexpr double kPinvCutoff = 1e-12;

Matrix PseudoInverse(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = s.size() > 0 ? kPinvCutoff * s[0] : 0.0;
  Vector inv(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) inv[i] = s[i] > cut ? 1.0 / s[i] : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace

void AdversaryView::Validate() const {
  const auto r_known = known_coefficients.cols();
  if (static_cast<std::size_t>(r_known) != known_rounds.size()) {
    Fail(ErrorCode::kShapeMismatch, "one round index per known coefficient column");
  }
  if (r_known > received_predictions.cols()) {
    Fail(ErrorCode::kShapeMismatch, "more known coefficients than rounds");
  }
  for (Eigen::Index round : known_rounds) {
    if (round < 0 || round >= received_predictions.cols()) {
      Fail(ErrorCode::kShapeMismatch, "known round index out of range");
    }
  }
}

Matrix Reconstruct(const AdversaryView& view) {
  view.Validate();
  if (view.known_coefficients.cols() == 0) {
    Fail(ErrorCode::kNoCoefficients,
         "no coefficients disclosed; the features are not identified");
  }
  Matrix y_known(view.received_predictions.rows(),
                 view.known_coefficients.cols());
  for (std::size_t j = 0; j < view.known_rounds.size(); ++j) {
    y_known.col(static_cast<Eigen::Index>(j)) =
        view.received_predictions.col(view.known_rounds[j]);
  }
  return y_known * PseudoInverse(view.known_coefficients);
}

double ExpectedMse(double sigma2, Eigen::Index r, Eigen::Index p) {
  if (p < 1 || r < 0 || r > p || !(sigma2 >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "need 0 <= r <= p, p >= 1, sigma2 >= 0");
  }
  return sigma2 * (1.0 - static_cast<double>(r) / static_cast<double>(p));
}

double Mse(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    Fail(ErrorCode::kShapeMismatch, "reconstruction shape differs from truth");
  }
  return (truth - estimate).squaredNorm() / static_cast<double>(truth.size());
}

double RevealedFraction(const Matrix& truth, const Matrix& x_hat) {
  const double mse = Mse(truth, x_hat);
  const double total = truth.squaredNorm() / static_cast<double>(truth.size());
  if (total == 0.0) return 0.0;
  return std::clamp(1.0 - mse / total, 0.0, 1.0);
}

double RevealedFraction(const DesignBlock& truth, const Matrix& x_hat) {
  return RevealedFraction(truth.values(), x_hat);
}

Vector AddPredictionNoise(const Vector& predictions, double noise_sd,
                          std::mt19937_64& rng) {
  if (!(noise_sd >= 0.0)) Fail(ErrorCode::kInvalidArgument, "noise_sd < 0");
  if (noise_sd == 0.0) return predictions;
  std::normal_distribution<double> draw(0.0, noise_sd);
  Vector out = predictions;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += draw(rng);
  return out;
}

protocol::SessionConfig ApplyMitigation(protocol::SessionConfig cfg,
                                        const Mitigation& mitigation) {
  if (!(mitigation.noise_sd >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "noise_sd < 0");
  }
  cfg.noise_sd = mitigation.noise_sd;
  if (mitigation.iteration_cap) {
    if (*mitigation.iteration_cap < 1) {
      Fail(ErrorCode::kInvalidArgument, "iteration cap must be at least 1");
    }
    cfg.max_iterations = *mitigation.iteration_cap;
    if (cfg.min_iterations && *cfg.min_iterations > cfg.max_iterations) {
      cfg.min_iterations = cfg.max_iterations;
    }
  }
  return cfg;
}

Matrix GuessWithoutCoefficients(const Matrix& received_predictions,
                                Eigen::Index p) {
  const Eigen::Index n = received_predictions.rows();
  Matrix guess = Matrix::Zero(n, p);
  if (received_predictions.cols() == 0) return guess;
  const Vector last = received_predictions.col(received_predictions.cols() - 1);
  const double sd = std::sqrt(last.squaredNorm() / static_cast<double>(n));
  if (sd == 0.0) return guess;
  for (Eigen::Index j = 0; j < p; ++j) guess.col(j) = last / sd;
  return guess;
}

std::vector<ReconstructionReport> RunStudy(const StudySpec& spec) {
  if (spec.p < 1 || spec.r_known < 0 || spec.r_known > spec.p ||
      spec.n < 2 || spec.replications < 1 || !(spec.sigma2 > 0.0) ||
      !(spec.covariance >= 0.0 && spec.covariance < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "bad attack study specification");
  }
  std::vector<ReconstructionReport> rows;
  rows.reserve(spec.replications);
  for (int rep = 0; rep < spec.replications; ++rep) {
    // Independent stream per replication.
    std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(rep)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(spec.sigma2);
    const double shared = std::sqrt(spec.covariance);
    const double own = std::sqrt(1.0 - spec.covariance);
    Matrix x(spec.n, spec.p);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
      const double factor = normal(rng);
      for (Eigen::Index j = 0; j < spec.p; ++j) {
        x(i, j) = sd * (own * normal(rng) + shared * factor);
      }
    }
    x.rowwise() -= x.colwise().mean();

    // The victim always shares at least one prediction, even when none of
    // its coefficients are disclosed.
    const Eigen::Index rounds = std::max<Eigen::Index>(spec.r_known, 1);
    Matrix coefficients(spec.p, rounds);
    for (Eigen::Index i = 0; i < spec.p; ++i) {
      for (Eigen::Index j = 0; j < rounds; ++j) coefficients(i, j) = normal(rng);
    }
    AdversaryView view;
    view.received_predictions = x * coefficients;
    view.known_coefficients = coefficients.leftCols(spec.r_known);
    for (Eigen::Index j = 0; j < spec.r_known; ++j) view.known_rounds.push_back(j);

    const Matrix x_hat = spec.r_known == 0
                             ? GuessWithoutCoefficients(
                                   view.received_predictions, spec.p)
                             : Reconstruct(view);
    ReconstructionReport row;
    row.p = spec.p;
    row.r_known = spec.r_known;
    row.mse = Mse(x, x_hat);
    row.expected_mse = ExpectedMse(spec.sigma2, spec.r_known, spec.p);
    row.revealed_fraction = RevealedFraction(x, x_hat);
    row.replication = static_cast<std::uint64_t>(rep);
    rows.push_back(row);
  }
  return rows;
}

void WriteReportCsv(std::ostream& out,
                    const std::vector<ReconstructionReport>& rows) {
  out << "replication,P,R_known,mse,expected_mse,revealed_fraction\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.replication << ',' << r.p << ',' << r.r_known << ',' << r.mse
        << ',' << r.expected_mse << ',' << r.revealed_fraction << '\n';
  }
}

void WriteReportJsonLines(std::ostream& out,
                          const std::vector<ReconstructionReport>& rows) {
  for (const auto& r : rows) {
    nlohmann::json j = {{"replication", r.replication},
                        {"P", r.p},
                        {"R_known", r.r_known},
                        {"mse", r.mse},
                        {"expected_mse", r.expected_mse},
                        {"revealed_fraction", r.revealed_fraction}};
    out << j.dump() << '\n';
  }
}

}  // namespace splitglm::attack
