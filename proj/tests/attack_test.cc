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

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "splitglm/attack/reconstruction.h"
#include "splitglm/error.h"
#include "splitglm/protocol/session.h"
#include "test_util.h"

namespace splitglm::attack {
namespace {

using testing::RandomNormal;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

AdversaryView ViewOf(const Matrix& x, const Matrix& coefficients) {
  AdversaryView v;
  v.received_predictions = x * coefficients;
  v.known_coefficients = coefficients;
  for (Eigen::Index j = 0; j < coefficients.cols(); ++j) v.known_rounds.push_back(j);
  return v;
}

// Independent Monte-Carlo of the reconstruction error, written without the
// library's study driver.
double MonteCarloMse(int p, int r, double sigma2, int reps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double total = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const Matrix x = testing::Centered(std::sqrt(sigma2) * RandomNormal(1000, p, rng));
    const Matrix b = RandomNormal(p, r, rng);
    const Matrix y = x * b;
    // Minimum-norm X_hat = Y B^+ with B^+ = (B^T B)^{-1} B^T for full column rank.
    const Matrix b_pinv = (b.transpose() * b).inverse() * b.transpose();
    total += (x - y * b_pinv).squaredNorm() / x.size();
  }
  return total / reps;
}

TEST(Reconstruct, SingleFeatureIsExact) {
  std::mt19937_64 rng(1);
  const Matrix x = testing::Centered(RandomNormal(200, 1, rng));
  Matrix b(1, 1);
  b << -0.37;
  const Matrix x_hat = Reconstruct(ViewOf(x, b));
  EXPECT_LT((x_hat - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Reconstruct, FullRankCoefficientsAreExact) {
  std::mt19937_64 rng(2);
  for (int p : {3, 8, 20}) {
    const Matrix x = testing::Centered(RandomNormal(300, p, rng));
    const Matrix x_hat = Reconstruct(ViewOf(x, RandomNormal(p, p, rng)));
    EXPECT_LT((x_hat - x).cwiseAbs().maxCoeff(), 1e-8) << p;
    EXPECT_NEAR(RevealedFraction(x, x_hat), 1.0, 1e-12);
  }
}

TEST(Reconstruct, UsesOnlyDisclosedRounds) {
  std::mt19937_64 rng(3);
  const Matrix x = testing::Centered(RandomNormal(100, 2, rng));
  const Matrix b = RandomNormal(2, 5, rng);
  AdversaryView v;
  v.received_predictions = x * b;
  v.known_coefficients = Matrix(2, 2);
  v.known_coefficients << b.col(1), b.col(4);
  v.known_rounds = {1, 4};
  EXPECT_LT((Reconstruct(v) - x).cwiseAbs().maxCoeff(), 1e-8);
  v.known_rounds = {1, 7};
  EXPECT_ANY_THROW(Reconstruct(v));
}

TEST(Reconstruct, NoCoefficients) {
  std::mt19937_64 rng(4);
  AdversaryView v;
  v.received_predictions = RandomNormal(50, 3, rng);
  v.known_coefficients = Matrix(4, 0);
  EXPECT_EQ(CodeOf([&] { Reconstruct(v); }), ErrorCode::kNoCoefficients);
}

TEST(Reconstruct, OneRoundOfFourMatchesLaw) {
  const double mse = MonteCarloMse(4, 1, 1.0, 200, 5);
  EXPECT_NEAR(mse, ExpectedMse(1.0, 1, 4), 0.1 * 0.75);
  // And the library's own driver agrees with the independent estimate.
  StudySpec spec;
  spec.p = 4;
  spec.r_known = 1;
  spec.sigma2 = 1.0;
  spec.replications = 200;
  double lib = 0;
  for (const auto& row : RunStudy(spec)) lib += row.mse / 200;
  EXPECT_NEAR(lib, 0.75, 0.075);
}

TEST(ExpectedMse, Examples) {
  EXPECT_DOUBLE_EQ(ExpectedMse(2, 0, 20), 2.0);
  EXPECT_DOUBLE_EQ(ExpectedMse(2, 20, 20), 0.0);
  EXPECT_DOUBLE_EQ(ExpectedMse(2, 10, 20), 1.0);
  EXPECT_ANY_THROW(ExpectedMse(2, 21, 20));
  EXPECT_ANY_THROW(ExpectedMse(2, 0, 0));
}

TEST(RevealedFraction, Examples) {
  std::mt19937_64 rng(6);
  const Matrix x = testing::Centered(RandomNormal(100, 3, rng));
  EXPECT_DOUBLE_EQ(RevealedFraction(x, x), 1.0);
  EXPECT_DOUBLE_EQ(RevealedFraction(x, Matrix::Zero(100, 3)), 0.0);
  EXPECT_DOUBLE_EQ(RevealedFraction(x, -x), 0.0);  // clamped
  EXPECT_EQ(CodeOf([&] { RevealedFraction(x, Matrix::Zero(100, 2)); }),
            ErrorCode::kShapeMismatch);
  EXPECT_DOUBLE_EQ(RevealedFraction(testing::Block(x), x), 1.0);
}

TEST(RevealedFraction, OneOfTenUncorrelated) {
  StudySpec spec;
  spec.p = 10;
  spec.r_known = 1;
  spec.replications = 200;
  spec.seed = 7;
  double mean = 0;
  for (const auto& row : RunStudy(spec)) mean += row.revealed_fraction / 200;
  EXPECT_NEAR(mean, 0.1, 0.015);
}

TEST(Mitigation, NoiseIdentityAndMoments) {
  std::mt19937_64 rng(8);
  const Vector v = RandomNormal(20, rng);
  EXPECT_EQ(AddPredictionNoise(v, 0.0, rng), v);
  const Vector noise = AddPredictionNoise(Vector::Zero(10000), 1.0, rng);
  const double mean = noise.mean();
  const double sd = std::sqrt((noise.array() - mean).square().sum() / 9999.0);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sd, 1.0, 0.05);
  EXPECT_ANY_THROW(AddPredictionNoise(v, -1.0, rng));
}

TEST(Mitigation, SessionSettings) {
  protocol::SessionConfig cfg;
  cfg.min_iterations = 10;
  const auto out = ApplyMitigation(cfg, {0.25, 3});
  EXPECT_EQ(out.noise_sd, 0.25);
  EXPECT_EQ(out.max_iterations, 3);
  EXPECT_EQ(out.min_iterations, 3);
  EXPECT_NO_THROW(out.Validate());
  EXPECT_ANY_THROW(ApplyMitigation(cfg, {0.0, 0}));
  EXPECT_ANY_THROW(ApplyMitigation(cfg, {-1.0, std::nullopt}));
}

TEST(Mitigation, CapOfOneOnOrthogonalBlocksGivesMarginals) {
  std::mt19937_64 rng(9);
  const auto pair = testing::MakeOrthogonalBlocks(200, 2, 3, rng);
  Matrix x(200, 5);
  x << pair.a, pair.b;
  Vector y = x * RandomNormal(5, rng) + RandomNormal(200, rng);
  y.array() -= y.mean();
  protocol::SessionConfig cfg;
  cfg.psk.fill(4);
  cfg.compute_standard_errors = false;
  cfg = ApplyMitigation(cfg, {0.0, 1});
  const auto out = protocol::SimulateTwoParty(
      testing::Block(pair.a, "a"), testing::Block(pair.b, "b"),
      TargetVector(y, FamilySpec::Gaussian()), cfg, cfg);
  EXPECT_EQ(out.initiator.result.iterations_used, 1);
  EXPECT_LT((out.initiator.result.local_coefficients -
             testing::NormalEquationsSolve(pair.a, y))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  EXPECT_LT((out.responder.result.local_coefficients -
             testing::NormalEquationsSolve(pair.b, y))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Invariants, PredictionsAloneRevealNothing) {
  std::mt19937_64 rng(10);
  for (int p : {2, 3, 5, 10, 20}) {
    double plus = 0, minus = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
      const Matrix x = testing::Centered(RandomNormal(500, p, rng));
      const Matrix preds = x * RandomNormal(p, 1 + rep % 4, rng);
      AdversaryView v;
      v.received_predictions = preds;
      v.known_coefficients = Matrix(p, 0);
      EXPECT_EQ(CodeOf([&] { Reconstruct(v); }), ErrorCode::kNoCoefficients);
      const Matrix guess = GuessWithoutCoefficients(preds, p);
      plus += RevealedFraction(x, guess) / reps;
      minus += RevealedFraction(x, -guess) / reps;
      EXPECT_EQ(RevealedFraction(x, Matrix::Zero(500, p)), 0.0);
    }
    if (p >= 3) {
      EXPECT_LE(plus, 0.01) << p;
      EXPECT_LE(minus, 0.01) << p;
    } else {
      // Two columns: y_hat pins a plane direction, still far below what one
      // disclosed coefficient reveals (1/2).
      EXPECT_LE(std::max(plus, minus), 0.15);
    }
  }
}

TEST(Invariants, MseLawGrid) {
  for (int p : {4, 20}) {
    for (int r : {1, p / 4, p / 2, p}) {
      StudySpec spec;
      spec.p = p;
      spec.r_known = r;
      spec.sigma2 = 2.0;
      spec.replications = 200;
      spec.seed = 100 + p + r;
      double mse = 0;
      for (const auto& row : RunStudy(spec)) mse += row.mse / 200;
      const double want = ExpectedMse(2.0, r, p);
      if (r == p) {
        EXPECT_LT(mse, 1e-8);
      } else {
        EXPECT_NEAR(mse, want, 0.1 * want) << p << " " << r;
        EXPECT_NEAR(MonteCarloMse(p, r, 2.0, 200, 7 * p + r), want, 0.1 * want);
      }
    }
  }
}

TEST(Invariants, CorrelationLowerBound) {
  // Isotropic coefficients: the bound R/P holds up to Monte-Carlo error.
  for (int r : {1, 3, 5}) {
    StudySpec spec;
    spec.p = 10;
    spec.r_known = r;
    spec.covariance = 0.5;
    spec.replications = 200;
    double mean = 0;
    for (const auto& row : RunStudy(spec)) mean += row.revealed_fraction / 200;
    EXPECT_GE(mean, 0.9 * r / 10.0) << r;
  }
  // Coefficients that load on the shared factor reveal more than R/P.
  std::mt19937_64 rng(11);
  const int p = 10;
  for (int r : {1, 3}) {
    double mean = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const Matrix x = testing::Equicorrelated(1000, p, 0.5, rng);
      Matrix b = 0.3 * RandomNormal(p, r, rng);
      b.rowwise() += Vector::Ones(r).transpose();
      mean += RevealedFraction(x, Reconstruct(ViewOf(x, b))) / 100;
    }
    EXPECT_GT(mean, 1.5 * r / p) << r;
  }
}

TEST(Study, DeterministicAndReportFormats) {
  StudySpec spec;
  spec.p = 5;
  spec.r_known = 2;
  spec.replications = 3;
  const auto a = RunStudy(spec);
  const auto b = RunStudy(spec);
  ASSERT_EQ(a.size(), 3u);
  for (size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].mse, b[i].mse);
  std::ostringstream csv, jsonl;
  WriteReportCsv(csv, a);
  WriteReportJsonLines(jsonl, a);
  std::istringstream c(csv.str());
  std::string line;
  std::getline(c, line);
  EXPECT_EQ(line, "replication,P,R_known,mse,expected_mse,revealed_fraction");
  int rows = 0;
  while (std::getline(c, line)) ++rows;
  EXPECT_EQ(rows, 3);
  std::istringstream j(jsonl.str());
  std::getline(j, line);
  EXPECT_NE(line.find("\"revealed_fraction\""), std::string::npos);
  EXPECT_EQ(line.front(), '{');
  spec.r_known = 6;
  EXPECT_ANY_THROW(RunStudy(spec));
}

}  // namespace
}  // namespace splitglm::attack
