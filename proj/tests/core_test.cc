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

#include <Eigen/QR>
#include <gtest/gtest.h>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"
#include "splitglm/core/full_fit.h"
#include "splitglm/core/least_squares.h"
#include "splitglm/error.h"
#include "test_util.h"

namespace splitglm {
namespace {

using testing::Block;
using testing::Centered;
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

TEST(CenterBlock, TwoPoints) {
  Matrix raw(2, 1);
  raw << 1, 3;
  const DesignBlock b = CenterBlock(raw, false);
  EXPECT_DOUBLE_EQ(b.values()(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(b.values()(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(b.column_means()(0), 2.0);
  EXPECT_TRUE(b.centered());
}

TEST(CenterBlock, ConstantColumnRejectedWhenStandardizing) {
  Matrix raw(2, 1);
  raw << 2, 2;
  EXPECT_EQ(CodeOf([&] { CenterBlock(raw, true); }), ErrorCode::kConstantColumn);
}

TEST(CenterBlock, RandomMatrixMeansAndScales) {
  std::mt19937_64 rng(11);
  Matrix raw = RandomNormal(100, 3, rng);
  raw.col(1) = raw.col(1) * 7.0 + Vector::Constant(100, 4.0);
  const DesignBlock b = CenterBlock(raw, true);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Vector c = b.values().col(j);
    EXPECT_NEAR(c.mean(), 0.0, 1e-12);
    const double sd = std::sqrt(c.squaredNorm() / 99.0);
    EXPECT_NEAR(sd, 1.0, 1e-12);
  }
  ASSERT_TRUE(b.column_scales().has_value());
}

TEST(DesignBlock, RejectsUncenteredAndNonFinite) {
  Matrix v(3, 1);
  v << 1, 2, 3;
  EXPECT_EQ(CodeOf([&] { DesignBlock(v, {"a"}, true, Vector::Zero(1)); }),
            ErrorCode::kInvalidArgument);
  v(1, 0) = std::nan("");
  EXPECT_EQ(CodeOf([&] { CenterBlock(v, false); }), ErrorCode::kNonFinite);
}

TEST(DesignBlock, RejectsDuplicateNames) {
  Matrix v = Matrix::Zero(3, 2);
  v << -1, 1, 0, 0, 1, -1;
  EXPECT_ANY_THROW(DesignBlock(v, {"a", "a"}, true, Vector::Zero(2)));
}

TEST(MarginalCoefficient, Examples) {
  Vector x(2), r(2), w = Vector::Ones(2);
  x << 1, -1;
  r << 2, -2;
  EXPECT_DOUBLE_EQ(MarginalCoefficient(x, r, w), 2.0);
  r << 1, 1;
  EXPECT_DOUBLE_EQ(MarginalCoefficient(x, r, w), 0.0);
}

TEST(MarginalCoefficient, EqualsCovarianceRatio) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x = RandomNormal(50, rng);
    Vector r = RandomNormal(50, rng) + 0.5 * x;
    x.array() -= x.mean();
    r.array() -= r.mean();
    double cov = 0, var = 0;
    for (int i = 0; i < 50; ++i) {
      cov += x(i) * r(i) / 49.0;
      var += x(i) * x(i) / 49.0;
    }
    EXPECT_NEAR(MarginalCoefficient(x, r, Vector::Ones(50)), cov / var, 1e-12);
  }
}

TEST(MarginalCoefficient, DegenerateColumn) {
  EXPECT_EQ(CodeOf([] {
              MarginalCoefficient(Vector::Zero(4), Vector::Ones(4),
                                  Vector::Ones(4));
            }),
            ErrorCode::kDegenerateColumn);
}

TEST(WeightedLsSolve, SingleColumnIsMarginal) {
  std::mt19937_64 rng(5);
  const Matrix x = Centered(RandomNormal(40, 1, rng));
  const Vector r = RandomNormal(40, rng);
  const Vector b = WeightedLsSolve(Block(x), r, Vector::Ones(40));
  ASSERT_EQ(b.size(), 1);
  EXPECT_NEAR(b(0), MarginalCoefficient(x.col(0), r, Vector::Ones(40)), 1e-12);
}

TEST(WeightedLsSolve, OrthonormalColumnsGiveInnerProducts) {
  Matrix x(4, 2);
  x << 0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, -0.5;
  Vector r(4);
  r << 1, 2, 3, 5;
  const Vector b = WeightedLsSolve(x, r, Vector::Ones(4));
  EXPECT_NEAR(b(0), x.col(0).dot(r), 1e-14);
  EXPECT_NEAR(b(1), x.col(1).dot(r), 1e-14);
}

TEST(WeightedLsSolve, MatchesGramInversion) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix x = Centered(RandomNormal(200, 5, rng));
    const Vector r = RandomNormal(200, rng);
    Vector w(200);
    for (auto& v : w) v = unif(rng);
    const Matrix sw = w.asDiagonal() * x;
    const Vector oracle = (x.transpose() * sw).inverse() * (sw.transpose() * r);
    EXPECT_LT((WeightedLsSolve(x, r, w) - oracle).cwiseAbs().maxCoeff(), 1e-10);
    BlockSolver solver(x);
    EXPECT_LT((solver.Solve(r, w) - oracle).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((solver.Solve(r) - testing::NormalEquationsSolve(x, r))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
  }
}

TEST(WeightedLsSolve, CollinearBlockIsSingular) {
  std::mt19937_64 rng(9);
  Matrix x = Centered(RandomNormal(30, 2, rng));
  x.col(1) = 2.0 * x.col(0);
  EXPECT_EQ(CodeOf([&] { WeightedLsSolve(x, Vector::Ones(30), Vector::Ones(30)); }),
            ErrorCode::kSingularGram);
}

TEST(InverseGramDiagonal, MatchesExplicitInverse) {
  std::mt19937_64 rng(13);
  const Matrix x = Centered(RandomNormal(80, 4, rng));
  Vector w = RandomNormal(80, rng).cwiseAbs().array() + 0.2;
  const Matrix inv = (x.transpose() * w.asDiagonal() * x).inverse();
  EXPECT_LT((InverseGramDiagonal(x, w) - inv.diagonal()).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(WorkingSet, GaussianIsIdentity) {
  Vector y(2);
  y << 1, 2;
  const WorkingSet ws = UpdateWorkingSet(FamilySpec::Gaussian(),
                                         TargetVector(y, FamilySpec::Gaussian()),
                                         Vector::Zero(2));
  EXPECT_EQ(ws.working_response, y);
  EXPECT_EQ(ws.weights, Vector::Ones(2));
}

TEST(WorkingSet, BinomialAtZero) {
  Vector y(2);
  y << 0, 1;
  const WorkingSet ws = UpdateWorkingSet(FamilySpec::Binomial(),
                                         TargetVector(y, FamilySpec::Binomial()),
                                         Vector::Zero(2));
  EXPECT_DOUBLE_EQ(ws.mu(0), 0.5);
  EXPECT_DOUBLE_EQ(ws.weights(0), 0.25);
  EXPECT_DOUBLE_EQ(ws.working_response(0), -2.0);
  EXPECT_DOUBLE_EQ(ws.working_response(1), 2.0);
  EXPECT_DOUBLE_EQ(FamilySpec::Binomial().MeanDerivative(0.0), 0.25);
}

TEST(WorkingSet, PoissonAtLogTwo) {
  Vector y(1), eta(1);
  y << 3;
  eta << std::log(2.0);
  const WorkingSet ws = UpdateWorkingSet(
      FamilySpec::Poisson(), TargetVector(y, FamilySpec::Poisson()), eta);
  EXPECT_NEAR(ws.mu(0), 2.0, 1e-15);
  EXPECT_NEAR(ws.weights(0), 2.0, 1e-15);
  EXPECT_NEAR(ws.working_response(0), std::log(2.0) + 0.5, 1e-15);
}

TEST(WorkingSet, RejectsNonFiniteEta) {
  Vector eta(1);
  eta << std::nan("");
  EXPECT_ANY_THROW(UpdateWorkingSet(FamilySpec::Gaussian(),
                                    TargetVector(Vector::Ones(1),
                                                 FamilySpec::Gaussian()),
                                    eta));
}

TEST(TargetVector, Validation) {
  Vector y(3);
  y << 0, 1, 2;
  EXPECT_ANY_THROW(TargetVector(y, FamilySpec::Binomial()));
  EXPECT_NO_THROW(TargetVector(y, FamilySpec::Poisson()));
  y << 0, 1.5, 2;
  EXPECT_ANY_THROW(TargetVector(y, FamilySpec::Poisson()));
  y << 0, -1, 2;
  EXPECT_ANY_THROW(TargetVector(y, FamilySpec::Poisson()));
  EXPECT_NO_THROW(TargetVector(y, FamilySpec::Gaussian()));
}

TEST(FamilySpec, CanonicalLinksAndParse) {
  EXPECT_EQ(FamilySpec::Gaussian().link(), Link::kIdentity);
  EXPECT_EQ(FamilySpec::Binomial().link(), Link::kLogit);
  EXPECT_EQ(FamilySpec::Poisson().link(), Link::kLog);
  EXPECT_EQ(FamilySpec::Parse("poisson"), FamilySpec::Poisson());
  EXPECT_ANY_THROW(FamilySpec::Parse("gamma"));
}

TEST(FamilySpec, MeanDerivativeMatchesFiniteDifference) {
  for (const FamilySpec fam : {FamilySpec::Gaussian(), FamilySpec::Binomial(),
                               FamilySpec::Poisson()}) {
    const double h = 1e-6;
    for (double eta = -10.0; eta <= 10.0; eta += 0.25) {
      // Near mu = 1 the difference of two means loses ~1e-6 relative to
      // cancellation; difference the mirrored tail instead.
      const double e = fam.family() == Family::kBinomial ? -std::abs(eta) : eta;
      const double fd = (fam.Mean(e + h) - fam.Mean(e - h)) / (2 * h);
      const double d = fam.MeanDerivative(eta);
      EXPECT_LT(std::abs(fd - d) / std::abs(d), 1e-6) << fam.name() << " " << eta;
      EXPECT_GT(fam.Mean(eta + 0.1), fam.Mean(eta)) << "monotone";
      if (fam.family() == Family::kBinomial) {
        EXPECT_NEAR(fam.Mean(eta) + fam.Mean(-eta), 1.0, 1e-15);
        EXPECT_DOUBLE_EQ(fam.MeanDerivative(eta), fam.MeanDerivative(-eta));
      }
    }
  }
}

TEST(FullFit, ExactLinearFit) {
  Matrix x(4, 1);
  x << -1.5, -0.5, 0.5, 1.5;
  const Vector y = 2.0 * x.col(0);
  const FullFit f = FitFullGlm(std::vector<DesignBlock>{Block(x)}, TargetVector(y, FamilySpec::Gaussian()),
                               FamilySpec::Gaussian());
  EXPECT_NEAR(f.coefficients(0), 2.0, 1e-14);
  EXPECT_NEAR(f.sigma2, 0.0, 1e-26);
  EXPECT_TRUE(f.converged);
}

TEST(FullFit, GaussianCoverage) {
  // N=1000, P=10, R^2 = 0.5; count coefficients within 3 SE of the truth.
  std::mt19937_64 rng(17);
  const int n = 1000, p = 10;
  int covered = 0, total = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix x = Centered(RandomNormal(n, p, rng));
    const Vector beta = RandomNormal(p, rng);
    const Vector signal = x * beta;
    const double sd = std::sqrt(signal.squaredNorm() / (n - 1));
    Vector y = signal + sd * RandomNormal(n, rng);
    y.array() -= y.mean();
    const FullFit f = FitFullGlm(x, TargetVector(y, FamilySpec::Gaussian()),
                                 FamilySpec::Gaussian());
    for (int j = 0; j < p; ++j) {
      ++total;
      if (std::abs(f.coefficients(j) - beta(j)) < 3 * f.standard_errors(j)) {
        ++covered;
      }
    }
  }
  EXPECT_GE(covered, 0.95 * total);
}

TEST(FullFit, GaussianStandardErrorsMatchFormula) {
  std::mt19937_64 rng(19);
  const Matrix x = Centered(RandomNormal(60, 3, rng));
  const Vector y = Centered(RandomNormal(60, 1, rng)).col(0) + x.col(0);
  const FullFit f = FitFullGlm(x, TargetVector(y, FamilySpec::Gaussian()),
                               FamilySpec::Gaussian());
  const Vector b = testing::NormalEquationsSolve(x, y);
  const double s2 = (y - x * b).squaredNorm() / (60 - 3);
  const Vector se = (s2 * testing::GramInverse(x).diagonal()).cwiseSqrt();
  EXPECT_LT((f.coefficients - b).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(testing::MaxRelativeError(f.standard_errors, se), 1e-10);
}

// Newton-Raphson for logistic regression written out with explicit inverses.
Vector TextbookLogisticStep(const Matrix& x, const Vector& y, const Vector& b) {
  const Vector eta = x * b;
  Vector p(eta.size()), w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
    w(i) = p(i) * (1.0 - p(i));
  }
  const Matrix info = x.transpose() * w.asDiagonal() * x;
  return b + info.inverse() * (x.transpose() * (y - p));
}

TEST(FullFit, BinomialMatchesTextbookIrls) {
  std::mt19937_64 rng(23);
  const int n = 120;
  Matrix x(n, 3);
  x.col(0).setOnes();
  x.rightCols(2) = Centered(RandomNormal(n, 2, rng));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    const double eta = 0.3 + 0.8 * x(i, 1) - 0.5 * x(i, 2);
    y(i) = unif(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  const TargetVector t(y, FamilySpec::Binomial());
  Vector b = Vector::Zero(3);
  for (int it = 1; it <= 3; ++it) {
    b = TextbookLogisticStep(x, y, b);
    const FullFit f = FitFullGlm(x, t, FamilySpec::Binomial(), 1e-8, it);
    EXPECT_LT((f.coefficients - b).cwiseAbs().maxCoeff(), 1e-10) << it;
  }
  for (int it = 0; it < 20; ++it) b = TextbookLogisticStep(x, y, b);
  const FullFit f = FitFullGlm(x, t, FamilySpec::Binomial());
  EXPECT_TRUE(f.converged);
  EXPECT_LT((f.coefficients - b).cwiseAbs().maxCoeff(), 1e-8);
  const Vector eta = x * b;
  Vector w(n);
  for (int i = 0; i < n; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-eta(i)));
    w(i) = p * (1 - p);
  }
  const Vector se =
      (x.transpose() * w.asDiagonal() * x).inverse().diagonal().cwiseSqrt();
  EXPECT_LT(testing::MaxRelativeError(f.standard_errors, se), 1e-6);
}

TEST(FullFit, PoissonFirstStepUsesWorkingSet) {
  // One IRLS step from zero equals the weighted solve on the working set.
  std::mt19937_64 rng(29);
  const int n = 80;
  Matrix x(n, 2);
  x.col(0).setOnes();
  x.col(1) = Centered(RandomNormal(n, 1, rng)).col(0);
  std::poisson_distribution<int> pois(2.0);
  Vector y(n);
  for (auto& v : y) v = pois(rng);
  const TargetVector t(y, FamilySpec::Poisson());
  const WorkingSet ws = UpdateWorkingSet(FamilySpec::Poisson(), t, Vector::Zero(n));
  const Vector step = (x.transpose() * ws.weights.asDiagonal() * x).inverse() *
                      (x.transpose() * ws.weights.asDiagonal() * ws.working_response);
  const FullFit f = FitFullGlm(x, t, FamilySpec::Poisson(), 1e-8, 1);
  EXPECT_LT((f.coefficients - step).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FullFit, NotConvergedFlag) {
  std::mt19937_64 rng(31);
  const Matrix x = Centered(RandomNormal(100, 2, rng));
  Vector y(100);
  for (int i = 0; i < 100; ++i) y(i) = x(i, 0) > 0 ? 1 : 0;
  const FullFit f =
      FitFullGlm(x, TargetVector(y, FamilySpec::Binomial()), FamilySpec::Binomial(),
                 1e-8, 2);
  EXPECT_FALSE(f.converged);
  EXPECT_EQ(f.iterations, 2);
}

TEST(FullFit, RejectsTooManyColumns) {
  std::mt19937_64 rng(37);
  const Matrix x = Centered(RandomNormal(5, 5, rng));
  EXPECT_ANY_THROW(FitFullGlm(x, TargetVector(Vector::Ones(5), FamilySpec::Gaussian()),
                              FamilySpec::Gaussian()));
}

TEST(Invariants, CoordinateFormulaAtSolution) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> pdist(2, 10);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 50 + rep, p = pdist(rng);
    const Matrix x = Centered(RandomNormal(n, p, rng));
    const Vector y = Centered(RandomNormal(n, 1, rng)).col(0);
    const Vector b = FitFullGlm(x, TargetVector(y, FamilySpec::Gaussian()),
                                FamilySpec::Gaussian())
                         .coefficients;
    for (int j = 0; j < p; ++j) {
      const Vector partial = y - x * b + x.col(j) * b(j);
      const double coord = x.col(j).dot(partial) / x.col(j).squaredNorm();
      EXPECT_NEAR(coord, b(j), 1e-10);
    }
  }
}

TEST(Invariants, ResidualsOrthogonalToColumns) {
  std::mt19937_64 rng(43);
  const int n = 300;
  const Matrix a = Centered(RandomNormal(n, 3, rng));
  const Matrix c = Centered(RandomNormal(n, 4, rng));
  const Vector y = Centered(RandomNormal(n, 1, rng)).col(0) + a.col(0) - c.col(2);
  const FullFit f = FitFullGlm(std::vector<DesignBlock>{Block(a, "a"), Block(c, "c")},
                               TargetVector(y, FamilySpec::Gaussian()),
                               FamilySpec::Gaussian());
  const Vector res = y - f.linear_predictor;
  EXPECT_LT((a.transpose() * res).cwiseAbs().maxCoeff(), 1e-8 * n);
  EXPECT_LT((c.transpose() * res).cwiseAbs().maxCoeff(), 1e-8 * n);
}

TEST(Invariants, MarginalEqualsConditionalForOrthogonalColumns) {
  std::mt19937_64 rng(47);
  const int n = 200, p = 6;
  const Matrix q = testing::MakeOrthogonalBlocks(n, 1, p - 1, rng).b;
  // Orthogonalize fully so every column pair is orthogonal.
  Eigen::HouseholderQR<Matrix> qr(q);
  Matrix x = Matrix(qr.householderQ() * Matrix::Identity(n, p - 1)) * 10.0;
  const Vector y = Centered(RandomNormal(n, 1, rng)).col(0);
  const Vector b = FitFullGlm(x, TargetVector(y, FamilySpec::Gaussian()),
                              FamilySpec::Gaussian())
                       .coefficients;
  for (int j = 0; j < p - 1; ++j) {
    EXPECT_NEAR(MarginalCoefficient(x.col(j), y, Vector::Ones(n)), b(j), 1e-10);
  }
}

}  // namespace
}  // namespace splitglm
