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

#include "splitglm/core/least_squares.h"

#include <cmath>

#include "splitglm/error.h"

namespace splitglm {
namespace {

constexpr double kRankThreshold = 1e-10;

Eigen::ColPivHouseholderQR<Matrix> Factor(const Matrix& xw) {
  Eigen::ColPivHouseholderQR<Matrix> qr(xw.rows(), xw.cols());
  qr.setThreshold(kRankThreshold);
  qr.compute(xw);
  if (qr.rank() < xw.cols()) {
    Fail(ErrorCode::kSingularGram,
         "design has rank " + std::to_string(qr.rank()) + " < " +
             std::to_string(xw.cols()) + " columns; drop or merge features");
  }
  return qr;
}

void CheckWeights(const Vector& w, Eigen::Index n) {
  if (w.size() != n) Fail(ErrorCode::kShapeMismatch, "weight length mismatch");
  if (!w.allFinite() || (w.array() <= 0.0).any()) {
    Fail(ErrorCode::kInvalidArgument, "weights must be positive and finite");
  }
}

}  // namespace

double MarginalCoefficient(const Vector& x, const Vector& r, const Vector& w) {
  if (x.size() != r.size()) {
    Fail(ErrorCode::kShapeMismatch, "x and r lengths differ");
  }
  CheckWeights(w, x.size());
  const double xx = (w.array() * x.array().square()).sum();
  if (!(xx >= 1e-12)) {
    Fail(ErrorCode::kDegenerateColumn, "weighted sum of squares below 1e-12");
  }
  return (w.array() * x.array() * r.array()).sum() / xx;
}

Vector WeightedLsSolve(const Matrix& x, const Vector& r, const Vector& w) {
  if (x.rows() != r.size()) {
    Fail(ErrorCode::kShapeMismatch, "design rows and response length differ");
  }
  if (x.cols() > x.rows()) {
    Fail(ErrorCode::kSingularGram, "more columns than rows");
  }
  CheckWeights(w, x.rows());
  if (x.cols() == 0) return Vector();
  const Vector sw = w.array().sqrt();
  const Matrix xw = sw.asDiagonal() * x;
  return Factor(xw).solve((sw.array() * r.array()).matrix());
}

Vector WeightedLsSolve(const DesignBlock& block, const Vector& r,
                       const Vector& w) {
  return WeightedLsSolve(block.values(), r, w);
}

BlockSolver::BlockSolver(const Matrix& x) : x_(x) {
  if (x.cols() > x.rows()) {
    Fail(ErrorCode::kSingularGram, "more columns than rows");
  }
  // Eigen's QR does not accept an empty matrix.
  if (x.cols() > 0) unweighted_ = Factor(x);
}

Vector BlockSolver::Solve(const Vector& r) const {
  if (r.size() != x_.rows()) {
    Fail(ErrorCode::kShapeMismatch, "response length mismatch");
  }
  if (x_.cols() == 0) return Vector();
  return unweighted_.solve(r);
}

Vector BlockSolver::Solve(const Vector& r, const Vector& w) const {
  return WeightedLsSolve(x_, r, w);
}

Vector InverseGramDiagonal(const Matrix& x, const Vector& w) {
  CheckWeights(w, x.rows());
  if (x.cols() == 0) return Vector();
  const Vector sw = w.array().sqrt();
  const auto qr = Factor(sw.asDiagonal() * x);
  const Eigen::Index p = x.cols();
  const Matrix r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Matrix rinv =
      r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  // (X^T W X)^{-1} = P R^{-1} R^{-T} P^T, so diag entry for original column
  // perm(k) is the squared norm of row k of R^{-1}.
  const Vector permuted = rinv.rowwise().squaredNorm();
  Vector diag(p);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = 0; k < p; ++k) diag[perm[k]] = permuted[k];
  return diag;
}

}  // namespace splitglm
