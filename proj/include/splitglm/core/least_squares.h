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

#ifndef SPLITGLM_CORE_LEAST_SQUARES_H_
#define SPLITGLM_CORE_LEAST_SQUARES_H_

#include <optional>

#include "splitglm/core/design_block.h"

namespace splitglm {

// <x, r>_w / <x, x>_w. Throws DegenerateColumn when <x, x>_w < 1e-12.
double MarginalCoefficient(const Vector& x, const Vector& r, const Vector& w);

// argmin_b sum_i w_i (r_i - x_i b)^2 via column-pivoted QR of W^1/2 X.
// Throws SingularGram when the block's columns are (numerically) collinear.
Vector WeightedLsSolve(const DesignBlock& block, const Vector& r,
                       const Vector& w);
Vector WeightedLsSolve(const Matrix& x, const Vector& r, const Vector& w);

// Repeated weighted solves against one fixed block. The unweighted QR
// factorization is computed once and reused whenever `w` is null, which is
// the Gaussian path through block coordinate descent.
class BlockSolver {
 public:
  explicit BlockSolver(const Matrix& x);

  Vector Solve(const Vector& r) const;
  Vector Solve(const Vector& r, const Vector& w) const;

  const Matrix& design() const { return x_; }

 private:
  Matrix x_;
  Eigen::ColPivHouseholderQR<Matrix> unweighted_;
};

// Diagonal of (X^T W X)^{-1}; throws SingularGram on rank deficiency.
Vector InverseGramDiagonal(const Matrix& x, const Vector& w);

}  // namespace splitglm

#endif  // SPLITGLM_CORE_LEAST_SQUARES_H_
