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

#ifndef SPLITGLM_CORE_FULL_FIT_H_
#define SPLITGLM_CORE_FULL_FIT_H_

#include <vector>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"

namespace splitglm {

struct FullFit {
  Vector coefficients;
  Vector standard_errors;
  double sigma2 = 1.0;  // residual variance (Gaussian); dispersion 1 otherwise
  int iterations = 0;
  bool converged = false;
  Vector linear_predictor;
};

inline constexpr double kDefaultTolerance = 1e-8;
inline constexpr int kDefaultMaxIterations = 100;

// Maximum-likelihood fit on the horizontally concatenated blocks. This is the
// pooled-data reference every distributed result is checked against.
//
// Gaussian: one QR solve, sigma2 = RSS / (N - P).
// Binomial/Poisson: IRLS from beta = 0 until max |delta beta| < tol; SEs from
// (X^T W X)^{-1} at the final estimate with dispersion fixed at 1. Hitting
// max_iter returns the last iterate with converged = false.
FullFit FitFullGlm(const std::vector<DesignBlock>& blocks,
                   const TargetVector& y, const FamilySpec& family,
                   double tol = kDefaultTolerance,
                   int max_iter = kDefaultMaxIterations);

FullFit FitFullGlm(const Matrix& x, const TargetVector& y,
                   const FamilySpec& family, double tol = kDefaultTolerance,
                   int max_iter = kDefaultMaxIterations);

}  // namespace splitglm

#endif  // SPLITGLM_CORE_FULL_FIT_H_
