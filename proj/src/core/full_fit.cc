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

#include "splitglm/core/full_fit.h"

#include <cmath>

#include "splitglm/core/least_squares.h"
#include "splitglm/error.h"

namespace splitglm {

FullFit FitFullGlm(const std::vector<DesignBlock>& blocks,
                   const TargetVector& y, const FamilySpec& family, double tol,
                   int max_iter) {
  return FitFullGlm(ConcatenateBlocks(blocks), y, family, tol, max_iter);
}

FullFit FitFullGlm(const Matrix& x, const TargetVector& y,
                   const FamilySpec& family, double tol, int max_iter) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (y.size() != n) Fail(ErrorCode::kShapeMismatch, "target length mismatch");
  if (p >= n) Fail(ErrorCode::kDfExhausted, "need P < N for a full fit");
  if (p == 0) Fail(ErrorCode::kInvalidArgument, "design has no columns");

  FullFit fit;
  if (family.is_gaussian()) {
    const Vector ones = Vector::Ones(n);
    fit.coefficients = WeightedLsSolve(x, y.values(), ones);
    fit.linear_predictor = x * fit.coefficients;
    const Vector residual = y.values() - fit.linear_predictor;
    fit.sigma2 = residual.squaredNorm() / static_cast<double>(n - p);
    fit.standard_errors =
        (fit.sigma2 * InverseGramDiagonal(x, ones).array()).sqrt();
    fit.iterations = 1;
    fit.converged = true;
    return fit;
  }

  Vector beta = Vector::Zero(p);
  Vector eta = Vector::Zero(n);
  for (int iter = 1; iter <= max_iter; ++iter) {
    const WorkingSet ws = UpdateWorkingSet(family, y, eta);
    Vector next = WeightedLsSolve(x, ws.working_response, ws.weights);
    const double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = std::move(next);
    eta = x * beta;
    fit.iterations = iter;
    if (delta < tol) {
      fit.converged = true;
      break;
    }
  }
  fit.coefficients = beta;
  fit.linear_predictor = eta;
  fit.sigma2 = 1.0;
  fit.standard_errors =
      InverseGramDiagonal(x, WorkingWeights(family, eta)).array().sqrt();
  return fit;
}

}  // namespace splitglm
