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

#ifndef SPLITGLM_BCD_DESCENT_H_
#define SPLITGLM_BCD_DESCENT_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"
#include "splitglm/core/least_squares.h"

namespace splitglm::bcd {

struct DescentConfig {
  double tolerance = 1e-8;  // on max |delta beta| over one sweep
  int max_sweeps = 10000;
  int min_sweeps = 1;
  FamilySpec family = FamilySpec::Gaussian();

  void Validate() const;
};

struct DescentTracePoint {
  int sweep_index = 0;
  Vector coefficients_snapshot;
  double max_delta = 0.0;
};

struct DescentResult {
  // Cyclic descent: one entry holding all coefficients. Block descent: one
  // entry per block, in block order.
  std::vector<Vector> coefficients;
  std::vector<Vector> predictions;
  std::vector<DescentTracePoint> trace;
  bool converged = false;
  int sweeps = 0;
  // Sweeps that still moved the coefficients, i.e. sweeps before the first
  // sub-tolerance sweep. Unaffected by min_sweeps.
  int active_sweeps = 0;

  Vector Concatenated() const;
};

// Input to one block's least-squares step: the working residual
// (z minus the contribution of all other blocks) and IRLS weights at
// eta = own + others.
struct WorkingResidual {
  Vector residual;
  Vector weights;  // empty for Gaussian (unit weights)
};

WorkingResidual BlockWorkingResidual(const FamilySpec& family,
                                     const TargetVector& y,
                                     const Vector& own_prediction,
                                     const Vector& others_prediction);

struct BlockUpdate {
  Vector coefficients;
  Vector prediction;
};

// One block step. Both block_descent and each protocol party go through this
// function, so the two paths share arithmetic exactly.
BlockUpdate UpdateBlock(const BlockSolver& solver, const FamilySpec& family,
                        const TargetVector& y, const Vector& own_prediction,
                        const Vector& others_prediction);

// Classic per-coordinate descent started from the marginal coefficients.
// Gaussian family only.
DescentResult CyclicDescent(const DesignBlock& block, const TargetVector& y,
                            const DescentConfig& cfg);

// Round-robin block coordinate descent from zero coefficients. Convergence
// requires every block's delta below tolerance in the same sweep and at least
// min_sweeps sweeps.
DescentResult BlockDescent(const std::vector<DesignBlock>& blocks,
                           const TargetVector& y, const DescentConfig& cfg);

// CSV: sweep_index,max_delta,<coefficient names...>
void WriteTraceCsv(std::ostream& out, const std::vector<DescentTracePoint>& trace,
                   const std::vector<std::string>& coefficient_names);

}  // namespace splitglm::bcd

#endif  // SPLITGLM_BCD_DESCENT_H_
