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

#include "splitglm/bcd/descent.h"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "splitglm/error.h"

namespace splitglm::bcd {
namespace {

int ActiveSweeps(const std::vector<DescentTracePoint>& trace, double tol) {
  for (const auto& point : trace) {
    if (point.max_delta < tol) return point.sweep_index - 1;
  }
  return static_cast<int>(trace.size());
}

}  // namespace

void DescentConfig::Validate() const {
  if (!(tolerance > 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "tolerance must be positive");
  }
  if (max_sweeps < 1 || min_sweeps < 0 || min_sweeps > max_sweeps) {
    Fail(ErrorCode::kInvalidArgument, "need 0 <= min_sweeps <= max_sweeps");
  }
}

Vector DescentResult::Concatenated() const {
  Eigen::Index total = 0;
  for (const auto& c : coefficients) total += c.size();
  Vector out(total);
  Eigen::Index offset = 0;
  for (const auto& c : coefficients) {
    out.segment(offset, c.size()) = c;
    offset += c.size();
  }
  return out;
}

WorkingResidual BlockWorkingResidual(const FamilySpec& family,
                                     const TargetVector& y,
                                     const Vector& own_prediction,
                                     const Vector& others_prediction) {
  if (family.is_gaussian()) {
    return {y.values() - others_prediction, Vector()};
  }
  const Vector eta = own_prediction + others_prediction;
  WorkingSet ws = UpdateWorkingSet(family, y, eta);
  return {ws.working_response - others_prediction, std::move(ws.weights)};
}

BlockUpdate UpdateBlock(const BlockSolver& solver, const FamilySpec& family,
                        const TargetVector& y, const Vector& own_prediction,
                        const Vector& others_prediction) {
  const WorkingResidual wr =
      BlockWorkingResidual(family, y, own_prediction, others_prediction);
  BlockUpdate update;
  update.coefficients = wr.weights.size() == 0
                            ? solver.Solve(wr.residual)
                            : solver.Solve(wr.residual, wr.weights);
  update.prediction = solver.design() * update.coefficients;
  return update;
}

DescentResult CyclicDescent(const DesignBlock& block, const TargetVector& y,
                            const DescentConfig& cfg) {
  cfg.Validate();
  if (!cfg.family.is_gaussian()) {
    Fail(ErrorCode::kInvalidArgument,
         "cyclic coordinate descent is implemented for the Gaussian family");
  }
  if (y.size() != block.rows()) {
    Fail(ErrorCode::kShapeMismatch, "target length mismatch");
  }
  const Matrix& x = block.values();
  const Eigen::Index p = x.cols();
  if (p == 0) Fail(ErrorCode::kInvalidArgument, "block has no columns");
  const Vector ones = Vector::Ones(x.rows());

  Vector sq(p);
  Vector beta(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    beta[j] = MarginalCoefficient(x.col(j), y.values(), ones);
    sq[j] = x.col(j).squaredNorm();
  }
  Vector residual = y.values() - x * beta;

  DescentResult result;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      // residual + x_j beta_j is y - X_{-j} beta_{-j}.
      const double updated =
          beta[j] + x.col(j).dot(residual) / sq[j];
      const double delta = updated - beta[j];
      residual.noalias() -= delta * x.col(j);
      beta[j] = updated;
      max_delta = std::max(max_delta, std::abs(delta));
    }
    result.trace.push_back({sweep, beta, max_delta});
    result.sweeps = sweep;
    if (max_delta < cfg.tolerance && sweep >= cfg.min_sweeps) {
      result.converged = true;
      break;
    }
  }
  result.coefficients = {beta};
  result.predictions = {x * beta};
  // Marginal initialization means a sub-tolerance first sweep is already
  // converged; count the sweep that confirmed it.
  result.active_sweeps = std::max(1, ActiveSweeps(result.trace, cfg.tolerance));
  return result;
}

DescentResult BlockDescent(const std::vector<DesignBlock>& blocks,
                           const TargetVector& y, const DescentConfig& cfg) {
  cfg.Validate();
  if (blocks.empty()) Fail(ErrorCode::kInvalidArgument, "no blocks");
  const Eigen::Index n = blocks.front().rows();
  Eigen::Index total_p = 0;
  for (const auto& b : blocks) {
    if (b.rows() != n) {
      Fail(ErrorCode::kShapeMismatch, "blocks disagree on row count");
    }
    total_p += b.cols();
  }
  if (y.size() != n) Fail(ErrorCode::kShapeMismatch, "target length mismatch");
  if (total_p >= n) Fail(ErrorCode::kDfExhausted, "need total P < N");

  std::vector<BlockSolver> solvers;
  solvers.reserve(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    try {
      solvers.emplace_back(blocks[k].values());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingularGram) throw;
      Fail(ErrorCode::kSingularGram,
           "block " + std::to_string(k) + ": " + e.what());
    }
  }

  const std::size_t k_blocks = blocks.size();
  DescentResult result;
  result.coefficients.resize(k_blocks);
  result.predictions.assign(k_blocks, Vector::Zero(n));
  for (std::size_t k = 0; k < k_blocks; ++k) {
    result.coefficients[k] = Vector::Zero(blocks[k].cols());
  }

  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (std::size_t k = 0; k < k_blocks; ++k) {
      Vector others = Vector::Zero(n);
      for (std::size_t j = 0; j < k_blocks; ++j) {
        if (j != k) others += result.predictions[j];
      }
      BlockUpdate update = UpdateBlock(solvers[k], cfg.family, y,
                                       result.predictions[k], others);
      max_delta = std::max(
          max_delta,
          update.coefficients.size() == 0
              ? 0.0
              : (update.coefficients - result.coefficients[k])
                    .cwiseAbs()
                    .maxCoeff());
      result.coefficients[k] = std::move(update.coefficients);
      result.predictions[k] = std::move(update.prediction);
    }
    result.trace.push_back({sweep, result.Concatenated(), max_delta});
    result.sweeps = sweep;
    if (max_delta < cfg.tolerance && sweep >= cfg.min_sweeps) {
      result.converged = true;
      break;
    }
  }
  result.active_sweeps = ActiveSweeps(result.trace, cfg.tolerance);
  return result;
}

void WriteTraceCsv(std::ostream& out, const std::vector<DescentTracePoint>& trace,
                   const std::vector<std::string>& coefficient_names) {
  out << "sweep_index,max_delta";
  for (const auto& name : coefficient_names) out << ',' << name;
  out << '\n' << std::setprecision(17);
  for (const auto& point : trace) {
    out << point.sweep_index << ',' << point.max_delta;
    for (Eigen::Index j = 0; j < point.coefficients_snapshot.size(); ++j) {
      out << ',' << point.coefficients_snapshot[j];
    }
    out << '\n';
  }
}

}  // namespace splitglm::bcd
