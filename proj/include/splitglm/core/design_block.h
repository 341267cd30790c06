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

#ifndef SPLITGLM_CORE_DESIGN_BLOCK_H_
#define SPLITGLM_CORE_DESIGN_BLOCK_H_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace splitglm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr char kInterceptName[] = "(Intercept)";

// One party's feature columns over the shared, identically ordered rows.
//
// When `centered()` is set every non-intercept column has mean zero. An
// intercept column (all ones, named kInterceptName) is only ever present in
// the initiator's block for non-Gaussian families.
class DesignBlock {
 public:
  // Validates shape, finiteness, name uniqueness and the centering invariant.
  DesignBlock(Matrix values, std::vector<std::string> column_names,
              bool centered, Vector column_means,
              std::optional<Vector> column_scales = std::nullopt);

  const Matrix& values() const { return values_; }
  const std::vector<std::string>& column_names() const { return names_; }
  bool centered() const { return centered_; }
  const Vector& column_means() const { return means_; }
  const std::optional<Vector>& column_scales() const { return scales_; }

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  bool has_intercept() const;

 private:
  Matrix values_;
  std::vector<std::string> names_;
  bool centered_;
  Vector means_;
  std::optional<Vector> scales_;
};

// Subtracts column means and, when `standardize` is set, divides by the
// sample standard deviation (N - 1 denominator).
DesignBlock CenterBlock(const Matrix& raw, bool standardize,
                        std::vector<std::string> column_names = {});

// Prepends an all-ones intercept column.
DesignBlock WithIntercept(const DesignBlock& block);

// Horizontal concatenation in the given order.
Matrix ConcatenateBlocks(const std::vector<DesignBlock>& blocks);

std::vector<std::string> DefaultColumnNames(Eigen::Index count,
                                            const std::string& prefix = "x");

}  // namespace splitglm

#endif  // SPLITGLM_CORE_DESIGN_BLOCK_H_
