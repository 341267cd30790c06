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

#include "splitglm/core/design_block.h"

#include <cmath>
#include <set>

#include "splitglm/error.h"

namespace splitglm {
namespace {

bool IsInterceptColumn(const Matrix& values, Eigen::Index j,
                       const std::string& name) {
  return name == kInterceptName && (values.col(j).array() == 1.0).all();
}

}  // namespace

DesignBlock::DesignBlock(Matrix values, std::vector<std::string> column_names,
                         bool centered, Vector column_means,
                         std::optional<Vector> column_scales)
    : values_(std::move(values)),
      names_(std::move(column_names)),
      centered_(centered),
      means_(std::move(column_means)),
      scales_(std::move(column_scales)) {
  if (values_.rows() < 2) {
    Fail(ErrorCode::kShapeMismatch,
         "design block needs at least 2 rows");
  }
  if (!values_.allFinite()) {
    Fail(ErrorCode::kNonFinite, "design block contains non-finite entries");
  }
  if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
    Fail(ErrorCode::kShapeMismatch, "column name count does not match block");
  }
  if (means_.size() != values_.cols() ||
      (scales_ && scales_->size() != values_.cols())) {
    Fail(ErrorCode::kShapeMismatch, "column metadata length mismatch");
  }
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) {
      Fail(ErrorCode::kInvalidArgument, "duplicate column name '" + name + "'");
    }
  }
  if (centered_) {
    const double n = static_cast<double>(values_.rows());
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (IsInterceptColumn(values_, j, names_[j])) continue;
      const double mean = values_.col(j).mean();
      const double sd =
          std::sqrt((values_.col(j).array() - mean).square().sum() / (n - 1));
      if (std::abs(mean) > 1e-10 * std::max(sd, 1.0)) {
        Fail(ErrorCode::kInvalidArgument,
             "column '" + names_[j] + "' is flagged centered but has mean " +
                 std::to_string(mean));
      }
    }
  }
}

bool DesignBlock::has_intercept() const {
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    if (IsInterceptColumn(values_, j, names_[j])) return true;
  }
  return false;
}

std::vector<std::string> DefaultColumnNames(Eigen::Index count,
                                            const std::string& prefix) {
  std::vector<std::string> names;
  names.reserve(count);
  for (Eigen::Index j = 0; j < count; ++j) {
    names.push_back(prefix + std::to_string(j + 1));
  }
  return names;
}

DesignBlock CenterBlock(const Matrix& raw, bool standardize,
                        std::vector<std::string> column_names) {
  if (raw.rows() < 2 || raw.cols() < 1) {
    Fail(ErrorCode::kShapeMismatch,
         "need at least 2 rows and 1 column to center");
  }
  if (!raw.allFinite()) {
    Fail(ErrorCode::kNonFinite, "raw matrix contains non-finite entries");
  }
  if (column_names.empty()) column_names = DefaultColumnNames(raw.cols());
  if (static_cast<Eigen::Index>(column_names.size()) != raw.cols()) {
    Fail(ErrorCode::kShapeMismatch, "column name count does not match matrix");
  }

  const double n = static_cast<double>(raw.rows());
  Vector means = raw.colwise().mean().transpose();
  Matrix values = raw.rowwise() - means.transpose();
  std::optional<Vector> scales;
  if (standardize) {
    Vector sd(raw.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      sd[j] = std::sqrt(values.col(j).squaredNorm() / (n - 1));
      // Relative test: a column of identical large values still counts as
      // constant after rounding in the mean.
      if (!(sd[j] > 1e-12 * std::max(1.0, std::abs(means[j])))) {
        Fail(ErrorCode::kConstantColumn,
             "column '" + column_names[j] + "' has zero variance");
      }
      values.col(j) /= sd[j];
    }
    scales = std::move(sd);
  }
  // Second pass removes the O(eps) mean left by the first subtraction.
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    values.col(j).array() -= values.col(j).mean();
  }
  return DesignBlock(std::move(values), std::move(column_names), true,
                     std::move(means), std::move(scales));
}

DesignBlock WithIntercept(const DesignBlock& block) {
  if (block.has_intercept()) return block;
  Matrix values(block.rows(), block.cols() + 1);
  values.col(0).setOnes();
  values.rightCols(block.cols()) = block.values();
  std::vector<std::string> names;
  names.reserve(block.cols() + 1);
  names.emplace_back(kInterceptName);
  names.insert(names.end(), block.column_names().begin(),
               block.column_names().end());
  Vector means(block.cols() + 1);
  means[0] = 1.0;
  means.tail(block.cols()) = block.column_means();
  std::optional<Vector> scales;
  if (block.column_scales()) {
    scales = Vector(block.cols() + 1);
    (*scales)[0] = 1.0;
    scales->tail(block.cols()) = *block.column_scales();
  }
  return DesignBlock(std::move(values), std::move(names), block.centered(),
                     std::move(means), std::move(scales));
}

Matrix ConcatenateBlocks(const std::vector<DesignBlock>& blocks) {
  if (blocks.empty()) {
    Fail(ErrorCode::kInvalidArgument, "no blocks to concatenate");
  }
  const Eigen::Index n = blocks.front().rows();
  Eigen::Index total = 0;
  for (const auto& block : blocks) {
    if (block.rows() != n) {
      Fail(ErrorCode::kShapeMismatch, "blocks disagree on row count");
    }
    total += block.cols();
  }
  Matrix combined(n, total);
  Eigen::Index offset = 0;
  for (const auto& block : blocks) {
    combined.middleCols(offset, block.cols()) = block.values();
    offset += block.cols();
  }
  return combined;
}

}  // namespace splitglm
