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

#ifndef SPLITGLM_CLI_SYNTHETIC_H_
#define SPLITGLM_CLI_SYNTHETIC_H_

#include <cstdint>

#include "splitglm/core/design_block.h"
#include "splitglm/core/family.h"

namespace splitglm::cli {

// Equicorrelated normal features (unit variance, common off-diagonal
// `covariance`), random coefficients scaled so that var(X beta) = 1.
//   gaussian: y = X beta + N(0, 1), then centered
//   binomial: y ~ Bernoulli(logistic(X beta))
//   poisson:  y ~ Poisson(exp(X beta / 2))
struct SyntheticSpec {
  FamilySpec family = FamilySpec::Gaussian();
  Eigen::Index n = 1000;
  Eigen::Index p = 10;
  double covariance = 0.1;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Matrix x;  // centered, n x p
  Vector y;
  Vector beta;
};

SyntheticData GenerateSynthetic(const SyntheticSpec& spec);

// Feature names are x1..xp. The initiator gets the first ceil(p/2) features
// and, for non-Gaussian families, the intercept column.
struct PartySplit {
  DesignBlock initiator;
  DesignBlock responder;
  TargetVector y;
};

PartySplit SplitBetweenParties(const SyntheticData& data,
                               const FamilySpec& family,
                               Eigen::Index initiator_features);
PartySplit SplitBetweenParties(const SyntheticData& data,
                               const FamilySpec& family);

}  // namespace splitglm::cli

#endif  // SPLITGLM_CLI_SYNTHETIC_H_
