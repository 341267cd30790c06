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

#include "splitglm/cli/synthetic.h"

#include <cmath>
#include <random>

#include "splitglm/error.h"

namespace splitglm::cli {

SyntheticData GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.n < 2 || spec.p < 1) {
    Fail(ErrorCode::kInvalidArgument, "need n >= 2 and p >= 1");
  }
  if (!(spec.covariance >= 0.0 && spec.covariance < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "covariance must be in [0, 1)");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shared = std::sqrt(spec.covariance);
  const double own = std::sqrt(1.0 - spec.covariance);

  SyntheticData out;
  out.x.resize(spec.n, spec.p);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    const double factor = normal(rng);
    for (Eigen::Index j = 0; j < spec.p; ++j) {
      out.x(i, j) = own * normal(rng) + shared * factor;
    }
  }
  out.x.rowwise() -= out.x.colwise().mean();

  out.beta.resize(spec.p);
  for (Eigen::Index j = 0; j < spec.p; ++j) out.beta[j] = normal(rng);
  // Population covariance (1 - c) I + c 11^T.
  const double sum = out.beta.sum();
  const double signal = (1.0 - spec.covariance) * out.beta.squaredNorm() +
                        spec.covariance * sum * sum;
  out.beta /= std::sqrt(signal);
  const Vector eta = out.x * out.beta;

  out.y.resize(spec.n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (spec.family.family()) {
    case Family::kGaussian:
      for (Eigen::Index i = 0; i < spec.n; ++i) out.y[i] = eta[i] + normal(rng);
      out.y.array() -= out.y.mean();
      break;
    case Family::kBinomial:
      for (Eigen::Index i = 0; i < spec.n; ++i) {
        out.y[i] = unit(rng) < 1.0 / (1.0 + std::exp(-eta[i])) ? 1.0 : 0.0;
      }
      break;
    case Family::kPoisson:
      for (Eigen::Index i = 0; i < spec.n; ++i) {
        std::poisson_distribution<int> count(std::exp(0.5 * eta[i]));
        out.y[i] = count(rng);
      }
      break;
  }
  return out;
}

PartySplit SplitBetweenParties(const SyntheticData& data,
                               const FamilySpec& family,
                               Eigen::Index initiator_features) {
  const Eigen::Index p = data.x.cols();
  if (initiator_features < 0 || initiator_features > p) {
    Fail(ErrorCode::kInvalidArgument, "bad feature split");
  }
  const auto names = DefaultColumnNames(p);
  const std::vector<std::string> a_names(names.begin(),
                                         names.begin() + initiator_features);
  const std::vector<std::string> b_names(names.begin() + initiator_features,
                                         names.end());
  const Matrix xa = data.x.leftCols(initiator_features);
  const Matrix xb = data.x.rightCols(p - initiator_features);
  DesignBlock a(xa, a_names, true, Vector::Zero(xa.cols()));
  if (!family.is_gaussian()) a = WithIntercept(a);
  DesignBlock b(xb, b_names, true, Vector::Zero(xb.cols()));
  return {std::move(a), std::move(b), TargetVector(data.y, family)};
}

PartySplit SplitBetweenParties(const SyntheticData& data,
                               const FamilySpec& family) {
  return SplitBetweenParties(data, family, (data.x.cols() + 1) / 2);
}

}  // namespace splitglm::cli
