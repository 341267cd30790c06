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

#ifndef SPLITGLM_CORE_FAMILY_H_
#define SPLITGLM_CORE_FAMILY_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "splitglm/core/design_block.h"

namespace splitglm {

enum class Family : std::uint8_t { kGaussian = 0, kBinomial = 1, kPoisson = 2 };
enum class Link : std::uint8_t { kIdentity = 0, kLogit = 1, kLog = 2 };

// Binomial means are kept inside [kMuClamp, 1 - kMuClamp] so that weights and
// working responses stay finite under quasi-separation.
inline constexpr double kMuClamp = 1e-10;

// A GLM family with its canonical link. Only canonical pairings exist.
class FamilySpec {
 public:
  static FamilySpec Gaussian() { return FamilySpec(Family::kGaussian); }
  static FamilySpec Binomial() { return FamilySpec(Family::kBinomial); }
  static FamilySpec Poisson() { return FamilySpec(Family::kPoisson); }
  static FamilySpec FromFamily(Family family) { return FamilySpec(family); }
  // Accepts "gaussian", "binomial", "poisson".
  static FamilySpec Parse(std::string_view name);

  Family family() const { return family_; }
  Link link() const;
  std::string_view name() const;
  bool is_gaussian() const { return family_ == Family::kGaussian; }

  double Mean(double eta) const;
  double MeanDerivative(double eta) const;
  double Variance(double mu) const;

  bool operator==(const FamilySpec&) const = default;

 private:
  explicit FamilySpec(Family family) : family_(family) {}
  Family family_;
};

// Response vector tagged with the family it was validated for.
class TargetVector {
 public:
  TargetVector(Vector values, FamilySpec family);

  const Vector& values() const { return values_; }
  const FamilySpec& family() const { return family_; }
  Eigen::Index size() const { return values_.size(); }

 private:
  Vector values_;
  FamilySpec family_;
};

// IRLS quantities at a given linear predictor.
struct WorkingSet {
  Vector eta;
  Vector mu;
  Vector weights;
  Vector working_response;
};

// z = eta + (y - mu) / (dmu/deta), w = (dmu/deta)^2 / var(mu).
// Gaussian/identity returns z = y and unit weights.
WorkingSet UpdateWorkingSet(const FamilySpec& family, const TargetVector& y,
                            const Vector& eta);

// Weights only, for callers that do not need the working response.
Vector WorkingWeights(const FamilySpec& family, const Vector& eta);

}  // namespace splitglm

#endif  // SPLITGLM_CORE_FAMILY_H_
