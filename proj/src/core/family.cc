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

#include "splitglm/core/family.h"

#include <algorithm>
#include <cmath>

#include "splitglm/error.h"

namespace splitglm {
namespace {

double Logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double ClampProbability(double mu) {
  return std::clamp(mu, kMuClamp, 1.0 - kMuClamp);
}

}  // namespace

FamilySpec FamilySpec::Parse(std::string_view name) {
  if (name == "gaussian") return Gaussian();
  if (name == "binomial") return Binomial();
  if (name == "poisson") return Poisson();
  Fail(ErrorCode::kInvalidArgument, "unknown family '" + std::string(name) + "'");
}

Link FamilySpec::link() const {
  switch (family_) {
    case Family::kGaussian: return Link::kIdentity;
    case Family::kBinomial: return Link::kLogit;
    case Family::kPoisson: return Link::kLog;
  }
  return Link::kIdentity;
}

std::string_view FamilySpec::name() const {
  switch (family_) {
    case Family::kGaussian: return "gaussian";
    case Family::kBinomial: return "binomial";
    case Family::kPoisson: return "poisson";
  }
  return "unknown";
}

double FamilySpec::Mean(double eta) const {
  switch (family_) {
    case Family::kGaussian: return eta;
    case Family::kBinomial: return Logistic(eta);
    case Family::kPoisson: return std::exp(eta);
  }
  return eta;
}

double FamilySpec::MeanDerivative(double eta) const {
  switch (family_) {
    case Family::kGaussian: return 1.0;
    case Family::kBinomial: {
      // Symmetric in eta; mu * (1 - mu) cancels badly in the upper tail.
      const double e = std::exp(-std::abs(eta));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Family::kPoisson: return std::exp(eta);
  }
  return 1.0;
}

double FamilySpec::Variance(double mu) const {
  switch (family_) {
    case Family::kGaussian: return 1.0;
    case Family::kBinomial: return mu * (1.0 - mu);
    case Family::kPoisson: return mu;
  }
  return 1.0;
}

TargetVector::TargetVector(Vector values, FamilySpec family)
    : values_(std::move(values)), family_(family) {
  if (!values_.allFinite()) {
    Fail(ErrorCode::kNonFinite, "target contains non-finite values");
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    switch (family_.family()) {
      case Family::kGaussian:
        break;
      case Family::kBinomial:
        if (v != 0.0 && v != 1.0) {
          Fail(ErrorCode::kInvalidArgument,
               "binomial target must be 0 or 1 (row " + std::to_string(i) +
                   ")");
        }
        break;
      case Family::kPoisson:
        if (v < 0.0 || v != std::floor(v)) {
          Fail(ErrorCode::kInvalidArgument,
               "poisson target must be a non-negative integer (row " +
                   std::to_string(i) + ")");
        }
        break;
    }
  }
}

WorkingSet UpdateWorkingSet(const FamilySpec& family, const TargetVector& y,
                            const Vector& eta) {
  if (eta.size() != y.size()) {
    Fail(ErrorCode::kShapeMismatch, "eta and target lengths differ");
  }
  if (!eta.allFinite()) {
    Fail(ErrorCode::kNonFinite, "linear predictor contains non-finite values");
  }
  const Eigen::Index n = eta.size();
  WorkingSet ws;
  ws.eta = eta;
  if (family.is_gaussian()) {
    ws.mu = eta;
    ws.weights = Vector::Ones(n);
    ws.working_response = y.values();
    return ws;
  }
  ws.mu.resize(n);
  ws.weights.resize(n);
  ws.working_response.resize(n);
  const Vector& yv = y.values();
  for (Eigen::Index i = 0; i < n; ++i) {
    double mu = family.Mean(eta[i]);
    double dmu = 0.0;
    if (family.family() == Family::kBinomial) {
      mu = ClampProbability(mu);
      dmu = mu * (1.0 - mu);
    } else {
      mu = std::max(mu, kMuClamp);
      dmu = mu;
    }
    const double w = dmu * dmu / family.Variance(mu);
    ws.mu[i] = mu;
    ws.weights[i] = w;
    ws.working_response[i] = eta[i] + (yv[i] - mu) / dmu;
  }
  if (!ws.weights.allFinite() || !ws.working_response.allFinite()) {
    Fail(ErrorCode::kNonFinite, "working set overflowed");
  }
  return ws;
}

Vector WorkingWeights(const FamilySpec& family, const Vector& eta) {
  if (family.is_gaussian()) return Vector::Ones(eta.size());
  Vector w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    double mu = family.Mean(eta[i]);
    if (family.family() == Family::kBinomial) {
      mu = ClampProbability(mu);
      w[i] = mu * (1.0 - mu);
    } else {
      w[i] = std::max(mu, kMuClamp);
    }
  }
  return w;
}

}  // namespace splitglm
