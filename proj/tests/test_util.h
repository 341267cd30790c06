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

#ifndef SPLITGLM_TESTS_TEST_UTIL_H_
#define SPLITGLM_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "splitglm/core/design_block.h"

namespace splitglm::testing {

Matrix RandomNormal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
Vector RandomNormal(Eigen::Index n, std::mt19937_64& rng);

// Centered normal features with pairwise covariance c (one shared factor).
Matrix Equicorrelated(Eigen::Index n, Eigen::Index p, double c,
                      std::mt19937_64& rng);

// Column-centered copy.
Matrix Centered(const Matrix& x);

// Brute-force oracles built on explicit Gram inversion.
Matrix GramInverse(const Matrix& x);
Vector NormalEquationsSolve(const Matrix& x, const Vector& y);
Matrix HatMatrix(const Matrix& x);

DesignBlock Block(const Matrix& centered_values, const std::string& prefix = "x");

// Two centered blocks whose columns are mutually orthogonal across blocks.
struct OrthogonalPair {
  Matrix a;
  Matrix b;
};
OrthogonalPair MakeOrthogonalBlocks(Eigen::Index n, Eigen::Index pa,
                                    Eigen::Index pb, std::mt19937_64& rng);

double MaxRelativeError(const Vector& got, const Vector& want);

}  // namespace splitglm::testing

#endif  // SPLITGLM_TESTS_TEST_UTIL_H_
