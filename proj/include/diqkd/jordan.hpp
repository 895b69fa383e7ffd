// Copyright 2026 The diqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "diqkd/linalg.hpp"

namespace diqkd {

// One 2x2 block of the simultaneous block-diagonalisation of two +-1
// observables.  In the block basis A0 = Z and A1 = cos(2 angle) Z +
// sin(2 angle) X, up to the numerical residual.  A genuinely 1-dimensional
// invariant subspace (the observables commute there) is padded to 2x2: the
// second basis column is zero and both block observables are the scalar
// times the identity.
struct JordanBlock {
  std::size_t label;
  double angle;  // in [0, pi/2]
  bool padded;
  ComplexMatrix basis;     // dim x 2, orthonormal columns (column 1 zero when padded)
  BinaryObservable a0;     // 2 x 2
  BinaryObservable a1;     // 2 x 2

  // Projector onto the invariant subspace (rank 1 when padded).
  ComplexMatrix projector() const { return basis * basis.adjoint(); }
};

struct BlockDecomposition {
  Eigen::Index dim = 0;
  std::vector<JordanBlock> blocks;

  // Stacked isometry F: (2 * blocks) x dim, F F^dag = projector onto the
  // range (identity when no block is padded).
  ComplexMatrix isometry() const;

  // Direct sum of the given per-block 2x2 matrices.
  ComplexMatrix direct_sum(int which) const;  // which: 0 -> a0, 1 -> a1

  // max over a of || F A_a F^dag - P (direct sum) P ||_F with P = F F^dag.
  // The range projection makes the residual meaningful for padded blocks;
  // without padding it coincides with the unprojected residual.
  double reconstruction_residual(const BinaryObservable& a0,
                                 const BinaryObservable& a1) const;

  // max over a of || F^dag (direct sum) F - A_a ||_F.
  double pullback_residual(const BinaryObservable& a0,
                           const BinaryObservable& a1) const;
};

// Simultaneous block-diagonalisation of two +-1 observables on the same
// space: every pair of such observables splits into 2x2 blocks (where A0 = Z,
// A1 = cos(2t) Z + sin(2t) X in the block basis) plus commuting 1x1 pieces.
// Eigenvalues of ((A0+A1)/2)^2 within 1e-7 of each other are grouped.
BlockDecomposition block_diagonalize(const BinaryObservable& a0,
                                     const BinaryObservable& a1);

// One component of a decomposition of a bipartite strategy into two-qubit
// strategies.
struct QubitStrategyComponent {
  double weight;
  DensityOperator state;  // two-qubit
  std::array<BinaryObservable, 3> alice;  // settings 0, 1 and the key setting 2
  std::array<BinaryObservable, 2> bob;
  std::size_t alice_label;
  std::size_t bob_label;
  // Frobenius distance between the compressed key observable and its +-1
  // rounding; zero exactly when the key observable respects the block
  // structure.
  double key_binarization_residual;
};

struct QubitStrategyMixture {
  std::vector<QubitStrategyComponent> components;

  double total_weight() const;
};

// Decomposes an arbitrary finite-dimensional strategy (state on
// dim_a * dim_b, two CHSH observables plus a key observable for Alice, two
// observables for Bob) into a mixture of two-qubit strategies, one component
// per pair of local blocks with non-negligible weight.  Statistics of
// settings 0 and 1 are reproduced exactly because the block projectors
// commute with those observables; the key setting is compressed blockwise
// and rounded to +-1, which is exact if and only if the key observable
// commutes with Alice's block projectors (see key_binarization_residual).
QubitStrategyMixture reduce_strategy(const DensityOperator& state,
                                     const std::array<BinaryObservable, 2>& alice,
                                     const BinaryObservable& alice_key,
                                     const std::array<BinaryObservable, 2>& bob,
                                     Eigen::Index dim_a, Eigen::Index dim_b);

// Joint outcome distribution {P(++), P(+-), P(-+), P(--)} of a pair of
// observables on a bipartite state.
std::array<double, 4> joint_distribution(const DensityOperator& state,
                                         const BinaryObservable& alice,
                                         const BinaryObservable& bob,
                                         Eigen::Index dim_a, Eigen::Index dim_b);

// Same distribution evaluated on a mixture.
std::array<double, 4> mixture_distribution(const QubitStrategyMixture& mix,
                                           int alice_setting, int bob_setting);

}  // namespace diqkd
