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

#include <array>

#include "diqkd/linalg.hpp"

namespace diqkd {

// A bipartite two-setting strategy: shared state on dim_a * dim_b and a pair
// of +-1 observables per party.
struct ChshStrategy {
  DensityOperator state;
  std::array<BinaryObservable, 2> alice;
  std::array<BinaryObservable, 2> bob;
  Eigen::Index dim_a;
  Eigen::Index dim_b;

  void validate() const;
};

// Correlator E_ab = tr(rho A_a (x) B_b).
double correlator(const ChshStrategy& s, int a, int b);

// S = E_00 + E_01 + E_10 - E_11.
double chsh_s(const ChshStrategy& s);

// Success probability of the game x XOR y = a.b under uniform settings,
// computed from spectral projectors rather than correlators so that the
// identity S = 8p - 4 is a genuine cross-check.
double chsh_p(const ChshStrategy& s);

// Measurement directions confined to the Z-X plane: angle t means
// cos(t) Z + sin(t) X.
struct PlanarAngles {
  std::array<double, 2> alice;
  std::array<double, 2> bob;
};

ComplexMatrix planar_observable(double angle);

// Two-qubit strategy from a shared state and planar angles.
ChshStrategy planar_qubit_strategy(const DensityOperator& state,
                                   const PlanarAngles& angles);

// 3x3 matrix T_ij = tr(rho sigma_i (x) sigma_j), i,j over (x,y,z).
Eigen::Matrix3d pauli_correlation_matrix(const DensityOperator& state);

// Closed-form maximum of S over all measurements: 2 sqrt(u1 + u2) where
// u1, u2 are the two largest eigenvalues of T^T T.
double s_max_horodecki(const DensityOperator& state);

struct SMaxResult {
  double s;
  // Angles in the locally rotated frames in which the optimal measurement
  // plane is Z-X.
  PlanarAngles angles;
  // Frame rotations (one per party, det +1).  A planar direction n(t) in the
  // rotated frame corresponds to the Bloch direction R * n(t) on the
  // original state.
  Eigen::Matrix3d alice_frame;
  Eigen::Matrix3d bob_frame;
};

// Numerical maximisation of S for a two-qubit state: align each party's
// frame with the top singular directions of the correlation matrix, then run
// a multi-start exact coordinate ascent over the four planar angles.
SMaxResult s_max_optimize(const DensityOperator& state);

// Builds the strategy on the original state whose observables realise the
// optimiser's angles, so that chsh_s(realize_s_max(state, r)) == r.s.
ChshStrategy realize_s_max(const DensityOperator& state, const SMaxResult& r);

// The paper-standard optimal qubit strategy on |phi+>:
//   Alice: A0 = X, A1 = Y, and a third key setting A2 = (X+Y)/sqrt(2);
//   Bob:   B0 = (X-Y)/sqrt(2), B1 = (X+Y)/sqrt(2).
// B0 is the key setting and is perfectly correlated with A2.  Gives
// S = 2 sqrt(2) on |phi+>.
struct IdealStrategy {
  ChshStrategy chsh;
  BinaryObservable alice_key;
};
IdealStrategy ideal_qubit_strategy(const DensityOperator& state);

}  // namespace diqkd
