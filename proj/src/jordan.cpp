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

#include "diqkd/jordan.hpp"

#include <algorithm>
#include <cmath>

namespace diqkd {

namespace {

constexpr double group_tol = 1e-7;

// Rounds a 2x2 Hermitian matrix to the nearest +-1 observable by snapping
// its eigenvalues to their signs (ties, i.e. eigenvalue 0, go to +1).
// Returns the observable and the Frobenius distance moved.
std::pair<BinaryObservable, double> binarize_block(const ComplexMatrix& raw) {
  const HermitianEig eig = hermitian_eig(raw);
  ComplexMatrix rounded = ComplexMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    const double sign = eig.values[i] >= 0 ? 1.0 : -1.0;
    rounded += sign * (eig.vectors.col(i) * eig.vectors.col(i).adjoint());
  }
  const double residual = (raw - rounded).norm();
  return {BinaryObservable(rounded), residual};
}

}  // namespace

ComplexMatrix BlockDecomposition::isometry() const {
  ComplexMatrix f = ComplexMatrix::Zero(
      static_cast<Eigen::Index>(2 * blocks.size()), dim);
  for (std::size_t z = 0; z < blocks.size(); ++z) {
    f.middleRows(static_cast<Eigen::Index>(2 * z), 2) =
        blocks[z].basis.adjoint();
  }
  return f;
}

ComplexMatrix BlockDecomposition::direct_sum(int which) const {
  ComplexMatrix out = ComplexMatrix::Zero(
      static_cast<Eigen::Index>(2 * blocks.size()),
      static_cast<Eigen::Index>(2 * blocks.size()));
  for (std::size_t z = 0; z < blocks.size(); ++z) {
    const ComplexMatrix& blk =
        which == 0 ? blocks[z].a0.matrix() : blocks[z].a1.matrix();
    out.block(static_cast<Eigen::Index>(2 * z),
              static_cast<Eigen::Index>(2 * z), 2, 2) = blk;
  }
  return out;
}

double BlockDecomposition::reconstruction_residual(
    const BinaryObservable& a0, const BinaryObservable& a1) const {
  const ComplexMatrix f = isometry();
  const ComplexMatrix range = f * f.adjoint();
  double worst = 0;
  for (int which = 0; which < 2; ++which) {
    const ComplexMatrix& a = which == 0 ? a0.matrix() : a1.matrix();
    const ComplexMatrix target = range * direct_sum(which) * range;
    worst = std::max(worst, (f * a * f.adjoint() - target).norm());
  }
  return worst;
}

double BlockDecomposition::pullback_residual(const BinaryObservable& a0,
                                             const BinaryObservable& a1) const {
  const ComplexMatrix f = isometry();
  double worst = 0;
  for (int which = 0; which < 2; ++which) {
    const ComplexMatrix& a = which == 0 ? a0.matrix() : a1.matrix();
    worst = std::max(worst, (f.adjoint() * direct_sum(which) * f - a).norm());
  }
  return worst;
}

BlockDecomposition block_diagonalize(const BinaryObservable& a0,
                                     const BinaryObservable& a1) {
  if (a0.dim() != a1.dim()) {
    throw ValidationError("dimension", "observables act on different spaces");
  }
  const Eigen::Index d = a0.dim();
  const ComplexMatrix& m0 = a0.matrix();
  const ComplexMatrix& m1 = a1.matrix();

  // C = ((A0+A1)/2)^2 commutes with both observables; its eigenvalue on a
  // block with angle t is cos^2(t).  Eigenvalues 1 and 0 mark subspaces
  // where A1 = +-A0.
  const ComplexMatrix half_sum = (m0 + m1) / 2.0;
  const HermitianEig ceig = hermitian_eig(half_sum * half_sum);

  BlockDecomposition dec;
  dec.dim = d;

  Eigen::Index start = 0;
  while (start < d) {
    Eigen::Index end = start + 1;
    while (end < d && std::abs(ceig.values[end] - ceig.values[end - 1]) <=
                          group_tol) {
      ++end;
    }
    const Eigen::Index g = end - start;
    double cbar = 0;
    for (Eigen::Index i = start; i < end; ++i) cbar += ceig.values[i];
    cbar = std::clamp(cbar / static_cast<double>(g), 0.0, 1.0);
    const ComplexMatrix q = ceig.vectors.middleCols(start, g);

    // Diagonalise A0 restricted to the group's eigenspace.
    const HermitianEig restricted = hermitian_eig(q.adjoint() * m0 * q);

    if (cbar >= 1.0 - group_tol || cbar <= group_tol) {
      // Commuting sector: every A0 eigenvector here is a 1x1 invariant
      // block with A1 = +-A0.  Pad to 2x2 with the scalar duplicated so all
      // blocks have a common shape; the padded basis column stays zero.
      for (Eigen::Index k = 0; k < g; ++k) {
        const double s0 = restricted.values[k] >= 0 ? 1.0 : -1.0;
        const double s1 = cbar >= 0.5 ? s0 : -s0;
        ComplexMatrix basis = ComplexMatrix::Zero(d, 2);
        basis.col(0) = q * restricted.vectors.col(k);
        JordanBlock blk{dec.blocks.size(),
                        cbar >= 0.5 ? 0.0 : 2.0 * std::atan(1.0),
                        true,
                        std::move(basis),
                        BinaryObservable(s0 * ComplexMatrix::Identity(2, 2)),
                        BinaryObservable(s1 * ComplexMatrix::Identity(2, 2))};
        dec.blocks.push_back(std::move(blk));
      }
    } else {
      // Proper 2x2 sector: each +1 eigenvector v of the restricted A0 pairs
      // with w ~ A1 v - cos(2t) v, and (v, w) spans an invariant block.
      std::vector<Eigen::Index> plus;
      Eigen::Index minus_count = 0;
      for (Eigen::Index k = 0; k < g; ++k) {
        if (restricted.values[k] > 0) {
          plus.push_back(k);
        } else {
          ++minus_count;
        }
      }
      if (static_cast<Eigen::Index>(plus.size()) != minus_count) {
        throw ValidationError(
            "block-pairing",
            "non-commuting sector has unequal +1/-1 multiplicities; "
            "eigenvalue grouping tolerance was likely crossed");
      }
      for (Eigen::Index k : plus) {
        const ComplexVector v = q * restricted.vectors.col(k);
        const ComplexVector t = m1 * v;
        const double cos2t = (v.adjoint() * t)(0, 0).real();
        ComplexVector w = t - cos2t * v;
        const double wnorm = w.norm();
        w /= wnorm;
        ComplexMatrix basis(d, 2);
        basis.col(0) = v;
        basis.col(1) = w;
        JordanBlock blk{dec.blocks.size(),
                        std::atan2(wnorm, cos2t) / 2.0,
                        false,
                        basis,
                        BinaryObservable(basis.adjoint() * m0 * basis),
                        BinaryObservable(basis.adjoint() * m1 * basis)};
        dec.blocks.push_back(std::move(blk));
      }
    }
    start = end;
  }

  // Dimensions must add back up (2 per proper block, 1 per padded block).
  Eigen::Index covered = 0;
  for (const auto& blk : dec.blocks) covered += blk.padded ? 1 : 2;
  if (covered != d) {
    throw ValidationError("block-pairing", "blocks do not cover the space");
  }
  return dec;
}

double QubitStrategyMixture::total_weight() const {
  double sum = 0;
  for (const auto& c : components) sum += c.weight;
  return sum;
}

QubitStrategyMixture reduce_strategy(const DensityOperator& state,
                                     const std::array<BinaryObservable, 2>& alice,
                                     const BinaryObservable& alice_key,
                                     const std::array<BinaryObservable, 2>& bob,
                                     Eigen::Index dim_a, Eigen::Index dim_b) {
  if (state.dim() != dim_a * dim_b) {
    throw ValidationError("dimension",
                          "state dimension does not factor as dim_a * dim_b");
  }
  if (alice[0].dim() != dim_a || alice[1].dim() != dim_a ||
      alice_key.dim() != dim_a) {
    throw ValidationError("dimension", "Alice observable dimension mismatch");
  }
  if (bob[0].dim() != dim_b || bob[1].dim() != dim_b) {
    throw ValidationError("dimension", "Bob observable dimension mismatch");
  }

  const BlockDecomposition dec_a = block_diagonalize(alice[0], alice[1]);
  const BlockDecomposition dec_b = block_diagonalize(bob[0], bob[1]);

  QubitStrategyMixture mix;
  for (const auto& blk_a : dec_a.blocks) {
    // Compressed key observable for this Alice block.
    BinaryObservable key_obs(ComplexMatrix::Identity(2, 2));
    double key_residual = 0;
    if (blk_a.padded) {
      const ComplexVector v = blk_a.basis.col(0);
      const double raw = (v.adjoint() * alice_key.matrix() * v)(0, 0).real();
      const double sign = raw >= 0 ? 1.0 : -1.0;
      key_obs = BinaryObservable(sign * ComplexMatrix::Identity(2, 2));
      key_residual = std::abs(raw - sign);
    } else {
      const ComplexMatrix raw =
          blk_a.basis.adjoint() * alice_key.matrix() * blk_a.basis;
      auto [obs, res] = binarize_block(raw);
      key_obs = std::move(obs);
      key_residual = res;
    }

    for (const auto& blk_b : dec_b.blocks) {
      const ComplexMatrix embed = tensor(blk_a.basis, blk_b.basis);
      const ComplexMatrix sub = embed.adjoint() * state.matrix() * embed;
      const double weight = sub.trace().real();
      if (weight <= 1e-14) continue;
      mix.components.push_back(QubitStrategyComponent{
          weight,
          DensityOperator(sub / weight),
          {blk_a.a0, blk_a.a1, key_obs},
          {blk_b.a0, blk_b.a1},
          blk_a.label,
          blk_b.label,
          key_residual});
    }
  }

  if (std::abs(mix.total_weight() - 1.0) > tol::trace) {
    throw ValidationError("unit-trace",
                          "component weights sum to " +
                              std::to_string(mix.total_weight()));
  }
  return mix;
}

std::array<double, 4> joint_distribution(const DensityOperator& state,
                                         const BinaryObservable& alice,
                                         const BinaryObservable& bob,
                                         Eigen::Index dim_a,
                                         Eigen::Index dim_b) {
  if (state.dim() != dim_a * dim_b || alice.dim() != dim_a ||
      bob.dim() != dim_b) {
    throw ValidationError("dimension", "distribution dimension mismatch");
  }
  const std::array<ComplexMatrix, 2> pa = {alice.projector_plus(),
                                           alice.projector_minus()};
  const std::array<ComplexMatrix, 2> pb = {bob.projector_plus(),
                                           bob.projector_minus()};
  std::array<double, 4> out{};
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      out[2 * x + y] =
          (state.matrix() * tensor(pa[x], pb[y])).trace().real();
    }
  }
  return out;
}

std::array<double, 4> mixture_distribution(const QubitStrategyMixture& mix,
                                           int alice_setting,
                                           int bob_setting) {
  std::array<double, 4> out{};
  for (const auto& c : mix.components) {
    const auto d = joint_distribution(c.state, c.alice[alice_setting],
                                      c.bob[bob_setting], 2, 2);
    for (int i = 0; i < 4; ++i) out[i] += c.weight * d[i];
  }
  return out;
}

}  // namespace diqkd
