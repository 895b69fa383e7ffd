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

#include "diqkd/chsh.hpp"

#include <cmath>
#include <limits>

#include "diqkd/rng.hpp"

namespace diqkd {

void ChshStrategy::validate() const {
  if (dim_a <= 0 || dim_b <= 0 || state.dim() != dim_a * dim_b) {
    throw ValidationError("dimension",
                          "state dimension does not factor as dim_a * dim_b");
  }
  for (const auto& obs : alice) {
    if (obs.dim() != dim_a) {
      throw ValidationError("dimension", "Alice observable dimension mismatch");
    }
  }
  for (const auto& obs : bob) {
    if (obs.dim() != dim_b) {
      throw ValidationError("dimension", "Bob observable dimension mismatch");
    }
  }
}

double correlator(const ChshStrategy& s, int a, int b) {
  const ComplexMatrix joint = tensor(s.alice[a].matrix(), s.bob[b].matrix());
  return (s.state.matrix() * joint).trace().real();
}

double chsh_s(const ChshStrategy& s) {
  s.validate();
  return correlator(s, 0, 0) + correlator(s, 0, 1) + correlator(s, 1, 0) -
         correlator(s, 1, 1);
}

double chsh_p(const ChshStrategy& s) {
  s.validate();
  double p = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const ComplexMatrix pa = s.alice[a].projector_plus();
      const ComplexMatrix pb = s.bob[b].projector_plus();
      const ComplexMatrix qa = s.alice[a].projector_minus();
      const ComplexMatrix qb = s.bob[b].projector_minus();
      // Success means x XOR y = a.b, with outcome bit 0 mapped to +1.
      const ComplexMatrix win = (a == 1 && b == 1)
                                    ? tensor(pa, qb) + tensor(qa, pb)
                                    : tensor(pa, pb) + tensor(qa, qb);
      p += (s.state.matrix() * win).trace().real();
    }
  }
  return p / 4.0;
}

ComplexMatrix planar_observable(double angle) {
  return std::cos(angle) * pauli_z() + std::sin(angle) * pauli_x();
}

ChshStrategy planar_qubit_strategy(const DensityOperator& state,
                                   const PlanarAngles& angles) {
  if (state.dim() != 4) {
    throw ValidationError("dimension", "expected a two-qubit state");
  }
  return ChshStrategy{state,
                      {BinaryObservable(planar_observable(angles.alice[0])),
                       BinaryObservable(planar_observable(angles.alice[1]))},
                      {BinaryObservable(planar_observable(angles.bob[0])),
                       BinaryObservable(planar_observable(angles.bob[1]))},
                      2,
                      2};
}

Eigen::Matrix3d pauli_correlation_matrix(const DensityOperator& state) {
  if (state.dim() != 4) {
    throw ValidationError("dimension", "expected a two-qubit state");
  }
  const std::array<ComplexMatrix, 3> sigma = {pauli_x(), pauli_y(), pauli_z()};
  Eigen::Matrix3d t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      t(i, j) = (state.matrix() * tensor(sigma[i], sigma[j])).trace().real();
    }
  }
  return t;
}

double s_max_horodecki(const DensityOperator& state) {
  const Eigen::Matrix3d t = pauli_correlation_matrix(state);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(t.transpose() * t,
                                                        Eigen::EigenvaluesOnly);
  const auto& u = solver.eigenvalues();  // ascending
  return 2.0 * std::sqrt(u[2] + u[1]);
}

namespace {

// Planar direction as a Bloch vector (x, y, z).
Eigen::Vector3d planar_direction(double angle) {
  return {std::sin(angle), 0.0, std::cos(angle)};
}

double ascent_objective(const Eigen::Matrix3d& te, const PlanarAngles& ang) {
  const Eigen::Vector3d a0 = planar_direction(ang.alice[0]);
  const Eigen::Vector3d a1 = planar_direction(ang.alice[1]);
  const Eigen::Vector3d b0 = planar_direction(ang.bob[0]);
  const Eigen::Vector3d b1 = planar_direction(ang.bob[1]);
  return a0.dot(te * b0) + a0.dot(te * b1) + a1.dot(te * b0) -
         a1.dot(te * b1);
}

// Exact coordinate ascent: each angle's contribution is c*cos(t) + s*sin(t),
// maximised in closed form by atan2.
double coordinate_ascent(const Eigen::Matrix3d& te, PlanarAngles& ang) {
  double best = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::Vector3d r;
    r = te * (planar_direction(ang.bob[0]) + planar_direction(ang.bob[1]));
    ang.alice[0] = std::atan2(r.x(), r.z());
    r = te * (planar_direction(ang.bob[0]) - planar_direction(ang.bob[1]));
    ang.alice[1] = std::atan2(r.x(), r.z());
    r = te.transpose() *
        (planar_direction(ang.alice[0]) + planar_direction(ang.alice[1]));
    ang.bob[0] = std::atan2(r.x(), r.z());
    r = te.transpose() *
        (planar_direction(ang.alice[0]) - planar_direction(ang.alice[1]));
    ang.bob[1] = std::atan2(r.x(), r.z());
    const double s = ascent_objective(te, ang);
    if (s - best < 1e-10) return s;
    best = s;
  }
  return best;
}

bool angles_less(const PlanarAngles& a, const PlanarAngles& b) {
  const std::array<double, 4> x = {a.alice[0], a.alice[1], a.bob[0], a.bob[1]};
  const std::array<double, 4> y = {b.alice[0], b.alice[1], b.bob[0], b.bob[1]};
  return x < y;
}

}  // namespace

SMaxResult s_max_optimize(const DensityOperator& state) {
  const Eigen::Matrix3d t = pauli_correlation_matrix(state);

  // Rotate each party's frame so the two dominant singular directions of T
  // span the local Z-X plane; the planar restriction is then without loss of
  // generality.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(t,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  if (u.determinant() < 0) u.col(2) *= -1;
  if (v.determinant() < 0) v.col(2) *= -1;
  // Send planar coordinates (x, y, z) to singular directions (2, 3, 1): the
  // top direction becomes Z, the second becomes X.
  Eigen::Matrix3d perm;
  perm << 0, 0, 1, 1, 0, 0, 0, 1, 0;
  const Eigen::Matrix3d frame_a = u * perm;
  const Eigen::Matrix3d frame_b = v * perm;
  const Eigen::Matrix3d te = frame_a.transpose() * t * frame_b;

  // Multi-start: one canonical start plus random restarts from a fixed seed,
  // so the search result is deterministic.
  const double quarter = std::atan(1.0);
  std::vector<PlanarAngles> starts;
  starts.push_back({{0.0, 2 * quarter}, {quarter, -quarter}});
  CounterRng rng(0x5eed0a11, "s-max-starts");
  while (starts.size() < 16) {
    auto angle = [&] { return (rng.uniform() * 2.0 - 1.0) * 4 * quarter; };
    starts.push_back({{angle(), angle()}, {angle(), angle()}});
  }

  SMaxResult best{-std::numeric_limits<double>::infinity(),
                  starts.front(),
                  frame_a,
                  frame_b};
  for (const auto& start : starts) {
    PlanarAngles ang = start;
    const double s = coordinate_ascent(te, ang);
    if (s > best.s + 1e-12 ||
        (std::abs(s - best.s) <= 1e-12 && angles_less(ang, best.angles))) {
      best.s = s;
      best.angles = ang;
    }
  }
  return best;
}

ChshStrategy realize_s_max(const DensityOperator& state, const SMaxResult& r) {
  auto bloch_obs = [](const Eigen::Matrix3d& frame, double angle) {
    const Eigen::Vector3d n = frame * planar_direction(angle);
    return BinaryObservable(n.x() * pauli_x() + n.y() * pauli_y() +
                            n.z() * pauli_z());
  };
  return ChshStrategy{state,
                      {bloch_obs(r.alice_frame, r.angles.alice[0]),
                       bloch_obs(r.alice_frame, r.angles.alice[1])},
                      {bloch_obs(r.bob_frame, r.angles.bob[0]),
                       bloch_obs(r.bob_frame, r.angles.bob[1])},
                      2,
                      2};
}

IdealStrategy ideal_qubit_strategy(const DensityOperator& state) {
  const double rt2 = std::sqrt(2.0);
  const ComplexMatrix x = pauli_x();
  const ComplexMatrix y = pauli_y();
  ChshStrategy chsh{state,
                    {BinaryObservable(x), BinaryObservable(y)},
                    {BinaryObservable((x - y) / rt2),
                     BinaryObservable((x + y) / rt2)},
                    2,
                    2};
  chsh.validate();
  return IdealStrategy{std::move(chsh), BinaryObservable((x + y) / rt2)};
}

}  // namespace diqkd
