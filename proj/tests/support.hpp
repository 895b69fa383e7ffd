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

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "diqkd/linalg.hpp"
#include "diqkd/rng.hpp"

namespace diqkd::test {

inline double gaussian(CounterRng& rng) {
  const double u1 = std::max(rng.uniform(), 1e-300);
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline ComplexMatrix random_ginibre(CounterRng& rng, Eigen::Index d) {
  ComplexMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      g(i, j) = {gaussian(rng), gaussian(rng)};
    }
  }
  return g;
}

inline ComplexMatrix random_unitary(CounterRng& rng, Eigen::Index d) {
  const ComplexMatrix g = random_ginibre(rng, d);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    const std::complex<double> diag = r(i, i);
    if (std::abs(diag) > 0) q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

inline DensityOperator random_density(CounterRng& rng, Eigen::Index d) {
  const ComplexMatrix g = random_ginibre(rng, d);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityOperator(rho);
}

inline ComplexVector random_pure(CounterRng& rng, Eigen::Index d) {
  ComplexVector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = {gaussian(rng), gaussian(rng)};
  v.normalize();
  return v;
}

// Random +/-1 observable: a uniformly random eigenbasis with independent
// random signs (degenerate all-plus or all-minus draws are legal).
inline BinaryObservable random_observable(CounterRng& rng, Eigen::Index d) {
  const ComplexMatrix u = random_unitary(rng, d);
  Eigen::VectorXd signs(d);
  for (Eigen::Index i = 0; i < d; ++i) signs(i) = rng.bernoulli(0.5) ? 1 : -1;
  return BinaryObservable(u * signs.asDiagonal() * u.adjoint());
}

// Uniform (Dirichlet(1,1,1,1)) point on the probability simplex.
inline BellDiagonalSpectrum random_spectrum(CounterRng& rng) {
  double e[4];
  double total = 0;
  for (double& x : e) {
    x = -std::log(std::max(rng.uniform(), 1e-300));
    total += x;
  }
  return BellDiagonalSpectrum{e[0] / total, e[1] / total, e[2] / total,
                              e[3] / total};
}

// Two-sample Kolmogorov-Smirnov p-value (asymptotic formula with the small
// sample correction of the effective size).
inline double ks_p_value(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < n1 && j < n2) {
    const double x = std::min(a[i], b[j]);
    while (i < n1 && a[i] <= x) ++i;
    while (j < n2 && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 -
                             static_cast<double>(j) / n2));
  }
  const double ne = static_cast<double>(n1) * static_cast<double>(n2) /
                    static_cast<double>(n1 + n2);
  const double lambda =
      (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace diqkd::test
