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

#include <cmath>

#include <doctest.h>

#include "diqkd/linalg.hpp"
#include "support.hpp"

using namespace diqkd;

TEST_CASE("density operator validation names the violated invariant") {
  ComplexMatrix bad_trace = identity(2);
  CHECK_THROWS_WITH_AS(DensityOperator{bad_trace},
                       doctest::Contains("[unit-trace]"), ValidationError);

  ComplexMatrix non_hermitian = ComplexMatrix::Zero(2, 2);
  non_hermitian(0, 1) = 1.0;
  non_hermitian(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(DensityOperator{non_hermitian},
                       doctest::Contains("[hermitian]"), ValidationError);

  ComplexMatrix indefinite = ComplexMatrix::Zero(2, 2);
  indefinite(0, 0) = 1.5;
  indefinite(1, 1) = -0.5;
  CHECK_THROWS_WITH_AS(DensityOperator{indefinite},
                       doctest::Contains("[positive-semidefinite]"), ValidationError);
}

TEST_CASE("binary observable accepts +/-1 spectra only") {
  CHECK_NOTHROW(BinaryObservable(pauli_z()));
  CHECK_NOTHROW(BinaryObservable(identity(3)));
  CHECK_THROWS_WITH_AS(BinaryObservable(ComplexMatrix(2.0 * pauli_z())),
                       doctest::Contains("[eigenvalues-pm1]"), ValidationError);
}

TEST_CASE("observable projectors resolve the identity") {
  CounterRng rng(0xA1);
  const BinaryObservable a = test::random_observable(rng, 5);
  const ComplexMatrix sum = a.projector_plus() + a.projector_minus();
  CHECK((sum - identity(5)).cwiseAbs().maxCoeff() < 1e-12);
  const ComplexMatrix diff = a.projector_plus() - a.projector_minus();
  CHECK((diff - a.matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hermitian_eig orders eigenvalues descending and reconstructs") {
  CounterRng rng(0xA2);
  const ComplexMatrix g = test::random_ginibre(rng, 6);
  const ComplexMatrix h = g + g.adjoint();
  const auto [vals, vecs] = hermitian_eig(h);
  for (Eigen::Index i = 1; i < vals.size(); ++i) {
    CHECK(vals(i - 1) >= vals(i) - 1e-12);
  }
  const ComplexMatrix rebuilt =
      vecs * vals.asDiagonal() * vecs.adjoint();
  CHECK((rebuilt - h).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("partial trace recovers tensor factors") {
  CounterRng rng(0xA3);
  const DensityOperator a = test::random_density(rng, 3);
  const DensityOperator b = test::random_density(rng, 4);
  const ComplexMatrix joint = tensor(a.matrix(), b.matrix());
  const ComplexMatrix ta = partial_trace(joint, {3, 4}, {0});
  const ComplexMatrix tb = partial_trace(joint, {3, 4}, {1});
  CHECK((ta - a.matrix()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((tb - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("partial trace over three factors keeps the requested pair") {
  CounterRng rng(0xA4);
  const DensityOperator a = test::random_density(rng, 2);
  const DensityOperator b = test::random_density(rng, 2);
  const DensityOperator c = test::random_density(rng, 3);
  const ComplexMatrix joint =
      tensor(tensor(a.matrix(), b.matrix()), c.matrix());
  const ComplexMatrix bc = partial_trace(joint, {2, 2, 3}, {1, 2});
  CHECK((bc - tensor(b.matrix(), c.matrix())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("purification traces back to the original state") {
  CounterRng rng(0xA5);
  for (const Eigen::Index d : {2, 3, 4}) {
    const DensityOperator rho = test::random_density(rng, d);
    const ComplexVector psi = purify(rho);
    REQUIRE(psi.size() == d * d);
    const ComplexMatrix full = psi * psi.adjoint();
    const ComplexMatrix back = partial_trace(full, {d, d}, {0});
    CHECK((back - rho.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("binary entropy endpoints and a frozen interior value") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  // h(0.11), frozen from an independent high-precision evaluation.
  CHECK(binary_entropy(0.11) ==
        doctest::Approx(0.499915958164528).epsilon(1e-12));
  CHECK_THROWS_AS(binary_entropy(-0.01), ValidationError);
  CHECK_THROWS_AS(binary_entropy(1.01), ValidationError);
}

TEST_CASE("von Neumann entropy of standard states") {
  CHECK(von_neumann_entropy(DensityOperator(ComplexMatrix(identity(4) / 4.0)))
        == doctest::Approx(2.0).epsilon(1e-12));
  const ComplexVector phi = bell_phi_plus();
  CHECK(von_neumann_entropy(DensityOperator(ComplexMatrix(phi * phi.adjoint())))
        == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("bell diagonal states round-trip through their spectrum") {
  CounterRng rng(0xA6);
  for (int rep = 0; rep < 50; ++rep) {
    const BellDiagonalSpectrum lam = test::random_spectrum(rng);
    const DensityOperator rho = bell_diagonal_to_density(lam);
    const BellDiagonalSpectrum back = bell_diagonal_spectrum(rho);
    CHECK(back.phi_plus == doctest::Approx(lam.phi_plus).epsilon(1e-10));
    CHECK(back.psi_minus == doctest::Approx(lam.psi_minus).epsilon(1e-10));
    CHECK(back.phi_minus == doctest::Approx(lam.phi_minus).epsilon(1e-10));
    CHECK(back.psi_plus == doctest::Approx(lam.psi_plus).epsilon(1e-10));
  }
}

TEST_CASE("non bell-diagonal states are rejected by the spectrum extractor") {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 1.0;  // |00><00| has off-diagonal Bell-basis terms
  CHECK_THROWS_WITH_AS(bell_diagonal_spectrum(DensityOperator(m)),
                       doctest::Contains("[bell-diagonal]"), ValidationError);
}

TEST_CASE("werner state spectrum and limits") {
  const DensityOperator w = werner_state(0.8);
  const BellDiagonalSpectrum lam = bell_diagonal_spectrum(w);
  CHECK(lam.phi_plus == doctest::Approx((1 + 3 * 0.8) / 4).epsilon(1e-12));
  CHECK(lam.psi_minus == doctest::Approx(0.05).epsilon(1e-12));
  const ComplexVector phi = bell_phi_plus();
  CHECK((werner_state(1.0).matrix() - phi * phi.adjoint())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK((werner_state(0.0).matrix() - identity(4) / 4.0)
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("shannon entropy handles zeros") {
  CHECK(shannon_entropy(std::array<double, 4>{0.5, 0.5, 0.0, 0.0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
}
