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

#include <cstdint>
#include <utility>

#include "diqkd/linalg.hpp"

namespace diqkd {

// Parameters of the finite-statistics estimation bounds.
struct EstimationParams {
  std::size_t n;    // key trials
  std::size_t m;    // parameter-estimation trials
  std::size_t k;    // discarded subsystems (de Finetti bookkeeping)
  std::size_t r;    // deviation parameter
  double eps;       // security parameter
  double p;         // reference success probability

  void validate() const;
};

// One evaluated point of the estimation tail bound.
struct TailBoundResult {
  double mu;           // threshold slack
  double bound;        // clamped probability bound
  double y_threshold;  // m * (p + mu), the success-count scale
};

// Asymptotic key rate 1 - h((1 + sqrt((S/2)^2 - 1))/2) - h(q).  S below 2 is
// treated as 2 (the entropy term is then 1); S above 2 sqrt(2) is rejected as
// super-quantum.  May be negative; callers clamp when deciding key lengths.
double key_rate(double s, double q);

// Eigenvalues (each with multiplicity 2) of the classical-quantum state on
// outcome (x) adversary-side systems after the key measurement at angle phi:
//   Lambda_pm = 1/4 (1 +- sqrt(a^2 + b^2 + 2 cos(2 phi) a b)),
// a = lam_phi+ - lam_psi-, b = lam_phi- - lam_psi+.  Always sums to 1/2.
std::pair<double, double> lambda_pm(const BellDiagonalSpectrum& lam,
                                    double phi);

// Conditional entropy of the key bit given the adversary's purification, at
// the optimal measurement angle phi = 0:
//   H(X|E) = 1 + h(lam_phi+ + lam_phi-) - H(lam).
double h_x_given_e(const BellDiagonalSpectrum& lam);

// Both sides of the entropic inequality
//   H(lam) - h(lam_phi+ + lam_phi-) <= h((1 + sqrt((S_max/2)^2 - 1))/2),
// with S_max evaluated on the Bell-diagonal state (rhs = 1 when S_max <= 2).
// Contract: lhs <= rhs + 1e-9.
struct EntropyGap {
  double lhs;
  double rhs;
};
EntropyGap pironio_lemma4_gap(const BellDiagonalSpectrum& lam);

// Raw exponent of the estimation tail bound
//   -2 (m mu - r(1-p))^2 / ((m - r) cos^4(pi/8)) + (n+m) h(r/(n+m)) ln 2.
double lemma1_exponent(const EstimationParams& params, double mu);

// P(Y/m > p + mu) <= min(1, exp(lemma1_exponent)).  Returns 1 (vacuous) when
// m mu <= r (1 - p).
double lemma1_bound(const EstimationParams& params, double mu);

// Smallest mu >= 0 with lemma1_bound(params, mu) <= target, by monotone
// bisection.  target = 1 returns 0.  Throws a named infeasibility error when
// no mu in [0, 1] reaches the target (slack beyond the probability range).
double invert_mu(const EstimationParams& params, double target);

// The mu expression as printed in the source derivation, which does not
// invert the bound (see invert_mu); exposed for diagnostics only.  May be
// NaN when the square root argument is negative.
double mu_as_printed(const EstimationParams& params, double target);

// Convenience: mu for the standard target 2 eps / 9 together with the bound
// value and success-count threshold.
TailBoundResult pe_threshold(const EstimationParams& params);

// Finite de Finetti-style bound 2 exp(-k(r+1)/(2(n+k)) + (dim/2) ln k),
// returned unclamped (values above 1 are vacuous).
double definetti_bound(std::size_t n, std::size_t k, std::size_t r,
                       std::size_t dim);

// Numerical minimisation of h_x_given_e over Bell-diagonal spectra subject
// to S_max(lam) >= s, used to confirm that the key-rate entropy term is the
// exact minimum.  Multi-start Nelder-Mead; only feasible evaluations count.
struct ConstrainedMinResult {
  double value;
  BellDiagonalSpectrum minimizer;
};
ConstrainedMinResult min_h_x_given_e(double s, int starts = 40,
                                     std::uint64_t seed = 0x6d1b5);

}  // namespace diqkd
