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

#include "diqkd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "diqkd/chsh.hpp"
#include "diqkd/rng.hpp"

namespace diqkd {

namespace {

const double two_sqrt2 = 2.0 * std::sqrt(2.0);

double cos4_pi8() {
  const double c = std::cos(std::atan(1.0) / 2.0);  // cos(pi/8)
  return c * c * c * c;
}

}  // namespace

void EstimationParams::validate() const {
  if (n == 0 || m == 0) {
    throw ValidationError("positive-counts", "n and m must be positive");
  }
  if (r > std::min(n, m)) {
    throw ValidationError("deviation-range", "r must satisfy r <= min(n, m)");
  }
  if (!(eps > 0.0 && eps < 1.0)) {
    throw ValidationError("probability-range",
                          "eps " + std::to_string(eps) + " not in (0,1)");
  }
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("probability-range",
                          "p " + std::to_string(p) + " not in [0,1]");
  }
}

double key_rate(double s, double q) {
  if (!(q >= 0.0 && q <= 0.5)) {
    throw ValidationError("probability-range",
                          "q " + std::to_string(q) + " not in [0, 1/2]");
  }
  if (s > two_sqrt2 + 1e-12) {
    throw ValidationError("super-quantum",
                          "S " + std::to_string(s) + " exceeds 2 sqrt(2)");
  }
  s = std::clamp(s, 2.0, two_sqrt2);
  const double radicand = (s / 2.0) * (s / 2.0) - 1.0;
  const double arg = (1.0 + std::sqrt(std::max(radicand, 0.0))) / 2.0;
  return 1.0 - binary_entropy(arg) - binary_entropy(q);
}

std::pair<double, double> lambda_pm(const BellDiagonalSpectrum& lam,
                                    double phi) {
  lam.validate();
  const double a = lam.phi_plus - lam.psi_minus;
  const double b = lam.phi_minus - lam.psi_plus;
  // Radicand equals (a - b)^2 + 2(1 + cos 2 phi) a b >= (|a| - |b|)^2 >= 0
  // analytically; clamp the floating-point value.
  const double radicand =
      std::max(a * a + b * b + 2.0 * std::cos(2.0 * phi) * a * b, 0.0);
  const double root = std::sqrt(radicand);
  return {(1.0 + root) / 4.0, (1.0 - root) / 4.0};
}

double h_x_given_e(const BellDiagonalSpectrum& lam) {
  lam.validate();
  const auto arr = lam.as_array();
  return 1.0 + binary_entropy(std::clamp(lam.phi_plus + lam.phi_minus, 0.0, 1.0)) -
         shannon_entropy(arr);
}

EntropyGap pironio_lemma4_gap(const BellDiagonalSpectrum& lam) {
  lam.validate();
  const auto arr = lam.as_array();
  EntropyGap gap;
  gap.lhs = shannon_entropy(arr) -
            binary_entropy(std::clamp(lam.phi_plus + lam.phi_minus, 0.0, 1.0));
  const double s_max = s_max_horodecki(bell_diagonal_to_density(lam));
  if (s_max <= 2.0) {
    gap.rhs = 1.0;
  } else {
    const double radicand =
        std::min((s_max / 2.0) * (s_max / 2.0) - 1.0, 1.0);
    gap.rhs = binary_entropy((1.0 + std::sqrt(radicand)) / 2.0);
  }
  return gap;
}

double lemma1_exponent(const EstimationParams& params, double mu) {
  params.validate();
  if (params.m <= params.r) {
    throw ValidationError("deviation-range", "requires m > r");
  }
  const double m = static_cast<double>(params.m);
  const double n = static_cast<double>(params.n);
  const double r = static_cast<double>(params.r);
  const double core = m * mu - r * (1.0 - params.p);
  // Entropy correction for the union over deviating-position sets.
  const double entropy_term =
      (n + m) * binary_entropy(r / (n + m)) * std::log(2.0);
  return -2.0 * core * core / ((m - r) * cos4_pi8()) + entropy_term;
}

double lemma1_bound(const EstimationParams& params, double mu) {
  params.validate();
  if (params.m <= params.r) {
    throw ValidationError("deviation-range", "requires m > r");
  }
  const double core = static_cast<double>(params.m) * mu -
                      static_cast<double>(params.r) * (1.0 - params.p);
  if (!(mu > 0.0) || core <= 0.0) return 1.0;  // vacuous regime
  return std::min(1.0, std::exp(lemma1_exponent(params, mu)));
}

double invert_mu(const EstimationParams& params, double target) {
  params.validate();
  if (params.m <= params.r) {
    throw ValidationError("deviation-range", "requires m > r");
  }
  if (!(target > 0.0 && target <= 1.0)) {
    throw ValidationError("target-range",
                          "target " + std::to_string(target) +
                              " not in (0, 1]");
  }
  if (lemma1_bound(params, 0.0) <= target) return 0.0;
  if (lemma1_bound(params, 1.0) > target) {
    throw ValidationError(
        "mu-exceeds-unit-range",
        "no slack within the probability range reaches the target bound");
  }
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-15; ++iter) {
    const double mid = (lo + hi) / 2.0;
    if (lemma1_bound(params, mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double mu_as_printed(const EstimationParams& params, double target) {
  params.validate();
  const double m = static_cast<double>(params.m);
  const double n = static_cast<double>(params.n);
  const double r = static_cast<double>(params.r);
  const double entropy_term =
      (n + m) * binary_entropy(r / (n + m)) * std::log(2.0);
  // Literal transcription; the prefactor and sign placement do not invert
  // lemma1_bound, hence diagnostic-only.
  return (4.0 * r / m) *
         std::sqrt((-std::log(target) - entropy_term) * (m - r) * cos4_pi8());
}

TailBoundResult pe_threshold(const EstimationParams& params) {
  const double target = 2.0 * params.eps / 9.0;
  TailBoundResult out;
  out.mu = invert_mu(params, target);
  out.bound = lemma1_bound(params, out.mu);
  out.y_threshold = static_cast<double>(params.m) * (params.p + out.mu);
  return out;
}

double definetti_bound(std::size_t n, std::size_t k, std::size_t r,
                       std::size_t dim) {
  if (k == 0) {
    throw ValidationError("positive-counts", "k = 0 (ln k undefined)");
  }
  if (dim == 0) {
    throw ValidationError("positive-counts", "dim must be >= 1");
  }
  if (r > n) {
    throw ValidationError("deviation-range", "requires r <= n");
  }
  const double kd = static_cast<double>(k);
  const double exponent =
      -kd * (static_cast<double>(r) + 1.0) /
          (2.0 * (static_cast<double>(n) + kd)) +
      0.5 * static_cast<double>(dim) * std::log(kd);
  return 2.0 * std::exp(exponent);
}

// ---------------------------------------------------------------------------
// Constrained minimisation of H(X|E)
// ---------------------------------------------------------------------------

namespace {

// S_max of a Bell-diagonal state straight from the spectrum: the correlation
// matrix is diagonal with entries determined by lam, so the closed form needs
// only the two largest squared entries.
double s_max_bell_diagonal(const std::array<double, 4>& lam) {
  const double txx = lam[0] - lam[2] + lam[3] - lam[1];
  const double tyy = -lam[0] + lam[2] + lam[3] - lam[1];
  const double tzz = lam[0] + lam[2] - lam[3] - lam[1];
  std::array<double, 3> sq = {txx * txx, tyy * tyy, tzz * tzz};
  std::sort(sq.begin(), sq.end());
  return 2.0 * std::sqrt(sq[2] + sq[1]);
}

std::array<double, 4> softmax4(const std::array<double, 3>& x) {
  const std::array<double, 4> logits = {x[0], x[1], x[2], 0.0};
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::array<double, 4> out{};
  double sum = 0;
  for (int i = 0; i < 4; ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

// Minimal Nelder-Mead over R^3 (standard reflection/expansion/contraction
// parameters), enough for a 4-outcome simplex search.
void nelder_mead(const std::function<double(const std::array<double, 3>&)>& f,
                 std::array<double, 3> start, int max_iter) {
  constexpr int n = 3;
  std::array<std::array<double, 3>, n + 1> pts;
  std::array<double, n + 1> vals;
  pts[0] = start;
  for (int i = 1; i <= n; ++i) {
    pts[i] = start;
    pts[i][i - 1] += 0.5;
  }
  for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  for (int iter = 0; iter < max_iter; ++iter) {
    std::array<int, n + 1> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return vals[a] < vals[b]; });
    std::array<std::array<double, 3>, n + 1> sp;
    std::array<double, n + 1> sv;
    for (int i = 0; i <= n; ++i) {
      sp[i] = pts[order[i]];
      sv[i] = vals[order[i]];
    }
    pts = sp;
    vals = sv;
    if (vals[n] - vals[0] < 1e-12) break;

    std::array<double, 3> centroid{};
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 3; ++d) centroid[d] += pts[i][d] / n;
    }
    auto blend = [&](double t) {
      std::array<double, 3> p;
      for (int d = 0; d < 3; ++d) {
        p[d] = centroid[d] + t * (centroid[d] - pts[n][d]);
      }
      return p;
    };

    const auto refl = blend(1.0);
    const double fr = f(refl);
    if (fr < vals[0]) {
      const auto expd = blend(2.0);
      const double fe = f(expd);
      if (fe < fr) {
        pts[n] = expd;
        vals[n] = fe;
      } else {
        pts[n] = refl;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = refl;
      vals[n] = fr;
    } else {
      const auto contr = blend(fr < vals[n] ? 0.5 : -0.5);
      const double fc = f(contr);
      if (fc < std::min(fr, vals[n])) {
        pts[n] = contr;
        vals[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          for (int d = 0; d < 3; ++d) {
            pts[i][d] = pts[0][d] + 0.5 * (pts[i][d] - pts[0][d]);
          }
          vals[i] = f(pts[i]);
        }
      }
    }
  }
}

}  // namespace

ConstrainedMinResult min_h_x_given_e(double s, int starts, std::uint64_t seed) {
  if (!(s >= 2.0 && s <= two_sqrt2)) {
    throw ValidationError("chsh-range",
                          "S " + std::to_string(s) + " not in [2, 2 sqrt(2)]");
  }

  ConstrainedMinResult best{2.0, {1, 0, 0, 0}};
  auto consider = [&](const std::array<double, 4>& lam) {
    if (s_max_bell_diagonal(lam) < s - 1e-9) return;  // infeasible
    BellDiagonalSpectrum spec{lam[0], lam[1], lam[2], lam[3]};
    const double value = h_x_given_e(spec);
    if (value < best.value) best = {value, spec};
  };

  // Objective with a quadratic penalty pulling iterates toward feasibility;
  // only feasible evaluations update the tracked minimum.
  auto objective = [&](const std::array<double, 3>& x) {
    const auto lam = softmax4(x);
    consider(lam);
    const double shortfall = std::max(0.0, s - s_max_bell_diagonal(lam));
    return h_x_given_e({lam[0], lam[1], lam[2], lam[3]}) +
           100.0 * shortfall * shortfall;
  };

  // Analytic two-component candidate: weight (1 + sqrt((s/2)^2 - 1))/2 on one
  // Bell vector, the rest on another with the same phi-block.
  const double heavy = (1.0 + std::sqrt((s / 2.0) * (s / 2.0) - 1.0)) / 2.0;
  consider({1.0 - heavy, 0.0, heavy, 0.0});
  auto seed_logits = [&](const std::array<double, 4>& lam) {
    std::array<double, 3> x{};
    const double floor_p = 1e-6;
    for (int i = 0; i < 3; ++i) {
      x[i] = std::log(std::max(lam[i], floor_p) / std::max(lam[3], floor_p));
    }
    return x;
  };
  nelder_mead(objective, seed_logits({1.0 - heavy, 0.0, heavy, 0.0}), 600);

  CounterRng rng(seed, "min-hxe-starts");
  for (int trial = 1; trial < starts; ++trial) {
    // Dirichlet(1,1,1,1) start expressed in logit coordinates.
    std::array<double, 4> lam{};
    double sum = 0;
    for (int i = 0; i < 4; ++i) {
      lam[i] = -std::log(std::max(rng.uniform(), 1e-300));
      sum += lam[i];
    }
    for (double& v : lam) v /= sum;
    nelder_mead(objective, seed_logits(lam), 600);
  }
  return best;
}

}  // namespace diqkd
