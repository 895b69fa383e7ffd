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

#include "diqkd/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace diqkd {

namespace {

constexpr std::complex<double> I_UNIT{0.0, 1.0};

void check_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw ValidationError("finite-entries",
                          std::string(what) + " has NaN or Inf entries");
  }
}

void check_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ValidationError("square-matrix",
                          std::string(what) + " must be square and non-empty");
  }
}

double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------
// Validating wrappers
// ---------------------------------------------------------------------------

DensityOperator::DensityOperator(ComplexMatrix m) : mat_(std::move(m)) {
  check_square(mat_, "density operator");
  check_finite(mat_, "density operator");
  if (hermiticity_defect(mat_) > tol::hermitian) {
    throw ValidationError("hermitian", "density operator is not Hermitian");
  }
  const double tr = mat_.trace().real();
  if (std::abs(tr - 1.0) > tol::trace) {
    throw ValidationError("unit-trace",
                          "trace is " + std::to_string(tr) + ", expected 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(mat_,
                                                      Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -tol::psd) {
    throw ValidationError(
        "positive-semidefinite",
        "smallest eigenvalue is " + std::to_string(min_eig));
  }
}

BinaryObservable::BinaryObservable(ComplexMatrix m) : mat_(std::move(m)) {
  check_square(mat_, "observable");
  check_finite(mat_, "observable");
  if (hermiticity_defect(mat_) > tol::hermitian) {
    throw ValidationError("hermitian", "observable is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(mat_,
                                                      Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double e = solver.eigenvalues()[i];
    if (std::abs(std::abs(e) - 1.0) > tol::eigenvalue) {
      throw ValidationError(
          "eigenvalues-pm1",
          "eigenvalue " + std::to_string(e) + " is not within tolerance of +-1");
    }
  }
}

ComplexMatrix BinaryObservable::projector_plus() const {
  return (identity(dim()) + mat_) / 2.0;
}

ComplexMatrix BinaryObservable::projector_minus() const {
  return (identity(dim()) - mat_) / 2.0;
}

void BellDiagonalSpectrum::validate() const {
  const auto lam = as_array();
  double sum = 0;
  for (double x : lam) {
    if (!(x >= 0.0)) {
      throw ValidationError("nonnegative-weights",
                            "spectrum entry " + std::to_string(x));
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol::trace) {
    throw ValidationError("unit-trace",
                          "spectrum sums to " + std::to_string(sum));
  }
}

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexVector tensor(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

HermitianEig hermitian_eig(const ComplexMatrix& m) {
  check_square(m, "matrix");
  check_finite(m, "matrix");
  if (hermiticity_defect(m) > tol::hermitian) {
    throw ValidationError("hermitian", "matrix is not Hermitian");
  }
  // Symmetrize before decomposing so the defect allowed by the tolerance
  // cannot leak into complex eigenvalues.
  const ComplexMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  const Eigen::Index n = m.rows();

  HermitianEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  // Phase convention: rotate each column so its first non-tiny entry is real
  // and positive.  Makes the decomposition reproducible run to run.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::complex<double> v = out.vectors(k, i);
      if (std::abs(v) > 1e-12) {
        out.vectors.col(i) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<Eigen::Index>& dims,
                            const std::vector<std::size_t>& keep) {
  check_square(m, "matrix");
  Eigen::Index total = 1;
  for (Eigen::Index d : dims) {
    if (d <= 0) throw ValidationError("dimension", "factor dimension <= 0");
    total *= d;
  }
  if (total != m.rows()) {
    throw ValidationError("dimension",
                          "product of factor dimensions does not match matrix");
  }
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= dims.size() || (i > 0 && keep[i] <= keep[i - 1])) {
      throw ValidationError("subsystem-index",
                            "keep list must be ascending and in range");
    }
  }

  // Row strides of each tensor factor.
  std::vector<Eigen::Index> stride(dims.size(), 1);
  for (std::size_t s = dims.size(); s-- > 1;) {
    stride[s - 1] = stride[s] * dims[s];
  }

  std::vector<std::size_t> traced;
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (std::find(keep.begin(), keep.end(), s) == keep.end()) {
      traced.push_back(s);
    }
  }

  // Base offsets of every kept multi-index and every traced multi-index.
  auto offsets = [&](const std::vector<std::size_t>& subs) {
    Eigen::Index count = 1;
    for (std::size_t s : subs) count *= dims[s];
    std::vector<Eigen::Index> base(count, 0);
    Eigen::Index reps = 1;
    for (std::size_t s : subs) {
      const Eigen::Index d = dims[s];
      const Eigen::Index block = count / (reps * d);
      for (Eigen::Index idx = 0; idx < count; ++idx) {
        base[idx] += ((idx / block) % d) * stride[s];
      }
      reps *= d;
    }
    return base;
  };

  const auto kept_base = offsets(keep);
  const auto traced_base = offsets(traced);

  ComplexMatrix out = ComplexMatrix::Zero(
      static_cast<Eigen::Index>(kept_base.size()),
      static_cast<Eigen::Index>(kept_base.size()));
  for (std::size_t i = 0; i < kept_base.size(); ++i) {
    for (std::size_t j = 0; j < kept_base.size(); ++j) {
      std::complex<double> acc = 0;
      for (Eigen::Index t : traced_base) {
        acc += m(kept_base[i] + t, kept_base[j] + t);
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<Eigen::Index>& dims,
                              const std::vector<std::size_t>& keep) {
  return DensityOperator(partial_trace(rho.matrix(), dims, keep));
}

ComplexVector purify(const DensityOperator& rho) {
  const Eigen::Index d = rho.dim();
  const HermitianEig eig = hermitian_eig(rho.matrix());
  ComplexVector psi = ComplexVector::Zero(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lam = std::max(eig.values[i], 0.0);
    if (lam == 0.0) continue;
    const double amp = std::sqrt(lam);
    for (Eigen::Index k = 0; k < d; ++k) {
      psi[k * d + i] = amp * eig.vectors(k, i);
    }
  }
  psi.normalize();
  return psi;
}

double binary_entropy(double q) {
  if (q < 0.0 || q > 1.0) {
    throw ValidationError("probability-range",
                          "binary entropy argument " + std::to_string(q));
  }
  double h = 0;
  if (q > 0.0) h -= q * std::log2(q);
  if (q < 1.0) h -= (1.0 - q) * std::log2(1.0 - q);
  return h;
}

double shannon_entropy(std::span<const double> p) {
  double h = 0;
  for (double x : p) {
    if (x < -tol::psd) {
      throw ValidationError("nonnegative-weights",
                            "probability " + std::to_string(x));
    }
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

double von_neumann_entropy(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho.matrix(),
                                                      Eigen::EigenvaluesOnly);
  double h = 0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double lam = solver.eigenvalues()[i];
    if (lam > 0.0) h -= lam * std::log2(lam);
  }
  return h;
}

DensityOperator bell_diagonal_to_density(const BellDiagonalSpectrum& spectrum) {
  spectrum.validate();
  const std::array<ComplexVector, 4> basis = {bell_phi_plus(), bell_psi_minus(),
                                              bell_phi_minus(), bell_psi_plus()};
  const auto lam = spectrum.as_array();
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    rho += lam[i] * (basis[i] * basis[i].adjoint());
  }
  return DensityOperator(rho);
}

BellDiagonalSpectrum bell_diagonal_spectrum(const DensityOperator& rho,
                                            double tolerance) {
  if (rho.dim() != 4) {
    throw ValidationError("dimension", "expected a two-qubit state");
  }
  const std::array<ComplexVector, 4> basis = {bell_phi_plus(), bell_psi_minus(),
                                              bell_phi_minus(), bell_psi_plus()};
  std::array<double, 4> lam{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const std::complex<double> entry =
          (basis[i].adjoint() * rho.matrix() * basis[j])(0, 0);
      if (i == j) {
        lam[i] = entry.real();
      } else if (std::abs(entry) > tolerance) {
        throw ValidationError("bell-diagonal",
                              "off-diagonal Bell-basis entry of magnitude " +
                                  std::to_string(std::abs(entry)));
      }
    }
  }
  return {lam[0], lam[1], lam[2], lam[3]};
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, -I_UNIT, I_UNIT, 0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

namespace {
ComplexVector bell_vector(int i0, int i1, double sign) {
  ComplexVector v = ComplexVector::Zero(4);
  v[i0] = 1.0 / std::sqrt(2.0);
  v[i1] = sign / std::sqrt(2.0);
  return v;
}
}  // namespace

ComplexVector bell_phi_plus() { return bell_vector(0, 3, +1); }
ComplexVector bell_phi_minus() { return bell_vector(0, 3, -1); }
ComplexVector bell_psi_plus() { return bell_vector(1, 2, +1); }
ComplexVector bell_psi_minus() { return bell_vector(1, 2, -1); }

DensityOperator werner_state(double v) {
  if (v < 0.0 || v > 1.0) {
    throw ValidationError("probability-range",
                          "visibility " + std::to_string(v));
  }
  const ComplexVector phi = bell_phi_plus();
  return DensityOperator(v * (phi * phi.adjoint()) +
                         (1.0 - v) * ComplexMatrix::Identity(4, 4) / 4.0);
}

}  // namespace diqkd
