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

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace diqkd {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

// Fixed numerical tolerances used by the validating wrappers below.
namespace tol {
inline constexpr double hermitian = 1e-9;
inline constexpr double trace = 1e-9;
inline constexpr double psd = 1e-9;
inline constexpr double eigenvalue = 1e-8;
}  // namespace tol

// Thrown when an input fails a structural invariant; `invariant()` names the
// violated property so callers (and the CLI) can report it without parsing
// the message.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string invariant, const std::string& detail)
      : std::runtime_error("validation failed [" + invariant + "]: " + detail),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const { return invariant_; }

 private:
  std::string invariant_;
};

// Density operator: Hermitian within tol::hermitian, unit trace within
// tol::trace, eigenvalues >= -tol::psd.  Checked once at construction.
class DensityOperator {
 public:
  explicit DensityOperator(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  ComplexMatrix mat_;
};

// Binary (+-1-valued) observable: Hermitian, every eigenvalue within
// tol::eigenvalue of +1 or -1.
class BinaryObservable {
 public:
  explicit BinaryObservable(ComplexMatrix m);

  const ComplexMatrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

  // Spectral projectors; exact because A^2 ~ I.
  ComplexMatrix projector_plus() const;
  ComplexMatrix projector_minus() const;

 private:
  ComplexMatrix mat_;
};

// Spectrum of a two-qubit Bell-diagonal state, ordered
// (phi+, psi-, phi-, psi+).  Nonnegative, sums to 1 within tol::trace.
struct BellDiagonalSpectrum {
  double phi_plus = 1;
  double psi_minus = 0;
  double phi_minus = 0;
  double psi_plus = 0;

  void validate() const;
  std::array<double, 4> as_array() const {
    return {phi_plus, psi_minus, phi_minus, psi_plus};
  }
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector tensor(const ComplexVector& a, const ComplexVector& b);

struct HermitianEig {
  Eigen::VectorXd values;  // descending
  ComplexMatrix vectors;   // columns, phase-fixed (first non-tiny entry real > 0)
};

// Eigendecomposition of a Hermitian matrix with a deterministic ordering and
// phase convention, so repeated runs produce identical output.
HermitianEig hermitian_eig(const ComplexMatrix& m);

// Traces out the subsystems NOT listed in `keep`.  `dims` are the tensor
// factor dimensions in order; `keep` is an ascending list of factor indices.
ComplexMatrix partial_trace(const ComplexMatrix& m,
                            const std::vector<Eigen::Index>& dims,
                            const std::vector<std::size_t>& keep);
DensityOperator partial_trace(const DensityOperator& rho,
                              const std::vector<Eigen::Index>& dims,
                              const std::vector<std::size_t>& keep);

// Standard purification on system (x) ancilla, ancilla dimension = dim(rho).
// Tracing out the ancilla (factor 1) recovers rho; pure inputs come back as
// |psi> (x) |0>.
ComplexVector purify(const DensityOperator& rho);

// Entropies in bits.
double binary_entropy(double q);
double shannon_entropy(std::span<const double> p);
double von_neumann_entropy(const DensityOperator& rho);

DensityOperator bell_diagonal_to_density(const BellDiagonalSpectrum& spectrum);

// Extracts the Bell-basis diagonal of a two-qubit state; throws
// ValidationError("bell-diagonal") if any off-diagonal Bell-basis entry
// exceeds the tolerance.
BellDiagonalSpectrum bell_diagonal_spectrum(const DensityOperator& rho,
                                            double tolerance = 1e-9);

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix identity(Eigen::Index n);

// Bell vectors in the computational basis.
ComplexVector bell_phi_plus();
ComplexVector bell_phi_minus();
ComplexVector bell_psi_plus();
ComplexVector bell_psi_minus();

// v |phi+><phi+| + (1-v) I/4.
DensityOperator werner_state(double v);

}  // namespace diqkd
