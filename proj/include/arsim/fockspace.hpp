// Copyright 2026 The arsim Authors
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

// Truncated Fock-space linear algebra for a spin coupled to up to three
// bosonic modes. Factor order is fixed globally: spin first, then modes
// a, b, c. The spin basis is (|up>, |down>), i.e. sigma_z = diag(1, -1).

#pragma once

#include <complex>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "arsim/error.hpp"

namespace arsim {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

// Identifies one tensor factor of a HilbertSpec.
class Slot {
 public:
  static Slot spin() { return Slot(-1); }
  static Slot mode(int index) { return Slot(index); }

  bool is_spin() const { return index_ < 0; }
  int mode_index() const { return index_; }
  bool operator==(const Slot&) const = default;

 private:
  explicit Slot(int index) : index_(index) {}
  int index_;
};

class HilbertSpec {
 public:
  HilbertSpec(bool has_spin, std::vector<int> mode_dims);

  static HilbertSpec spin_only() { return HilbertSpec(true, {}); }
  static HilbertSpec single_mode(int dim) { return HilbertSpec(false, {dim}); }
  static HilbertSpec spin_boson(std::vector<int> mode_dims) {
    return HilbertSpec(true, std::move(mode_dims));
  }

  bool has_spin() const { return has_spin_; }
  const std::vector<int>& mode_dims() const { return mode_dims_; }
  int num_modes() const { return static_cast<int>(mode_dims_.size()); }
  int num_factors() const { return num_modes() + (has_spin_ ? 1 : 0); }
  int dim() const { return dim_; }

  // Position of the slot in the factor list; throws SlotOutOfRange.
  int factor_index(Slot slot) const;
  int factor_dim(Slot slot) const;
  std::vector<int> factor_dims() const;

  // Product of the dimensions of all factors after the given one (the
  // row-major stride of that factor's index in the composite basis).
  int stride(Slot slot) const;

  bool operator==(const HilbertSpec&) const = default;

 private:
  bool has_spin_;
  std::vector<int> mode_dims_;
  int dim_;
};

// Square complex matrix on a HilbertSpec. Storage is sparse; every
// Hamiltonian built in this library is banded in the Fock basis.
class Operator {
 public:
  Operator(HilbertSpec spec, SparseMatrix matrix, bool hermitian_hint = false);

  static Operator identity(const HilbertSpec& spec);
  static Operator zero(const HilbertSpec& spec);
  static Operator from_dense(HilbertSpec spec, const DenseMatrix& m, bool hermitian_hint = false);

  const HilbertSpec& spec() const { return spec_; }
  const SparseMatrix& matrix() const { return matrix_; }
  DenseMatrix dense() const { return DenseMatrix(matrix_); }
  bool hermitian_hint() const { return hermitian_; }
  int dim() const { return spec_.dim(); }

  StateVector apply(const StateVector& v) const;
  cplx element(int row, int col) const { return matrix_.coeff(row, col); }

  Operator adjoint() const;
  double max_norm() const;
  // ||M - M^dagger||_max
  double hermiticity_defect() const;

  Operator& operator+=(const Operator& other);
  Operator& operator-=(const Operator& other);
  Operator& operator*=(double s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(double s, Operator a) { return a *= s; }
  friend Operator operator*(cplx s, const Operator& a);
  friend Operator operator*(const Operator& a, const Operator& b);

 private:
  HilbertSpec spec_;
  SparseMatrix matrix_;
  bool hermitian_;
};

Operator commutator(const Operator& a, const Operator& b);

// Pure state vector or density matrix on a HilbertSpec.
class QuantumState {
 public:
  // Validating factories: pure norm within 1e-8; mixed trace within 1e-8,
  // Hermitian within 1e-10, eigenvalues >= -1e-8.
  static QuantumState pure(HilbertSpec spec, StateVector psi);
  static QuantumState mixed(HilbertSpec spec, DenseMatrix rho);

  const HilbertSpec& spec() const { return spec_; }
  bool is_pure() const { return std::holds_alternative<StateVector>(data_); }
  const StateVector& vector() const;
  const DenseMatrix& matrix() const;
  // Density matrix for either kind.
  DenseMatrix density() const;

 private:
  QuantumState(HilbertSpec spec, std::variant<StateVector, DenseMatrix> data)
      : spec_(std::move(spec)), data_(std::move(data)) {}

  HilbertSpec spec_;
  std::variant<StateVector, DenseMatrix> data_;
};

struct LadderOps {
  Operator annihilation;
  Operator creation;
};

struct PauliOps {
  Operator x;
  Operator y;
  Operator z;
};

LadderOps ladder_ops(int dim);
PauliOps spin_ops();
Operator number_operator(int dim);

// Kronecker product of the underlying matrices (spec of the result is
// supplied by the caller).
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

// I (x) ... (x) op (x) ... (x) I with op placed on the given factor.
Operator embed(const Operator& op, Slot slot, const HilbertSpec& spec);

// exp[(r/2)(e^{i theta} a^dag^2 - e^{-i theta} a^2)]; throws Leakage when the
// top two Fock levels of S|0> carry more than 1e-6 population.
Operator squeeze_operator(double r, double theta, int dim);

// exp[beta (a^dag - a)], same leakage check.
Operator displace_operator(double beta, int dim);

// exp[-sigma_z beta (a^dag - a)] on spin (x) mode: |up> is displaced by -beta
// and |down> by +beta.
Operator conditional_displace_operator(double beta, int dim);

// exp(i pi Pi) with Pi = a^dag a + (sigma_x + 1)/2 on a spin plus one mode.
// It equals -sigma_x (x) (-1)^{a^dag a}, squares to the identity and commutes
// with the unperturbed probe Hamiltonian.
Operator parity_operator(const HilbertSpec& spec);

cplx expectation(const QuantumState& state, const Operator& op);

StateVector fock_state(int dim, int n);
StateVector coherent_state(double amplitude, int dim);
// Tensor product of per-factor vectors in factor order.
StateVector product_vector(const HilbertSpec& spec, const std::vector<StateVector>& factors);

// Population in the top `levels` Fock levels of one mode.
double top_level_population(const StateVector& psi, const HilbertSpec& spec, int mode,
                            int levels = 2);
double top_level_population(const DenseMatrix& rho, const HilbertSpec& spec, int mode,
                            int levels = 2);

// Default truncation: max(20, ceil(12 (beta^2 + sinh^2 r + nbar_target))).
int default_mode_dim(double beta, double r, double nbar_target = 0.0);

// Leakage threshold shared by static checks and the run-time monitor.
inline constexpr double kLeakageLimit = 1e-6;

namespace detail {
// exp(G) for anti-Hermitian G via the eigendecomposition of iG.
DenseMatrix expm_antihermitian(const DenseMatrix& generator);
}  // namespace detail

}  // namespace arsim
