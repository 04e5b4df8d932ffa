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

#include "arsim/fockspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace arsim {

namespace {

void require_same_spec(const HilbertSpec& a, const HilbertSpec& b, const char* where) {
  if (!(a == b)) throw Error(ErrorCode::SpecMismatch, std::string(where) + ": operands live on different spaces");
}

SparseMatrix sparse_identity(int n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

void check_leakage(const DenseMatrix& u, const char* what) {
  const int n = static_cast<int>(u.rows());
  const double top = u.col(0).tail(2).squaredNorm();
  if (top > kLeakageLimit) {
    throw Error(ErrorCode::Leakage, std::string(what) + ": population " + std::to_string(top) +
                                        " in the top two of " + std::to_string(n) + " Fock levels");
  }
}

}  // namespace

HilbertSpec::HilbertSpec(bool has_spin, std::vector<int> mode_dims)
    : has_spin_(has_spin), mode_dims_(std::move(mode_dims)), dim_(has_spin ? 2 : 1) {
  if (!has_spin_ && mode_dims_.empty()) {
    throw Error(ErrorCode::InvalidDimension, "space needs a spin or at least one mode");
  }
  for (int d : mode_dims_) {
    if (d < 2) throw Error(ErrorCode::InvalidDimension, "mode dimension must be >= 2, got " + std::to_string(d));
    dim_ *= d;
  }
}

int HilbertSpec::factor_index(Slot slot) const {
  if (slot.is_spin()) {
    if (!has_spin_) throw Error(ErrorCode::SlotOutOfRange, "space has no spin factor");
    return 0;
  }
  const int m = slot.mode_index();
  if (m < 0 || m >= num_modes()) {
    throw Error(ErrorCode::SlotOutOfRange, "mode index " + std::to_string(m) + " out of range");
  }
  return m + (has_spin_ ? 1 : 0);
}

int HilbertSpec::factor_dim(Slot slot) const {
  const int idx = factor_index(slot);
  return factor_dims()[idx];
}

std::vector<int> HilbertSpec::factor_dims() const {
  std::vector<int> dims;
  dims.reserve(num_factors());
  if (has_spin_) dims.push_back(2);
  dims.insert(dims.end(), mode_dims_.begin(), mode_dims_.end());
  return dims;
}

int HilbertSpec::stride(Slot slot) const {
  const auto dims = factor_dims();
  int s = 1;
  for (int i = factor_index(slot) + 1; i < static_cast<int>(dims.size()); ++i) s *= dims[i];
  return s;
}

// ---------------------------------------------------------------------------

Operator::Operator(HilbertSpec spec, SparseMatrix matrix, bool hermitian_hint)
    : spec_(std::move(spec)), matrix_(std::move(matrix)), hermitian_(hermitian_hint) {
  if (matrix_.rows() != spec_.dim() || matrix_.cols() != spec_.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix is " + std::to_string(matrix_.rows()) + "x" + std::to_string(matrix_.cols()) +
                    ", space dimension is " + std::to_string(spec_.dim()));
  }
  matrix_.makeCompressed();
  if (hermitian_) {
    const double scale = max_norm();
    if (hermiticity_defect() > 1e-12 * std::max(scale, 1e-300)) {
      throw Error(ErrorCode::NotHermitian, "hermitian hint set on a non-Hermitian matrix");
    }
  }
}

Operator Operator::identity(const HilbertSpec& spec) {
  return Operator(spec, sparse_identity(spec.dim()), true);
}

Operator Operator::zero(const HilbertSpec& spec) {
  return Operator(spec, SparseMatrix(spec.dim(), spec.dim()), true);
}

Operator Operator::from_dense(HilbertSpec spec, const DenseMatrix& m, bool hermitian_hint) {
  return Operator(std::move(spec), m.sparseView(0.0, 0.0), hermitian_hint);
}

StateVector Operator::apply(const StateVector& v) const {
  if (v.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "vector size does not match operator");
  return matrix_ * v;
}

Operator Operator::adjoint() const {
  return Operator(spec_, SparseMatrix(matrix_.adjoint()), hermitian_);
}

double Operator::max_norm() const {
  double m = 0.0;
  for (int k = 0; k < matrix_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double Operator::hermiticity_defect() const {
  const SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  double m = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

Operator& Operator::operator+=(const Operator& other) {
  require_same_spec(spec_, other.spec_, "operator+");
  matrix_ = matrix_ + other.matrix_;
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

Operator& Operator::operator-=(const Operator& other) {
  require_same_spec(spec_, other.spec_, "operator-");
  matrix_ = matrix_ - other.matrix_;
  hermitian_ = hermitian_ && other.hermitian_;
  return *this;
}

Operator& Operator::operator*=(double s) {
  matrix_ *= cplx(s, 0.0);
  return *this;
}

Operator operator*(cplx s, const Operator& a) {
  SparseMatrix m = a.matrix_ * s;
  return Operator(a.spec_, std::move(m), a.hermitian_ && s.imag() == 0.0);
}

Operator operator*(const Operator& a, const Operator& b) {
  require_same_spec(a.spec_, b.spec_, "operator*");
  SparseMatrix m = a.matrix_ * b.matrix_;
  m.prune(cplx(0.0, 0.0));
  return Operator(a.spec_, std::move(m), false);
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

// ---------------------------------------------------------------------------

QuantumState QuantumState::pure(HilbertSpec spec, StateVector psi) {
  if (psi.size() != spec.dim()) throw Error(ErrorCode::DimensionMismatch, "state vector size does not match space");
  if (std::abs(psi.norm() - 1.0) > 1e-8) {
    throw Error(ErrorCode::InvalidState, "pure state norm deviates from 1 by " + std::to_string(psi.norm() - 1.0));
  }
  return QuantumState(std::move(spec), std::move(psi));
}

QuantumState QuantumState::mixed(HilbertSpec spec, DenseMatrix rho) {
  if (rho.rows() != spec.dim() || rho.cols() != spec.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "density matrix size does not match space");
  }
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-8) throw Error(ErrorCode::InvalidState, "density matrix trace != 1");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw Error(ErrorCode::InvalidState, "density matrix is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Eigensolver, "density matrix spectrum");
  if (es.eigenvalues().minCoeff() < -1e-8) throw Error(ErrorCode::InvalidState, "density matrix has negative eigenvalue");
  return QuantumState(std::move(spec), std::move(rho));
}

const StateVector& QuantumState::vector() const {
  if (!is_pure()) throw Error(ErrorCode::InvalidState, "state is mixed");
  return std::get<StateVector>(data_);
}

const DenseMatrix& QuantumState::matrix() const {
  if (is_pure()) throw Error(ErrorCode::InvalidState, "state is pure");
  return std::get<DenseMatrix>(data_);
}

DenseMatrix QuantumState::density() const {
  if (is_pure()) {
    const auto& v = std::get<StateVector>(data_);
    return v * v.adjoint();
  }
  return std::get<DenseMatrix>(data_);
}

// ---------------------------------------------------------------------------

LadderOps ladder_ops(int dim) {
  if (dim < 2) throw Error(ErrorCode::InvalidDimension, "ladder operators need dim >= 2");
  std::vector<Eigen::Triplet<cplx>> t;
  for (int n = 1; n < dim; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  SparseMatrix a(dim, dim);
  a.setFromTriplets(t.begin(), t.end());
  const auto spec = HilbertSpec::single_mode(dim);
  Operator ann(spec, a);
  return {ann, ann.adjoint()};
}

PauliOps spin_ops() {
  const auto spec = HilbertSpec::spin_only();
  const cplx i(0.0, 1.0);
  DenseMatrix x(2, 2), y(2, 2), z(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  y << 0.0, -i, i, 0.0;
  z << 1.0, 0.0, 0.0, -1.0;
  return {Operator::from_dense(spec, x, true), Operator::from_dense(spec, y, true),
          Operator::from_dense(spec, z, true)};
}

Operator number_operator(int dim) {
  if (dim < 2) throw Error(ErrorCode::InvalidDimension, "number operator needs dim >= 2");
  SparseMatrix n(dim, dim);
  for (int k = 0; k < dim; ++k) n.insert(k, k) = static_cast<double>(k);
  return Operator(HilbertSpec::single_mode(dim), n, true);
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  const Eigen::Index rb = b.rows(), cb = b.cols();
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(static_cast<size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(static_cast<int>(ia.row() * rb + ib.row()), static_cast<int>(ia.col() * cb + ib.col()),
                         ia.value() * ib.value());
  SparseMatrix out(a.rows() * rb, a.cols() * cb);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Operator embed(const Operator& op, Slot slot, const HilbertSpec& spec) {
  const int idx = spec.factor_index(slot);
  const auto dims = spec.factor_dims();
  if (op.dim() != dims[idx]) {
    throw Error(ErrorCode::DimensionMismatch, "operator dimension " + std::to_string(op.dim()) +
                                                 " does not match factor dimension " + std::to_string(dims[idx]));
  }
  int left = 1, right = 1;
  for (int i = 0; i < idx; ++i) left *= dims[i];
  for (int i = idx + 1; i < static_cast<int>(dims.size()); ++i) right *= dims[i];
  SparseMatrix m = kron(kron(sparse_identity(left), op.matrix()), sparse_identity(right));
  return Operator(spec, std::move(m), op.hermitian_hint());
}

namespace detail {

DenseMatrix expm_antihermitian(const DenseMatrix& generator) {
  const cplx i(0.0, 1.0);
  const DenseMatrix k = i * generator;  // Hermitian
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (k + k.adjoint()));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Eigensolver, "matrix exponential");
  const Eigen::VectorXcd phases = (-i * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

Operator squeeze_operator(double r, double theta, int dim) {
  const auto [a, ad] = ladder_ops(dim);
  const DenseMatrix A = a.dense(), Ad = ad.dense();
  const DenseMatrix gen = 0.5 * r * (std::polar(1.0, theta) * Ad * Ad - std::polar(1.0, -theta) * A * A);
  const DenseMatrix u = detail::expm_antihermitian(gen);
  check_leakage(u, "squeeze_operator");
  return Operator::from_dense(HilbertSpec::single_mode(dim), u);
}

Operator displace_operator(double beta, int dim) {
  const auto [a, ad] = ladder_ops(dim);
  const DenseMatrix gen = beta * (ad.dense() - a.dense());
  const DenseMatrix u = detail::expm_antihermitian(gen);
  check_leakage(u, "displace_operator");
  return Operator::from_dense(HilbertSpec::single_mode(dim), u);
}

Operator conditional_displace_operator(double beta, int dim) {
  // sigma_z = +1 block gets exp(-beta(a^dag - a)), sigma_z = -1 block exp(+beta(...)).
  const SparseMatrix up = displace_operator(-beta, dim).matrix();
  const SparseMatrix down = displace_operator(beta, dim).matrix();
  SparseMatrix pu(2, 2), pd(2, 2);
  pu.insert(0, 0) = 1.0;
  pd.insert(1, 1) = 1.0;
  SparseMatrix m = kron(pu, up) + kron(pd, down);
  return Operator(HilbertSpec::spin_boson({dim}), std::move(m));
}

Operator parity_operator(const HilbertSpec& spec) {
  if (!spec.has_spin() || spec.num_modes() != 1) {
    throw Error(ErrorCode::UnsupportedSpec, "parity operator needs a spin and exactly one mode");
  }
  const int dim = spec.mode_dims()[0];
  SparseMatrix sx(2, 2), sign(dim, dim);
  sx.insert(0, 1) = -1.0;
  sx.insert(1, 0) = -1.0;
  for (int n = 0; n < dim; ++n) sign.insert(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return Operator(spec, kron(sx, sign), true);
}

cplx expectation(const QuantumState& state, const Operator& op) {
  require_same_spec(state.spec(), op.spec(), "expectation");
  if (state.is_pure()) {
    const auto& v = state.vector();
    return v.dot(op.matrix() * v);
  }
  const DenseMatrix& rho = state.matrix();
  cplx tr = 0.0;
  const SparseMatrix& m = op.matrix();
  // Tr(rho O) = sum_{ij} rho_ji O_ij
  for (int i = 0; i < m.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) tr += rho(it.col(), it.row()) * it.value();
  return tr;
}

StateVector fock_state(int dim, int n) {
  if (dim < 2) throw Error(ErrorCode::InvalidDimension, "fock_state needs dim >= 2");
  if (n < 0 || n >= dim) throw Error(ErrorCode::InvalidDimension, "Fock index outside truncation");
  StateVector v = StateVector::Zero(dim);
  v(n) = 1.0;
  return v;
}

StateVector coherent_state(double amplitude, int dim) {
  return displace_operator(amplitude, dim).matrix() * fock_state(dim, 0);
}

StateVector product_vector(const HilbertSpec& spec, const std::vector<StateVector>& factors) {
  const auto dims = spec.factor_dims();
  if (factors.size() != dims.size()) throw Error(ErrorCode::DimensionMismatch, "one vector per factor required");
  StateVector out = StateVector::Ones(1);
  for (size_t f = 0; f < factors.size(); ++f) {
    if (factors[f].size() != dims[f]) throw Error(ErrorCode::DimensionMismatch, "factor vector size mismatch");
    StateVector next(out.size() * factors[f].size());
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * factors[f].size(), factors[f].size()) = out(i) * factors[f];
    out = std::move(next);
  }
  return out;
}

namespace {

template <class Weight>
double top_population_impl(const HilbertSpec& spec, int mode, int levels, Weight&& weight) {
  const Slot slot = Slot::mode(mode);
  const int d = spec.factor_dim(slot);
  const int stride = spec.stride(slot);
  const int lo = std::max(0, d - levels);
  double p = 0.0;
  for (int i = 0; i < spec.dim(); ++i) {
    const int n = (i / stride) % d;
    if (n >= lo) p += weight(i);
  }
  return p;
}

}  // namespace

double top_level_population(const StateVector& psi, const HilbertSpec& spec, int mode, int levels) {
  return top_population_impl(spec, mode, levels, [&](int i) { return std::norm(psi(i)); });
}

double top_level_population(const DenseMatrix& rho, const HilbertSpec& spec, int mode, int levels) {
  return top_population_impl(spec, mode, levels, [&](int i) { return rho(i, i).real(); });
}

int default_mode_dim(double beta, double r, double nbar_target) {
  const double s = std::sinh(r);
  const double need = std::ceil(12.0 * (beta * beta + s * s + nbar_target));
  return std::max(20, static_cast<int>(need));
}

}  // namespace arsim
