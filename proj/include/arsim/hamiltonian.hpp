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

// Builders for the squeezed Rabi probe, the symmetry-breaking perturbations
// and the beyond-Lamb-Dicke coupling. Units: hbar = 1, angular frequencies.

#pragma once

#include <functional>
#include <numbers>
#include <variant>
#include <vector>

#include "arsim/fockspace.hpp"

namespace arsim {

// Dimensionless ramp shape f(s) with s = t/tau and f(0) = 1.
using RampProfile = std::function<double(double)>;

struct ProbeParams {
  double omega = 0.0;
  double rabi0 = 0.0;
  double g = 0.0;
  double xi = 0.0;
  double theta = std::numbers::pi;
  double tau = 0.0;
  double t_final = 0.0;
  RampProfile profile;  // empty means exp(-s)

  // Throws Domain on 2 xi >= omega, negative rates or nonpositive times.
  void validate() const;
  double rabi(double t) const;
};

struct NoPerturbation {};
struct SingleModePerturbation {
  int k = 3;
  double f = 0.0;
};
struct TwoModePerturbation {
  double f = 0.0;
};
struct ThreeModePerturbation {
  double f = 0.0;
};
using PerturbationSpec =
    std::variant<NoPerturbation, SingleModePerturbation, TwoModePerturbation, ThreeModePerturbation>;

struct LinearCoupling {};
struct BeyondLambDicke {
  double eta = 0.0;
};
using CouplingForm = std::variant<LinearCoupling, BeyondLambDicke>;

// Number of bosonic modes the perturbation acts on (0 for none).
int required_modes(const PerturbationSpec& pert);
// Copy of pert with its amplitude replaced.
PerturbationSpec with_amplitude(const PerturbationSpec& pert, double f);
double amplitude(const PerturbationSpec& pert);

double rabi_schedule(double rabi0, double tau, double t);
double rabi_schedule(double rabi0, double tau, double t, const RampProfile& profile);

// H(t) = sum_i c_i(t) O_i. A term without a coefficient function is static.
class TimeDependentHamiltonian {
 public:
  struct Term {
    Operator op;
    std::function<double(double)> coeff;
  };

  explicit TimeDependentHamiltonian(HilbertSpec spec);

  void add_static(const Operator& op);
  void add_term(const Operator& op, std::function<double(double)> coeff);

  const HilbertSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim(); }
  const Operator& static_part() const { return static_; }
  const std::vector<Term>& terms() const { return terms_; }

  Operator at(double t) const;
  // out = H(t) v
  void apply(double t, const StateVector& v, StateVector& out) const;
  // out = H(t) M for dense M (columns are independent vectors).
  void apply(double t, const DenseMatrix& m, DenseMatrix& out) const;

 private:
  HilbertSpec spec_;
  Operator static_;
  std::vector<Term> terms_;
};

// omega a^dag a + (Omega(t)/2) sigma_x + coupling + xi (a^dag^2 e^{i theta} + h.c.)
// on mode a of spec. Modes b, c see the identity.
Operator rabi_hamiltonian(const ProbeParams& p, double t, const HilbertSpec& spec,
                          const CouplingForm& coupling = LinearCoupling{});

// The probe as a static part plus the sigma_x drive with coefficient
// Omega(t)/2, and optionally the perturbation folded into the static part.
TimeDependentHamiltonian probe_hamiltonian(const ProbeParams& p, const HilbertSpec& spec,
                                           const CouplingForm& coupling = LinearCoupling{},
                                           const PerturbationSpec& pert = NoPerturbation{});

Operator perturbation_hamiltonian(const PerturbationSpec& pert, const HilbertSpec& spec);

// Diagonal F(n) with entries e^{-eta^2/2} L_m^{(1)}(eta^2)/(m+1).
Operator lamb_dicke_factor(double eta, int dim);

struct TwoStateInputs {
  double alpha = 0.0;           // closed form in beta = displacement_amplitude(...)
  double alpha_numeric = 0.0;   // truncated-space matrix element
  double alpha_physical = 0.0;  // matrix element in the true lowest manifold
  double beta = 0.0;
  double r = 0.0;
  std::function<double(double)> gap0;  // Omega(t) e^{-2 beta^2}
};

// Single-mode perturbations only. Throws Reconciliation when the closed
// form and the numerical matrix element disagree by more than
// 1e-6 max(|alpha|, 1).
TwoStateInputs two_state_inputs(const ProbeParams& p, const PerturbationSpec& pert);

}  // namespace arsim
