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

// Closed-form results for the squeezed Rabi probe: squeezing and
// displacement amplitudes, gaps, perturbation matrix elements, the Demkov
// two-state solution, signals, uncertainties and the quantum Fisher
// information.

#pragma once

#include <complex>
#include <variant>

namespace arsim {

using cplx = std::complex<double>;

// r = (1/4) ln((1 + 2 xi/omega)/(1 - 2 xi/omega)); Domain error at 2 xi >= omega.
double squeeze_amplitude(double omega, double xi);
// omega sqrt(1 - (2 xi/omega)^2)
double effective_frequency(double omega, double xi);
// beta = -g e^r / omega_eff
double displacement_amplitude(double omega, double xi, double g);
// (g/omega)^2 (1 - 2xi/omega)^-2 + (1/2)(1 - (2xi/omega)^2)^{-1/2} - 1/2
double mean_phonons(double omega, double xi, double g);
// Delta_n = Omega e^{-2 beta^2} L_n(4 beta^2)
double gap(int n, double rabi, double beta);

// Single-mode matrix element f <a^k + a^dag^k> in S(r) D(beta)|0>, via Tricomi U.
double alpha_single_mode(int k, double f, double beta, double r);

struct TwoModeOccupation {
  double nbar_a = 0.0;
  double nbar_b = 0.0;
};
struct ThreeModeOccupation {
  double nbar_a = 0.0;
  double nbar_b = 0.0;
  double nbar_c = 0.0;
};
// alpha_ab = 2 f sqrt(nbar_a) nbar_b, alpha_abc = 2 f sqrt(nbar_a nbar_b nbar_c).
double alpha_multimode(const TwoModeOccupation& occ, double f);
double alpha_multimode(const ThreeModeOccupation& occ, double f);

struct DemkovInputs {
  double alpha = 0.0;
  double tau = 0.0;
  double x = 0.0;
  double t = 0.0;
};

struct SpinAmplitudes {
  cplx c_up;
  cplx c_down;
  // False when the asymptotic preconditions z << 1 and x >> |nu^2 - 1/4|
  // are not met (only set by demkov_asymptotic).
  bool precondition_ok = true;
};

// x = (Omega_0 tau / 2) e^{-2 beta^2}
double demkov_x(double rabi0, double tau, double beta);

// Bessel-function solution of the two-state problem
//   i c_up'   = -alpha c_up + (Delta_0(t)/2) c_down
//   i c_down' =  alpha c_down + (Delta_0(t)/2) c_up,  Delta_0 = (2x/tau) e^{-t/tau},
// starting from c_up = 1/sqrt2, c_down = -1/sqrt2.
SpinAmplitudes demkov_exact(const DemkovInputs& in);
SpinAmplitudes demkov_asymptotic(const DemkovInputs& in);

// tanh(pi alpha tau)
double signal(double alpha, double tau);
double thermal_signal(double alpha, double tau, double nbar_th);

struct SingleModeOccupation {
  int k = 3;
  double nbar = 0.0;
};
using UncertaintyKind = std::variant<SingleModeOccupation, TwoModeOccupation, ThreeModeOccupation>;

// The occupation factor S with alpha = 2 f S.
double sensitivity_factor(const UncertaintyKind& kind);
// cosh(2 pi tau f S)/(2 pi tau S); ZeroOccupation error when S = 0.
double uncertainty_closed(const UncertaintyKind& kind, double f, double tau);

// Brace placement variants of the exact QFI expression.
enum class QfiForm {
  // {... + 2 Re psi (ln 16 - 4 ln z + 2 Re psi)}
  InnerProduct,
  // {... + 2 Re psi (ln 16 - 4 ln z) + 2 Re psi}
  TrailingLinear,
  // {... + 2 Re psi ln 16 - 4 ln z + 2 Re psi}
  LeadingOnly,
};

inline constexpr QfiForm kQfiForm = QfiForm::InnerProduct;

struct QfiClosed {
  double exact = 0.0;
  double asymptotic = 0.0;
};

// Exact form with the given brace placement; Domain error for z <= 0.
double qfi_exact_form(QfiForm form, double dalpha_dlambda, double tau, double z, double alpha);
// exact: kQfiForm; asymptotic: 4 (d alpha)^2 t^2 sech^2(pi alpha tau).
QfiClosed qfi_closed(double dalpha_dlambda, double tau, double z, double alpha, double t);

}  // namespace arsim
