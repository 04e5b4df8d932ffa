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

#include "arsim/analytic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "arsim/error.hpp"
#include "arsim/specfun.hpp"

namespace arsim {

namespace {

constexpr double kPi = std::numbers::pi;

double squeeze_ratio(double omega, double xi) {
  if (!(omega > 0.0) || xi < 0.0 || !(2.0 * xi < omega)) {
    throw Error(ErrorCode::Domain, "need omega > 0 and 0 <= 2 xi < omega");
  }
  return 2.0 * xi / omega;
}

}  // namespace

double squeeze_amplitude(double omega, double xi) {
  const double x = squeeze_ratio(omega, xi);
  return 0.25 * std::log((1.0 + x) / (1.0 - x));
}

double effective_frequency(double omega, double xi) {
  const double x = squeeze_ratio(omega, xi);
  return omega * std::sqrt(1.0 - x * x);
}

double displacement_amplitude(double omega, double xi, double g) {
  return -g * std::exp(squeeze_amplitude(omega, xi)) / effective_frequency(omega, xi);
}

double mean_phonons(double omega, double xi, double g) {
  const double x = squeeze_ratio(omega, xi);
  const double d = g / (omega * (1.0 - x));
  return d * d + 0.5 / std::sqrt(1.0 - x * x) - 0.5;
}

double gap(int n, double rabi, double beta) {
  const double b2 = beta * beta;
  return rabi * std::exp(-2.0 * b2) * assoc_laguerre(n, 0.0, 4.0 * b2);
}

double alpha_single_mode(int k, double f, double beta, double r) {
  if (k < 1) throw Error(ErrorCode::Domain, "perturbation order k must be >= 1");
  // <a^k> in S(r) D(beta)|0>: the moment of c + G with c = beta e^r and G a
  // Gaussian of variance sinh(2r)/2, written through U(-m, p + 1/2, .).
  const double c = beta * std::exp(r);
  const int m = k / 2, p = k % 2;
  const double s2 = std::sinh(2.0 * r);
  if (s2 == 0.0) return 2.0 * f * std::pow(c, k);
  const double u = tricomi_u_nonpos(m, p + 0.5, -c * c / s2);
  return 2.0 * f * (m % 2 == 0 ? 1.0 : -1.0) * std::pow(s2, m) * (p == 1 ? c : 1.0) * u;
}

double alpha_multimode(const TwoModeOccupation& occ, double f) {
  if (occ.nbar_a < 0.0 || occ.nbar_b < 0.0) throw Error(ErrorCode::Domain, "occupations must be >= 0");
  return 2.0 * f * std::sqrt(occ.nbar_a) * occ.nbar_b;
}

double alpha_multimode(const ThreeModeOccupation& occ, double f) {
  if (occ.nbar_a < 0.0 || occ.nbar_b < 0.0 || occ.nbar_c < 0.0) {
    throw Error(ErrorCode::Domain, "occupations must be >= 0");
  }
  return 2.0 * f * std::sqrt(occ.nbar_a * occ.nbar_b * occ.nbar_c);
}

double demkov_x(double rabi0, double tau, double beta) {
  return 0.5 * rabi0 * tau * std::exp(-2.0 * beta * beta);
}

namespace {

void check_demkov(const DemkovInputs& in) {
  if (!(in.tau > 0.0)) throw Error(ErrorCode::Domain, "Demkov model needs tau > 0");
  if (!(in.x > 0.0)) throw Error(ErrorCode::Domain, "Demkov model needs x > 0");
  if (in.t < 0.0) throw Error(ErrorCode::Domain, "Demkov model needs t >= 0");
}

}  // namespace

SpinAmplitudes demkov_exact(const DemkovInputs& in) {
  check_demkov(in);
  const double y = in.alpha * in.tau;
  const double s = in.t / in.tau;
  const double x = in.x;
  const double z = x * std::exp(-s);
  const cplx nu(0.5, y);
  const cplx i(0.0, 1.0);
  const double pre = kPi / (2.0 * std::sqrt(2.0)) * std::exp(-0.5 * s) * x / std::cosh(kPi * y);

  const cplx jx_nu = bessel_j(nu, x), jx_mnu = bessel_j(-nu, x);
  const cplx jx_1mnu = bessel_j(1.0 - nu, x), jx_num1 = bessel_j(nu - 1.0, x);
  const cplx jz_nu = bessel_j(nu, z), jz_mnu = bessel_j(-nu, z);
  const cplx jz_1mnu = bessel_j(1.0 - nu, z), jz_num1 = bessel_j(nu - 1.0, z);

  SpinAmplitudes out;
  out.c_up = pre * (jz_nu * (jx_1mnu - i * jx_mnu) + jz_mnu * (jx_num1 + i * jx_nu));
  out.c_down = -pre * (jz_num1 * (jx_mnu + i * jx_1mnu) + jz_1mnu * (jx_nu - i * jx_num1));
  return out;
}

SpinAmplitudes demkov_asymptotic(const DemkovInputs& in) {
  check_demkov(in);
  const double y = in.alpha * in.tau;
  const double z = in.x * std::exp(-in.t / in.tau);
  const cplx nu(0.5, y);
  const cplx i(0.0, 1.0);
  const double ch = std::cosh(kPi * y);
  const cplx phase = std::exp(i * in.x) * std::sqrt(0.5 * kPi) / ch;
  const cplx lz = std::log(0.5 * z);

  SpinAmplitudes out;
  out.c_up = phase * std::exp(-i * y * lz + 0.5 * kPi * y - log_gamma(cplx(0.5, -y)));
  out.c_down = -phase * std::exp(i * y * lz - 0.5 * kPi * y - log_gamma(cplx(0.5, y)));
  out.precondition_ok = z <= 0.1 && in.x >= 100.0 * std::abs(nu * nu - 0.25);
  return out;
}

double signal(double alpha, double tau) { return std::tanh(kPi * alpha * tau); }

double thermal_signal(double alpha, double tau, double nbar_th) {
  if (nbar_th < 0.0) throw Error(ErrorCode::Domain, "thermal occupation must be >= 0");
  return signal(alpha, tau) / (1.0 + 2.0 * nbar_th);
}

double sensitivity_factor(const UncertaintyKind& kind) {
  if (const auto* s = std::get_if<SingleModeOccupation>(&kind)) {
    if (s->nbar < 0.0) throw Error(ErrorCode::Domain, "occupation must be >= 0");
    return std::pow(s->nbar, 0.5 * s->k);
  }
  if (const auto* s = std::get_if<TwoModeOccupation>(&kind)) return alpha_multimode(*s, 0.5);
  return alpha_multimode(std::get<ThreeModeOccupation>(kind), 0.5);
}

double uncertainty_closed(const UncertaintyKind& kind, double f, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::Domain, "tau must be positive");
  const double s = sensitivity_factor(kind);
  if (!(s > 0.0)) throw Error(ErrorCode::ZeroOccupation, "uncertainty needs nonzero occupation");
  return std::cosh(2.0 * kPi * tau * f * s) / (2.0 * kPi * tau * s);
}

double qfi_exact_form(QfiForm form, double dalpha_dlambda, double tau, double z, double alpha) {
  if (!(z > 0.0)) throw Error(ErrorCode::Domain, "QFI needs z > 0");
  const double y = alpha * tau;
  const double sech = 1.0 / std::cosh(kPi * y);
  const double rp = digamma(cplx(0.5, y)).real();
  const double lz = std::log(z);
  const double l4 = std::log(4.0), l16 = std::log(16.0);
  double brace = kPi * kPi + l4 * l4 + 4.0 * std::log(z / 4.0) * lz;
  switch (form) {
    case QfiForm::InnerProduct:
      brace += 2.0 * rp * (l16 - 4.0 * lz + 2.0 * rp);
      break;
    case QfiForm::TrailingLinear:
      brace += 2.0 * rp * (l16 - 4.0 * lz) + 2.0 * rp;
      break;
    case QfiForm::LeadingOnly:
      brace += 2.0 * rp * l16 - 4.0 * lz + 2.0 * rp;
      break;
  }
  return dalpha_dlambda * dalpha_dlambda * tau * tau * sech * sech * brace;
}

QfiClosed qfi_closed(double dalpha_dlambda, double tau, double z, double alpha, double t) {
  QfiClosed out;
  out.exact = qfi_exact_form(kQfiForm, dalpha_dlambda, tau, z, alpha);
  const double sech = 1.0 / std::cosh(kPi * alpha * tau);
  out.asymptotic = 4.0 * dalpha_dlambda * dalpha_dlambda * t * t * sech * sech;
  return out;
}

}  // namespace arsim
