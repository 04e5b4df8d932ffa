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

#include "arsim/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "arsim/error.hpp"

namespace arsim {

namespace {

#ifdef __SIZEOF_FLOAT128__
using wide = __float128;
#else
using wide = long double;
#endif

struct WideComplex {
  wide re = 0, im = 0;
  double norm() const { return static_cast<double>(re * re + im * im); }
};

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// B_{2k} / (2k (2k-1))
constexpr std::array<double, 8> kStirling = {1.0 / 12.0,    -1.0 / 360.0,          1.0 / 1260.0, -1.0 / 1680.0,
                                             1.0 / 1188.0,  -691.0 / 360360.0,     1.0 / 156.0,  -3617.0 / 122400.0};
// B_{2k} / (2k)
constexpr std::array<double, 8> kDigammaAsym = {1.0 / 12.0,  -1.0 / 120.0,       1.0 / 252.0, -1.0 / 240.0,
                                                1.0 / 132.0, -691.0 / 32760.0,   1.0 / 12.0,  -3617.0 / 8160.0};

constexpr double kShift = 15.0;

}  // namespace

cplx log_gamma(cplx z) {
  if (is_nonpositive_integer(z)) throw Error(ErrorCode::Pole, "log_gamma at nonpositive integer");
  cplx shift_sum = 0.0;
  cplx w = z;
  while (w.real() < kShift) {
    shift_sum += std::log(w);
    w += 1.0;
  }
  const cplx inv = 1.0 / w;
  const cplx inv2 = inv * inv;
  cplx series = 0.0;
  cplx p = inv;
  for (double c : kStirling) {
    series += c * p;
    p *= inv2;
  }
  const cplx lg = (w - 0.5) * std::log(w) - w + 0.5 * std::log(2.0 * kPi) + series;
  return lg - shift_sum;
}

cplx digamma(cplx z) {
  if (is_nonpositive_integer(z)) throw Error(ErrorCode::Pole, "digamma at nonpositive integer");
  if (z.real() < 0.5) {
    const cplx pz = kPi * z;
    return digamma(1.0 - z) - kPi * std::cos(pz) / std::sin(pz);
  }
  cplx shift_sum = 0.0;
  cplx w = z;
  while (w.real() < kShift) {
    shift_sum += 1.0 / w;
    w += 1.0;
  }
  const cplx inv2 = 1.0 / (w * w);
  cplx series = 0.0;
  cplx p = inv2;
  for (double c : kDigammaAsym) {
    series += c * p;
    p *= inv2;
  }
  return std::log(w) - 0.5 / w - series - shift_sum;
}

namespace detail {

cplx bessel_j_series(cplx nu, double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::Domain, "bessel_j needs x > 0");
  if (is_nonpositive_integer(nu + 1.0)) {
    const int m = static_cast<int>(-nu.real());
    return (m % 2 == 0 ? 1.0 : -1.0) * bessel_j_series(cplx(m, 0.0), x);
  }
  // Terms grow like e^x / x before cancelling, so the sum runs in extended precision.
  const wide vr = nu.real(), vi = nu.imag();
  const wide q = -0.25 * static_cast<wide>(x) * x;
  WideComplex term{1, 0}, sum{1, 0};
  double peak = 1.0;
  for (int k = 0; k < 2000; ++k) {
    const wide kk = k + 1;
    const wide dr = kk * (vr + kk), di = kk * vi;
    const wide den = dr * dr + di * di;
    const wide tr = q * (term.re * dr + term.im * di) / den;
    const wide ti = q * (term.im * dr - term.re * di) / den;
    term = {tr, ti};
    sum.re += tr;
    sum.im += ti;
    const double tn = term.norm(), sn = sum.norm();
    peak = std::max(peak, tn);
    if (k > x && tn < 1e-60 * sn) {
      if (peak > 1e40 * std::max(sn, 1.0)) {
        throw Error(ErrorCode::Domain, "bessel_j series lost precision at x = " + std::to_string(x));
      }
      const cplx pref = std::exp(nu * std::log(0.5 * x) - log_gamma(nu + 1.0));
      return pref * cplx(static_cast<double>(sum.re), static_cast<double>(sum.im));
    }
  }
  throw Error(ErrorCode::Domain, "bessel_j series did not converge");
}

cplx bessel_j_asymptotic(cplx nu, double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::Domain, "bessel_j needs x > 0");
  const cplx mu = 4.0 * nu * nu;
  cplx p = 1.0, q = 0.0;
  cplx a = 1.0;
  double last = 1.0;
  bool converged = false;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (8.0 * k * x);
    const double mag = std::abs(a);
    if (mag > last && k > std::abs(nu) + 1.0) break;  // series started to diverge
    last = mag;
    if (k % 2 == 1) {
      q += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * a;
    } else {
      p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * a;
    }
    if (mag < 1e-17) {
      converged = true;
      break;
    }
  }
  if (!converged && last > 1e-7) {
    throw Error(ErrorCode::Domain, "Hankel expansion not accurate at x = " + std::to_string(x));
  }
  const cplx chi = x - nu * (0.5 * kPi) - 0.25 * kPi;
  return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace detail

cplx bessel_j(cplx nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::Domain, "bessel_j needs finite x > 0");
  if (std::abs(nu.imag()) > 20.0) throw Error(ErrorCode::Domain, "bessel_j needs |Im nu| <= 20");
  return x < kBesselSwitch ? detail::bessel_j_series(nu, x) : detail::bessel_j_asymptotic(nu, x);
}

double assoc_laguerre(int n, double a, double x) {
  if (n < 0) throw Error(ErrorCode::Domain, "assoc_laguerre needs n >= 0");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + a - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double tricomi_u_nonpos(int n, double b, double z) {
  if (n < 0) throw Error(ErrorCode::Domain, "tricomi_u_nonpos needs n >= 0");
  double fact = 1.0;
  for (int k = 2; k <= n; ++k) fact *= k;
  return (n % 2 == 0 ? 1.0 : -1.0) * fact * assoc_laguerre(n, b - 1.0, z);
}

}  // namespace arsim
