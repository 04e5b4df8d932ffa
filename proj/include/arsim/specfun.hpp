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

// Special functions of complex argument or order. Everything is computed
// from series, recurrences and asymptotic expansions; there are no tables.

#pragma once

#include <complex>

namespace arsim {

using cplx = std::complex<double>;

// Principal branch of ln Gamma(z). Throws Pole at nonpositive integers.
cplx log_gamma(cplx z);

// psi_0(z). Throws Pole at nonpositive integers.
cplx digamma(cplx z);

// J_nu(x) for complex order and real x > 0. Power series below x = 18,
// Hankel expansion above.
cplx bessel_j(cplx nu, double x);

// Generalized Laguerre polynomial L_n^{(a)}(x) by three-term recurrence.
double assoc_laguerre(int n, double a, double x);

// U(-n, b, z) = (-1)^n n! L_n^{(b-1)}(z).
double tricomi_u_nonpos(int n, double b, double z);

inline constexpr double kBesselSwitch = 18.0;

namespace detail {
cplx bessel_j_series(cplx nu, double x);
cplx bessel_j_asymptotic(cplx nu, double x);
}  // namespace detail

}  // namespace arsim
