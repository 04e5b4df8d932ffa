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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "arsim/analytic.hpp"
#include "arsim/metrology.hpp"

using namespace arsim;
using std::numbers::pi;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no arsim::Error thrown");
  return ErrorCode::Config;
}

StateVector spin(cplx up, cplx down) {
  StateVector v(2);
  v << up, down;
  return v;
}

QuantumState demkov_state(double alpha, double tau, double x, double t) {
  const auto a = demkov_exact({alpha, tau, x, t});
  return QuantumState::pure(HilbertSpec::spin_only(), spin(a.c_up, a.c_down));
}

}  // namespace

TEST_CASE("Bloch vector") {
  const auto spec = HilbertSpec::spin_boson({5});
  const StateVector minus = spin(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
  StateVector mode = StateVector::Random(5);
  mode.normalize();
  const auto b = bloch(QuantumState::pure(spec, product_vector(spec, {minus, mode})));
  CHECK(b[0] == doctest::Approx(-1.0));
  CHECK(std::abs(b[1]) < 1e-15);
  CHECK(std::abs(b[2]) < 1e-15);

  const DenseMatrix rho = DenseMatrix::Identity(10, 10) / 10.0;
  const auto m = bloch(QuantumState::mixed(spec, rho));
  for (double c : m) CHECK(std::abs(c) < 1e-15);

  const auto y = bloch(QuantumState::pure(HilbertSpec::spin_only(), spin(1.0 / std::sqrt(2.0), cplx(0.0, 1.0 / std::sqrt(2.0)))));
  CHECK(y[1] == doctest::Approx(1.0));
  CHECK(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] <= 1.0 + 1e-8);
  CHECK(code_of([] { bloch(QuantumState::pure(HilbertSpec::single_mode(3), StateVector::Unit(3, 0))); }) ==
        ErrorCode::SpecMismatch);
}

TEST_CASE("error propagation of the closed-form signal") {
  const double tau = 3.5e-3, nbar = 1.0, s = std::pow(nbar, 1.5);
  const auto sig = [&](double f) { return std::tanh(2.0 * pi * tau * f * s); };
  const double f0 = 2.0 * pi * 0.5;
  const auto r = error_propagation(sig, f0, 1e-3 * f0);
  CHECK(r.delta == doctest::Approx(uncertainty_closed(SingleModeOccupation{3, nbar}, f0, tau)).epsilon(1e-6));
  const auto r0 = error_propagation(sig, 0.0, 1.0);
  CHECK(r0.delta == doctest::Approx(1.0 / (2.0 * pi * tau * s)).epsilon(1e-6));
  CHECK(r0.signal == 0.0);

  const auto flipped = error_propagation([&](double f) { return -sig(f); }, f0, 1e-3 * f0);
  CHECK(flipped.delta == doctest::Approx(r.delta).epsilon(1e-12));

  ErrorPropagationOptions par;
  par.evaluator = make_evaluator(4);
  CHECK(error_propagation(sig, f0, 1e-3 * f0, par).delta == r.delta);
}

TEST_CASE("error propagation quality gates") {
  ErrorPropagationOptions opts;
  opts.noise_floor = 1e-3;
  CHECK(code_of([&] { error_propagation([](double x) { return 1e-6 * x; }, 0.0, 1.0, opts); }) ==
        ErrorCode::DerivativeUnresolved);
  // A step far beyond the curvature scale fails the Richardson check.
  CHECK(code_of([] { error_propagation([](double x) { return std::tanh(x); }, 1.0, 2.0); }) ==
        ErrorCode::DerivativeUnresolved);
  CHECK(code_of([] { error_propagation([](double x) { return x; }, 0.0, 0.0); }) == ErrorCode::Domain);
}

TEST_CASE("numerical QFI") {
  const StateVector plus = spin(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  const auto rotated = [&](double l) {
    return QuantumState::pure(HilbertSpec::spin_only(), spin(plus(0) * std::polar(1.0, -0.5 * l),
                                                              plus(1) * std::polar(1.0, 0.5 * l)));
  };
  CHECK(qfi_numeric(rotated, 0.3, 1e-3) == doctest::Approx(1.0).epsilon(1e-6));

  // Global phase redefinition leaves the QFI unchanged.
  const auto phased = [&](double l) {
    const StateVector v = rotated(l).vector() * std::polar(1.0, 3.0 * l * l + l);
    return QuantumState::pure(HilbertSpec::spin_only(), v);
  };
  CHECK(qfi_numeric(phased, 0.3, 1e-3) == doctest::Approx(1.0).epsilon(1e-6));

  const auto constant = [&](double) { return QuantumState::pure(HilbertSpec::spin_only(), plus); };
  CHECK(std::abs(qfi_numeric(constant, 0.0, 1e-2)) < 1e-8);
}

TEST_CASE("QFI of the Demkov amplitudes") {
  const double tau = 1.0, x = 20000.0, t = 22.0, alpha = 0.1;
  const auto fam = [&](double a) { return demkov_state(a, tau, x, t); };
  const double numeric = qfi_numeric(fam, alpha, 1e-3);
  const double closed = qfi_closed(1.0, tau, x * std::exp(-t / tau), alpha, t).exact;
  CHECK(std::abs(numeric - closed) <= 1e-4 * closed);

  // Cramer-Rao ordering on the same final states.
  const auto sig = [&](double a) {
    const auto s = demkov_exact({a, tau, x, t});
    return std::norm(s.c_up) - std::norm(s.c_down);
  };
  const double delta = error_propagation(sig, alpha, 1e-3).delta;
  CHECK(delta >= 1.0 / std::sqrt(numeric) - 1e-6);
}

TEST_CASE("power-law fits") {
  std::vector<std::pair<double, double>> pts;
  for (double n : {0.5, 1.0, 2.0, 4.0, 8.0}) pts.emplace_back(n, 3.7 * std::pow(n, -1.5));
  const ScalingFit fit = fit_scaling(pts);
  CHECK(std::abs(fit.slope + 1.5) < 1e-12);
  CHECK(fit.intercept == doctest::Approx(std::log(3.7)));
  CHECK(fit.residual < 1e-12);

  std::vector<std::pair<double, double>> scaled;
  for (auto [x, y] : pts) scaled.emplace_back(10.0 * x, y);
  CHECK(std::abs(fit_scaling(scaled).slope - fit.slope) < 1e-12);

  std::vector<std::pair<double, double>> noisy = pts;
  noisy[2].second *= 1.1;
  CHECK(fit_scaling(noisy).residual > 0.01);

  CHECK(code_of([&] { fit_scaling({pts.begin(), pts.begin() + 3}); }) == ErrorCode::InsufficientPoints);
  pts[1].second = -1.0;
  CHECK(code_of([&] { fit_scaling(pts); }) == ErrorCode::Domain);
}

TEST_CASE("batch evaluator keeps order") {
  const auto eval = make_evaluator(3);
  const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0, 5.0};
  const auto ys = eval([](double x) { return x * x; }, xs);
  REQUIRE(ys.size() == xs.size());
  for (size_t i = 0; i < xs.size(); ++i) CHECK(ys[i] == xs[i] * xs[i]);
}
