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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "arsim/analytic.hpp"
#include "arsim/evolution.hpp"

using namespace arsim;
using std::numbers::pi;

namespace {

constexpr double kTwoPi = 2.0 * pi;

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

StateVector spin(double up, double down) {
  StateVector v(2);
  v << up, down;
  return v;
}

ProbeParams probe(double omega_hz, double rabi_hz, double g_hz, double xi_hz, double tau, double tf_over_tau) {
  ProbeParams p;
  p.omega = kTwoPi * omega_hz;
  p.rabi0 = kTwoPi * rabi_hz;
  p.g = kTwoPi * g_hz;
  p.xi = kTwoPi * xi_hz;
  p.tau = tau;
  p.t_final = tf_over_tau * tau;
  return p;
}

// A small probe that runs in well under a second.
ProbeRun small_probe() {
  ProbeRun run;
  run.params = probe(5e3, 20e3, 2e3, 500.0, 1e-3, 3.0);
  run.pert = SingleModePerturbation{3, kTwoPi * 20.0};
  run.mode_dims = {16};
  run.options.output_points = 31;
  return run;
}

}  // namespace

TEST_CASE("free oscillator") {
  const int d = 30;
  const double omega = 1.0, a0 = 1.0;
  const auto spec = HilbertSpec::single_mode(d);
  TimeDependentHamiltonian h(spec);
  h.add_static(omega * number_operator(d));
  for (Integrator integ : {Integrator::MagnusChebyshev, Integrator::DormandPrince}) {
    PropagationOptions opts;
    opts.integrator = integ;
    opts.rtol = 1e-12;
    opts.output_points = 41;
    opts.store_every = 1;
    const double t1 = 10.0 * kTwoPi / omega;
    const Trajectory tr = propagate(h, QuantumState::pure(spec, coherent_state(a0, d)), 0.0, t1, opts);
    const Operator a = ladder_ops(d).annihilation;
    REQUIRE(tr.states.size() + 1 == tr.times.size());
    REQUIRE(tr.state_times.size() == tr.states.size());
    const auto coherent_mean = [&](const StateVector& v, double t) {
      CHECK(std::abs(v.dot(a.apply(v)) - a0 * std::exp(cplx(0.0, -omega * t))) < 1e-7);
    };
    for (size_t i = 0; i < tr.states.size(); ++i) coherent_mean(tr.states[i].vector(), tr.state_times[i]);
    REQUIRE(tr.final_state);
    coherent_mean(tr.final_state->vector(), t1);
    for (double n : tr.observables.at("n_a")) CHECK(std::abs(n - a0 * a0) < 1e-9);
    CHECK(tr.diagnostics.max_norm_drift <= 1e-8);
  }
}

TEST_CASE("Rabi precession") {
  const auto spec = HilbertSpec::spin_only();
  const double rabi = 3.0;
  TimeDependentHamiltonian h(spec);
  h.add_static(0.5 * rabi * spin_ops().x);
  for (Integrator integ : {Integrator::MagnusChebyshev, Integrator::DormandPrince}) {
    PropagationOptions opts;
    opts.integrator = integ;
    opts.rtol = 1e-12;
    opts.output_points = 51;
    const Trajectory tr = propagate(h, QuantumState::pure(spec, spin(1.0, 0.0)), 0.0, 10.0, opts);
    for (size_t i = 0; i < tr.times.size(); ++i) {
      CHECK(std::abs(tr.observables.at("sigma_z")[i] - std::cos(rabi * tr.times[i])) < 1e-7);
    }
  }
}

TEST_CASE("time-dependent drive follows the rotation angle") {
  // H = (Omega(t)/2) sigma_x: <sigma_z> = cos(integral of Omega).
  const auto spec = HilbertSpec::spin_only();
  const double rabi0 = 4.0, tau = 1.5;
  TimeDependentHamiltonian h(spec);
  h.add_term(0.5 * spin_ops().x, [=](double t) { return rabi0 * std::exp(-t / tau); });
  PropagationOptions opts;
  opts.rtol = 1e-12;
  const Trajectory tr = propagate(h, QuantumState::pure(spec, spin(1.0, 0.0)), 0.0, 6.0, opts);
  for (size_t i = 0; i < tr.times.size(); i += 10) {
    const double angle = rabi0 * tau * (1.0 - std::exp(-tr.times[i] / tau));
    CHECK(std::abs(tr.observables.at("sigma_z")[i] - std::cos(angle)) < 1e-7);
  }
}

TEST_CASE("pure dephasing") {
  const auto spec = HilbertSpec::spin_only();
  TimeDependentHamiltonian h(spec);
  const double gamma = 0.7;
  const StateVector plus = spin(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
  PropagationOptions opts;
  opts.rtol = 1e-11;
  opts.output_points = 21;
  const Trajectory tr = propagate_lindblad(h, QuantumState::pure(spec, plus), gamma, 0.0, 4.0, opts);
  for (size_t i = 0; i < tr.times.size(); ++i) {
    CHECK(std::abs(tr.observables.at("sigma_x")[i] - std::exp(-gamma * tr.times[i])) < 1e-8);
    CHECK(std::abs(tr.observables.at("sigma_z")[i]) < 1e-12);
  }
  CHECK(code_of([&] { propagate_lindblad(h, QuantumState::pure(spec, plus), -1.0, 0.0, 1.0, opts); }) ==
        ErrorCode::Domain);
}

TEST_CASE("closed-system limit of the Lindblad propagator") {
  ProbeRun run = small_probe();
  run.options.rtol = 1e-10;
  const Trajectory pure = run_probe(run);
  run.gamma = 0.0;
  const HilbertSpec spec = probe_spec(run);
  const TimeDependentHamiltonian h = probe_hamiltonian(run.params, spec, run.coupling, run.pert);
  const StateVector psi0 = probe_initial_state(run);
  const Trajectory mixed =
      propagate_lindblad(h, QuantumState::mixed(spec, psi0 * psi0.adjoint()), 0.0, 0.0, run.params.t_final, run.options);
  for (const char* name : {"sigma_x", "sigma_y", "sigma_z", "n_a"}) {
    const auto& a = pure.series(name);
    const auto& b = mixed.series(name);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-7);
  }
  CHECK(mixed.diagnostics.max_hermiticity_defect <= 1e-10);
}

TEST_CASE("integrators agree on the probe") {
  ProbeRun run = small_probe();
  run.options.rtol = 1e-10;
  run.options.integrator = Integrator::MagnusChebyshev;
  const Trajectory m = run_probe(run);
  run.options.integrator = Integrator::DormandPrince;
  const Trajectory d = run_probe(run);
  run.options.interaction_frame = true;
  const Trajectory di = run_probe(run);
  for (size_t i = 0; i < m.times.size(); ++i) {
    CHECK(std::abs(m.series("sigma_z")[i] - d.series("sigma_z")[i]) < 1e-6);
    CHECK(std::abs(m.series("sigma_z")[i] - di.series("sigma_z")[i]) < 1e-6);
  }
  CHECK(m.final_value("sigma_z") != 0.0);
}

TEST_CASE("self-convergence under tolerance halving") {
  ProbeRun run = small_probe();
  run.options.rtol = 1e-8;
  const double a = run_probe(run).final_value("sigma_z");
  run.options.rtol = 5e-9;
  const double b = run_probe(run).final_value("sigma_z");
  CHECK(std::abs(a - b) < 1e-6);
}

TEST_CASE("odd response and parity conservation") {
  ProbeRun run = small_probe();
  const HilbertSpec spec = probe_spec(run);
  run.options.extra_observables = {{"parity", parity_operator(spec)}};
  const Trajectory plus = run_probe(run);
  run.pert = SingleModePerturbation{3, -kTwoPi * 20.0};
  const Trajectory minus = run_probe(run);
  CHECK(std::abs(plus.final_value("sigma_z") + minus.final_value("sigma_z")) < 1e-6);

  run.pert = NoPerturbation{};
  const Trajectory free = run_probe(run);
  const auto& par = free.series("parity");
  for (double v : par) CHECK(std::abs(v - par.front()) < 1e-6);
  CHECK(std::abs(free.final_value("sigma_z")) < 1e-6);
}

TEST_CASE("energy conservation for a static Hamiltonian") {
  const auto spec = HilbertSpec::spin_boson({30});
  auto p = probe(5e3, 20e3, 2e3, 500.0, 1.0, 1.0);
  const Operator h0 = rabi_hamiltonian(p, 0.0, spec);
  TimeDependentHamiltonian h(spec);
  h.add_static(h0);
  PropagationOptions opts;
  opts.extra_observables = {{"energy", h0}};
  StateVector psi = StateVector::Zero(spec.dim());
  psi(0) = 1.0;
  const Trajectory tr = propagate(h, QuantumState::pure(spec, psi), 0.0, 2e-3, opts);
  const auto& e = tr.series("energy");
  for (double v : e) CHECK(std::abs(v - e.front()) < 1e-7 * h0.max_norm());
}

TEST_CASE("ground states") {
  const int d = 40;
  const auto spec = HilbertSpec::spin_boson({d});
  const StateVector minus = spin(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));

  const auto gs0 = ground_state(rabi_hamiltonian(probe(5e3, 1e4, 0.0, 0.0, 1.0, 1.0), 0.0, spec));
  CHECK_FALSE(gs0.degenerate);
  const StateVector ref0 = product_vector(spec, {minus, fock_state(d, 0)});
  CHECK(std::norm(ref0.dot(gs0.state.vector())) >= 1.0 - 1e-10);

  const auto p = probe(5e3, 1e4, 0.0, 1e3, 1.0, 1.0);
  const auto gs1 = ground_state(rabi_hamiltonian(p, 0.0, spec));
  const StateVector sq = squeeze_operator(squeeze_amplitude(p.omega, p.xi), 0.0, d).apply(fock_state(d, 0));
  const StateVector ref1 = product_vector(spec, {minus, sq});
  CHECK(std::norm(ref1.dot(gs1.state.vector())) >= 1.0 - 1e-8);

  const auto gs2 = ground_state(rabi_hamiltonian(probe(5e3, 0.0, 4e3, 0.0, 1.0, 1.0), 0.0, spec));
  CHECK(gs2.degenerate);
  CHECK(gs2.basis.size() == 2);
}

TEST_CASE("adiabatic evolution reaches the squeezed displaced manifold") {
  ProbeRun run;
  run.params = probe(5e3, 100e3, 4e3, 1e3, 3.5e-3, 16.0);
  run.mode_dims = {60};
  run.options.rtol = 1e-7;
  const Trajectory tr = run_probe(run);
  const double n = tr.final_value("n_a");
  CHECK(n == doctest::Approx(mean_phonons(run.params.omega, run.params.xi, run.params.g)).epsilon(0.05));
  CHECK(std::abs(tr.final_value("sigma_z")) < 1e-3);
}

TEST_CASE("thermal ensemble") {
  ProbeRun base;
  base.params = probe(5e3, 150e3, 4e3, 0.0, 3e-3, 16.0);
  base.pert = SingleModePerturbation{3, kTwoPi * 0.5};
  base.mode_dims = {24};
  base.options.rtol = 1e-7;
  const ThermalResult vac = thermal_ensemble_signal(base, 0.0, 5);
  CHECK(vac.components.size() == 1);
  CHECK(vac.captured_weight == 1.0);

  ProbeRun one = base;
  one.fock_a = 1;
  one.mode_dims = {25};
  const double s1 = run_probe(one).final_value("sigma_z");
  CHECK(s1 == doctest::Approx(-vac.signal).epsilon(0.1));

  CHECK(thermal_weight(0.5, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(thermal_weight(1.0, 2) == doctest::Approx(0.125));
  CHECK(code_of([&] { thermal_ensemble_signal(base, 1.0, 3); }) == ErrorCode::CutoffInsufficient);
}

TEST_CASE("adiabaticity diagnostic") {
  std::vector<double> grid;
  const double tau = 3.5e-3;
  for (int i = 0; i <= 24; ++i) grid.push_back(0.25 * i * tau);
  const auto spec = HilbertSpec::spin_boson({24});
  const auto report = [&](double g_hz, double xi_hz) {
    const auto p = probe(5e3, 150e3, g_hz, xi_hz, tau, 6.0);
    return adiabaticity(probe_hamiltonian(p, spec), grid);
  };

  const auto zero = report(0.0, 0.0);
  for (size_t i = 0; i < grid.size(); ++i) {
    if (zero.valid[i]) CHECK(zero.epsilon[i] < 1e-10);
  }

  // Past the gap minimum the tails cross, so growth is checked on the ramp up to
  // t = 3 tau and through the peak value.
  const auto check_growth = [&](const std::vector<AdiabaticityReport>& reps) {
    int compared = 0;
    for (size_t i = 0; i < grid.size() && grid[i] <= 3.0 * tau; ++i) {
      bool ok = true;
      for (const auto& r : reps) ok = ok && r.valid[i];
      if (!ok) continue;
      ++compared;
      for (size_t j = 1; j < reps.size(); ++j) CHECK(reps[j].epsilon[i] > reps[j - 1].epsilon[i]);
    }
    CHECK(compared > 5);
    for (size_t j = 1; j < reps.size(); ++j) {
      const auto peak = [](const AdiabaticityReport& r) { return *std::max_element(r.epsilon.begin(), r.epsilon.end()); };
      CHECK(peak(reps[j]) > peak(reps[j - 1]));
    }
  };
  check_growth({report(4e3, 0.0), report(4e3, 500.0), report(4e3, 1e3)});
  check_growth({report(2e3, 0.0), report(4e3, 0.0), report(6e3, 0.0)});

  for (double gp : report(4e3, 1e3).gap) CHECK(gp > 0.0);
  CHECK(code_of([&] { adiabaticity(probe_hamiltonian(probe(5e3, 1e5, 0, 0, tau, 1), spec), {1.0, 0.5}); }) ==
        ErrorCode::Domain);
}
