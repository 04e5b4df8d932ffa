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

// Time evolution: ground states, Schrodinger and dephasing-Lindblad
// propagation with an adaptive Dormand-Prince 5(4) stepper, thermal
// ensembles and the adiabaticity diagnostic.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "arsim/fockspace.hpp"
#include "arsim/hamiltonian.hpp"

namespace arsim {

enum class Integrator {
  // Exponential midpoint for pure states, Dormand-Prince for density matrices.
  Auto,
  DormandPrince,
  // Exponential midpoint rule with Chebyshev-expanded exponentials and
  // step-doubling error control. Unitary up to the expansion cutoff.
  MagnusChebyshev,
};

struct PropagationOptions {
  Integrator integrator = Integrator::Auto;
  double rtol = 1e-8;
  double atol = 1e-14;
  // Uniform reporting grid including both endpoints.
  int output_points = 101;
  // Dormand-Prince only: integrate in the frame rotating with the diagonal
  // of the static part.
  bool interaction_frame = false;
  // Keep every n-th reported state (0: only the final state).
  int store_every = 0;
  double norm_gate = 1e-8;
  bool monitor_leakage = true;
  long long max_steps = 200'000'000;
  std::vector<std::pair<std::string, Operator>> extra_observables;
};

struct Diagnostics {
  long long accepted_steps = 0;
  long long rejected_steps = 0;
  long long rhs_evaluations = 0;
  double max_norm_drift = 0.0;
  double max_leakage = 0.0;
  double max_hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  double rtol = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::map<std::string, std::vector<double>> observables;
  std::vector<double> state_times;
  std::vector<QuantumState> states;
  std::optional<QuantumState> final_state;
  Diagnostics diagnostics;

  const std::vector<double>& series(const std::string& name) const;
  double final_value(const std::string& name) const;
};

struct GroundState {
  QuantumState state;
  double energy = 0.0;
  double gap = 0.0;
  bool degenerate = false;
  // Orthonormal basis of the ground space when degenerate.
  std::vector<StateVector> basis;
};

// Dense diagonalization; degeneracy tolerance 1e-9 ||H||.
GroundState ground_state(const Operator& h);

Trajectory propagate(const TimeDependentHamiltonian& h, const QuantumState& psi0, double t0, double t1,
                     const PropagationOptions& opts = {});

// d rho/dt = -i[H, rho] + (Gamma/2)(sigma_z rho sigma_z - rho)
Trajectory propagate_lindblad(const TimeDependentHamiltonian& h, const QuantumState& rho0, double gamma, double t0,
                              double t1, const PropagationOptions& opts = {});

// One ramp of the probe from t = 0 to p.t_final.
struct ProbeRun {
  ProbeParams params;
  PerturbationSpec pert = NoPerturbation{};
  CouplingForm coupling = LinearCoupling{};
  std::vector<int> mode_dims;
  // Coherent amplitudes of modes b, c (mode a starts squeezed).
  std::vector<double> coherent;
  // Initial Fock level of mode a before squeezing.
  int fock_a = 0;
  double gamma = 0.0;
  PropagationOptions options;
};

// |-> (x) S(r)|n> (x) |beta_b> (x) ...
StateVector probe_initial_state(const ProbeRun& run);
HilbertSpec probe_spec(const ProbeRun& run);
Trajectory run_probe(const ProbeRun& run);

struct ThermalComponent {
  int n = 0;
  double weight = 0.0;
  double sigma_z = 0.0;
};

struct ThermalResult {
  double signal = 0.0;
  double captured_weight = 0.0;
  std::vector<ThermalComponent> components;
};

// p_n = nbar^n / (1 + nbar)^{n+1}
double thermal_weight(double nbar_th, int n);

// Sum of p_n <sigma_z(t_f)>_n over n <= n_cut, one run per Fock component.
// Throws CutoffInsufficient when the captured weight is below 1 - 1e-4.
// Component n starts at mode_dims[0] + n and is enlarged on leakage.
ThermalResult thermal_ensemble_signal(const ProbeRun& base, double nbar_th, int n_cut, int workers = 1);

struct AdiabaticityOptions {
  // Finite-difference step for the ground-state derivative.
  double delta = 0.0;  // 0: 1e-6 of the grid span
  double coupling_threshold = 1e-9;
};

struct AdiabaticityReport {
  std::vector<double> times;
  std::vector<double> epsilon;
  std::vector<double> gap;
  std::vector<bool> valid;
};

AdiabaticityReport adiabaticity(const TimeDependentHamiltonian& h, const std::vector<double>& t_grid,
                                const AdiabaticityOptions& opts = {});

}  // namespace arsim
