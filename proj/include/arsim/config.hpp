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

// Declarative scenario configuration (JSON). Physical inputs are written
// in ordinary frequency units (Hz) and turned into angular frequencies
// when the physics parameters are resolved.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "arsim/hamiltonian.hpp"

namespace arsim {

struct PhysicsConfig {
  double omega_hz = 5000.0;
  double rabi0_hz = 150000.0;
  double g_hz = 4000.0;
  double xi_hz = 0.0;
  double theta = std::numbers::pi;
  double tau_s = 3.0e-3;
  std::string perturbation = "single";  // none | single | two_mode | three_mode
  int k = 3;
  double f_hz = 0.5;
  std::string coupling = "linear";  // linear | beyond_lamb_dicke
  double eta = 0.0;
  double gamma_hz = 0.0;
  double nbar_th = 0.0;
  std::optional<double> nbar_a;
  double nbar_b = 0.0;
  std::optional<double> nbar_c;  // defaults to nbar_b
};

struct SweepConfig {
  std::string parameter;
  std::vector<double> grid;
};

struct NumericsConfig {
  std::vector<int> fock_dims;  // empty: automatic
  double tol = 1e-7;
  double t_final_over_tau = 16.0;
  int threads = 1;
  // Finite-difference step relative to the perturbation amplitude.
  double fd_step_rel = 0.1;
  int output_points = 2;
  // Thermal Fock components; negative: smallest cutoff holding 1 - 1e-5.
  int n_cut = -1;
  // Points of the time grid for the epsilon(t) scenarios.
  int time_points = 41;
};

struct OutputConfig {
  std::string dir = "arsim_out";
};

struct ScenarioConfig {
  std::string scenario;
  PhysicsConfig physics;
  SweepConfig sweep;
  NumericsConfig numerics;
  OutputConfig output;

  // Strict parse: unknown keys and wrong types raise Config errors.
  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;

  // Copy with the sweep parameter set to value.
  ScenarioConfig at(double value) const;
  void set_parameter(const std::string& name, double value);

  ProbeParams probe_params() const;
  PerturbationSpec perturbation() const;
  CouplingForm coupling() const;
  double gamma() const;

  // FNV-1a over the canonical JSON without threads and output directory.
  std::string hash() const;
};

// Defaults for a scenario name merged with the user document; user keys win.
nlohmann::json merged_config(const nlohmann::json& user);
nlohmann::json scenario_defaults(const std::string& name);

// Apply "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::json& j, const std::string& assignment);

// Sweepable parameter names.
const std::vector<std::string>& sweep_parameters();

}  // namespace arsim
