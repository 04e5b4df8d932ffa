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

#include "arsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>

#include "arsim/error.hpp"
#include "arsim/runner.hpp"

namespace arsim {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::Config, what); }

void reject_unknown(const json& j, const std::string& section, std::initializer_list<const char*> keys) {
  if (!j.is_object()) config_error(section + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) config_error("unknown key " + section + "." + key);
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(section + "." + key + ": " + e.what());
  }
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& out, const std::string& section) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v, section);
  out = v;
}

void require_finite_nonneg(double v, const std::string& name) {
  if (!std::isfinite(v) || v < 0.0) config_error(name + " must be finite and nonnegative");
}

}  // namespace

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {"omega_hz", "rabi0_hz", "g_hz",    "xi_hz",  "tau_s",
                                                 "f_hz",     "eta",      "gamma_hz", "nbar_th", "nbar_a",
                                                 "nbar_b",   "nbar_c",   "t_over_tau"};
  return names;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  reject_unknown(j, "config", {"scenario", "physics", "sweep", "numerics", "output"});
  ScenarioConfig c;
  read(j, "scenario", c.scenario, "config");
  if (j.contains("physics")) {
    const json& p = j.at("physics");
    reject_unknown(p, "physics",
                   {"omega_hz", "rabi0_hz", "g_hz", "xi_hz", "theta", "tau_s", "perturbation", "coupling", "gamma_hz",
                    "nbar_th", "nbar_a", "nbar_b", "nbar_c"});
    auto& ph = c.physics;
    read(p, "omega_hz", ph.omega_hz, "physics");
    read(p, "rabi0_hz", ph.rabi0_hz, "physics");
    read(p, "g_hz", ph.g_hz, "physics");
    read(p, "xi_hz", ph.xi_hz, "physics");
    read(p, "theta", ph.theta, "physics");
    read(p, "tau_s", ph.tau_s, "physics");
    read(p, "gamma_hz", ph.gamma_hz, "physics");
    read(p, "nbar_th", ph.nbar_th, "physics");
    read(p, "nbar_a", ph.nbar_a, "physics");
    read(p, "nbar_b", ph.nbar_b, "physics");
    read(p, "nbar_c", ph.nbar_c, "physics");
    if (p.contains("perturbation")) {
      const json& q = p.at("perturbation");
      reject_unknown(q, "physics.perturbation", {"kind", "k", "f_hz"});
      read(q, "kind", ph.perturbation, "physics.perturbation");
      read(q, "k", ph.k, "physics.perturbation");
      read(q, "f_hz", ph.f_hz, "physics.perturbation");
    }
    if (p.contains("coupling")) {
      const json& q = p.at("coupling");
      reject_unknown(q, "physics.coupling", {"kind", "eta"});
      read(q, "kind", ph.coupling, "physics.coupling");
      read(q, "eta", ph.eta, "physics.coupling");
    }
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, "sweep", {"parameter", "grid"});
    read(s, "parameter", c.sweep.parameter, "sweep");
    read(s, "grid", c.sweep.grid, "sweep");
  }
  if (j.contains("numerics")) {
    const json& n = j.at("numerics");
    reject_unknown(n, "numerics",
                   {"fock_dims", "tol", "t_final_over_tau", "threads", "fd_step_rel", "output_points", "n_cut",
                    "time_points"});
    auto& nu = c.numerics;
    read(n, "fock_dims", nu.fock_dims, "numerics");
    read(n, "tol", nu.tol, "numerics");
    read(n, "t_final_over_tau", nu.t_final_over_tau, "numerics");
    read(n, "threads", nu.threads, "numerics");
    read(n, "fd_step_rel", nu.fd_step_rel, "numerics");
    read(n, "output_points", nu.output_points, "numerics");
    read(n, "n_cut", nu.n_cut, "numerics");
    read(n, "time_points", nu.time_points, "numerics");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    reject_unknown(o, "output", {"dir"});
    read(o, "dir", c.output.dir, "output");
  }
  return c;
}

json ScenarioConfig::to_json() const {
  const auto& ph = physics;
  json p = {{"omega_hz", ph.omega_hz},
            {"rabi0_hz", ph.rabi0_hz},
            {"g_hz", ph.g_hz},
            {"xi_hz", ph.xi_hz},
            {"theta", ph.theta},
            {"tau_s", ph.tau_s},
            {"perturbation", {{"kind", ph.perturbation}, {"k", ph.k}, {"f_hz", ph.f_hz}}},
            {"coupling", {{"kind", ph.coupling}, {"eta", ph.eta}}},
            {"gamma_hz", ph.gamma_hz},
            {"nbar_th", ph.nbar_th},
            {"nbar_b", ph.nbar_b}};
  p["nbar_a"] = ph.nbar_a ? json(*ph.nbar_a) : json(nullptr);
  p["nbar_c"] = ph.nbar_c ? json(*ph.nbar_c) : json(nullptr);
  return {{"scenario", scenario},
          {"physics", p},
          {"sweep", {{"parameter", sweep.parameter}, {"grid", sweep.grid}}},
          {"numerics",
           {{"fock_dims", numerics.fock_dims},
            {"tol", numerics.tol},
            {"t_final_over_tau", numerics.t_final_over_tau},
            {"threads", numerics.threads},
            {"fd_step_rel", numerics.fd_step_rel},
            {"output_points", numerics.output_points},
            {"n_cut", numerics.n_cut},
            {"time_points", numerics.time_points}}},
          {"output", {{"dir", output.dir}}}};
}

void ScenarioConfig::validate() const {
  if (!is_scenario(scenario)) config_error("unknown scenario '" + scenario + "'");
  if ((scenario == "fig4a" || scenario == "fig4b") && !physics.nbar_a) {
    config_error(scenario + " needs physics.nbar_a");
  }
  const auto& ph = physics;
  for (const auto& [v, name] : std::initializer_list<std::pair<double, const char*>>{
           {ph.omega_hz, "omega_hz"}, {ph.rabi0_hz, "rabi0_hz"}, {ph.g_hz, "g_hz"}, {ph.xi_hz, "xi_hz"},
           {ph.tau_s, "tau_s"}, {ph.gamma_hz, "gamma_hz"}, {ph.nbar_th, "nbar_th"}, {ph.nbar_b, "nbar_b"},
           {ph.eta, "eta"}}) {
    require_finite_nonneg(v, std::string("physics.") + name);
  }
  if (!std::isfinite(ph.f_hz)) config_error("physics.perturbation.f_hz must be finite");
  if (ph.nbar_a) require_finite_nonneg(*ph.nbar_a, "physics.nbar_a");
  if (ph.nbar_c) require_finite_nonneg(*ph.nbar_c, "physics.nbar_c");
  if (!(ph.omega_hz > 0.0)) config_error("physics.omega_hz must be positive");
  if (!(ph.tau_s > 0.0)) config_error("physics.tau_s must be positive");
  if (!(2.0 * ph.xi_hz < ph.omega_hz)) config_error("physics.xi_hz must satisfy 2 xi < omega");
  const std::set<std::string> kinds = {"none", "single", "two_mode", "three_mode"};
  if (!kinds.count(ph.perturbation)) config_error("unknown perturbation kind '" + ph.perturbation + "'");
  if (ph.perturbation == "single" && ph.k < 1) config_error("physics.perturbation.k must be >= 1");
  if (ph.coupling != "linear" && ph.coupling != "beyond_lamb_dicke") {
    config_error("unknown coupling kind '" + ph.coupling + "'");
  }
  if (ph.eta >= 1.0) config_error("physics.coupling.eta must be < 1");
  if (!sweep.parameter.empty() || !sweep.grid.empty()) {
    const auto& names = sweep_parameters();
    if (std::find(names.begin(), names.end(), sweep.parameter) == names.end()) {
      config_error("cannot sweep '" + sweep.parameter + "'");
    }
    if (sweep.grid.empty()) config_error("sweep grid is empty");
    for (double v : sweep.grid)
      if (!std::isfinite(v)) config_error("sweep grid values must be finite");
    bool up = true, down = true;
    for (size_t i = 1; i < sweep.grid.size(); ++i) {
      up = up && sweep.grid[i] > sweep.grid[i - 1];
      down = down && sweep.grid[i] < sweep.grid[i - 1];
    }
    if (!up && !down) config_error("sweep grid must be strictly monotone");
  }
  const auto& nu = numerics;
  for (int d : nu.fock_dims)
    if (d < 2) config_error("numerics.fock_dims entries must be >= 2");
  if (!(nu.tol > 0.0) || nu.tol >= 1.0) config_error("numerics.tol must lie in (0, 1)");
  if (!(nu.t_final_over_tau > 0.0)) config_error("numerics.t_final_over_tau must be positive");
  if (nu.threads < 1) config_error("numerics.threads must be >= 1");
  if (!(nu.fd_step_rel > 0.0)) config_error("numerics.fd_step_rel must be positive");
  if (nu.output_points < 2) config_error("numerics.output_points must be >= 2");
  if (nu.time_points < 1) config_error("numerics.time_points must be >= 1");
  if (output.dir.empty()) config_error("output.dir must not be empty");
}

void ScenarioConfig::set_parameter(const std::string& name, double value) {
  auto& ph = physics;
  if (name == "omega_hz") ph.omega_hz = value;
  else if (name == "rabi0_hz") ph.rabi0_hz = value;
  else if (name == "g_hz") ph.g_hz = value;
  else if (name == "xi_hz") ph.xi_hz = value;
  else if (name == "tau_s") ph.tau_s = value;
  else if (name == "f_hz") ph.f_hz = value;
  else if (name == "eta") ph.eta = value;
  else if (name == "gamma_hz") ph.gamma_hz = value;
  else if (name == "nbar_th") ph.nbar_th = value;
  else if (name == "nbar_a") ph.nbar_a = value;
  else if (name == "nbar_b") ph.nbar_b = value;
  else if (name == "nbar_c") ph.nbar_c = value;
  else if (name == "t_over_tau") return;  // consumed by the spectrum scenarios
  else config_error("cannot set parameter '" + name + "'");
}

ScenarioConfig ScenarioConfig::at(double value) const {
  ScenarioConfig c = *this;
  if (!sweep.parameter.empty()) c.set_parameter(sweep.parameter, value);
  return c;
}

ProbeParams ScenarioConfig::probe_params() const {
  ProbeParams p;
  p.omega = kTwoPi * physics.omega_hz;
  p.rabi0 = kTwoPi * physics.rabi0_hz;
  p.g = kTwoPi * physics.g_hz;
  p.xi = kTwoPi * physics.xi_hz;
  p.theta = physics.theta;
  p.tau = physics.tau_s;
  p.t_final = numerics.t_final_over_tau * physics.tau_s;
  return p;
}

PerturbationSpec ScenarioConfig::perturbation() const {
  const double f = kTwoPi * physics.f_hz;
  if (physics.perturbation == "single") return SingleModePerturbation{physics.k, f};
  if (physics.perturbation == "two_mode") return TwoModePerturbation{f};
  if (physics.perturbation == "three_mode") return ThreeModePerturbation{f};
  return NoPerturbation{};
}

CouplingForm ScenarioConfig::coupling() const {
  if (physics.coupling == "beyond_lamb_dicke") return BeyondLambDicke{physics.eta};
  return LinearCoupling{};
}

double ScenarioConfig::gamma() const { return kTwoPi * physics.gamma_hz; }

std::string ScenarioConfig::hash() const {
  json j = to_json();
  j["numerics"].erase("threads");
  j["output"].erase("dir");
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json merged_config(const json& user) {
  if (!user.is_object()) config_error("configuration must be a JSON object");
  if (!user.contains("scenario") || !user.at("scenario").is_string()) config_error("config needs a scenario name");
  json merged = scenario_defaults(user.at("scenario").get<std::string>());
  merged.merge_patch(user);
  return merged;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_error("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) config_error("override '" + assignment + "' has an empty key");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace arsim
