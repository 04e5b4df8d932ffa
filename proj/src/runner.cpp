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

#include "arsim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "arsim/analytic.hpp"
#include "arsim/error.hpp"
#include "arsim/evolution.hpp"
#include "arsim/metrology.hpp"

namespace arsim {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Row = std::vector<double>;
using Rows = std::vector<Row>;
using PointFn = std::function<Rows(const ScenarioConfig&, double)>;

struct Plan {
  std::vector<std::string> columns;  // excluding the leading sweep column
  std::string units;
  PointFn point;
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

// ---------------------------------------------------------------------------
// Resolution of a configuration into runs.

// g such that mean_phonons(omega, xi, g) = nbar_a.
void resolve_coupling_from_nbar_a(ScenarioConfig& c) {
  if (!c.physics.nbar_a) return;
  const double s = 2.0 * c.physics.xi_hz / c.physics.omega_hz;
  const double squeeze = 0.5 * (1.0 / std::sqrt(1.0 - s * s) - 1.0);
  const double rest = *c.physics.nbar_a - squeeze;
  if (rest < 0.0) throw Error(ErrorCode::Domain, "nbar_a is below the squeezing contribution");
  c.physics.g_hz = c.physics.omega_hz * (1.0 - s) * std::sqrt(rest);
}

double nbar_c_of(const ScenarioConfig& c) { return c.physics.nbar_c.value_or(c.physics.nbar_b); }

int coherent_dim(double nbar) { return static_cast<int>(std::ceil(nbar + 6.0 * std::sqrt(nbar))) + 4; }

PropagationOptions propagation_options(const ScenarioConfig& c) {
  PropagationOptions o;
  o.rtol = c.numerics.tol;
  o.output_points = c.numerics.output_points;
  return o;
}

ProbeRun make_run(const ScenarioConfig& c) {
  ProbeRun run;
  run.params = c.probe_params();
  run.pert = c.perturbation();
  run.coupling = c.coupling();
  run.gamma = c.gamma();
  run.options = propagation_options(c);
  const int modes = std::max(1, required_modes(run.pert));
  std::vector<int> dims(c.numerics.fock_dims.begin(),
                        c.numerics.fock_dims.begin() + std::min<size_t>(modes, c.numerics.fock_dims.size()));
  if (dims.empty()) {
    const double r = squeeze_amplitude(run.params.omega, run.params.xi);
    const double beta = displacement_amplitude(run.params.omega, run.params.xi, run.params.g);
    dims.push_back(default_mode_dim(beta, r));
  }
  const double nb[2] = {c.physics.nbar_b, nbar_c_of(c)};
  for (int m = static_cast<int>(dims.size()); m < modes; ++m) dims.push_back(coherent_dim(nb[m - 1]));
  for (int m = 1; m < modes; ++m) run.coherent.push_back(std::sqrt(nb[m - 1]));
  run.mode_dims = dims;
  return run;
}

double nbar_a_of(const ScenarioConfig& c) {
  return mean_phonons(kTwoPi * c.physics.omega_hz, kTwoPi * c.physics.xi_hz, kTwoPi * c.physics.g_hz);
}

UncertaintyKind occupation(const ScenarioConfig& c) {
  const double na = nbar_a_of(c);
  if (c.physics.perturbation == "single") return SingleModeOccupation{c.physics.k, na};
  if (c.physics.perturbation == "two_mode") return TwoModeOccupation{na, c.physics.nbar_b};
  if (c.physics.perturbation == "three_mode") return ThreeModeOccupation{na, c.physics.nbar_b, nbar_c_of(c)};
  throw Error(ErrorCode::UnsupportedSpec, "scenario needs a perturbation");
}

double final_sigma_z(const ProbeRun& run) { return run_probe(run).final_value("sigma_z"); }

// A run whose automatically chosen mode dimensions have been enlarged until
// the nominal evaluation stays below half the leakage limit, so the
// neighbouring amplitudes of the derivative pass as well.
struct CalibratedRun {
  ProbeRun run;
  double sigma_z = 0.0;
};

CalibratedRun calibrate(const ScenarioConfig& c, ProbeRun run) {
  constexpr int kMaxGrowth = 6;
  constexpr double kHeadroom = 0.5 * kLeakageLimit;
  const size_t fixed = std::min(c.numerics.fock_dims.size(), run.mode_dims.size());
  const bool growable = fixed < run.mode_dims.size();
  const auto grow = [&] {
    for (size_t m = fixed; m < run.mode_dims.size(); ++m) {
      run.mode_dims[m] = static_cast<int>(std::ceil(1.3 * run.mode_dims[m])) + 2;
    }
  };
  for (int attempt = 0;; ++attempt) {
    try {
      const Trajectory tr = run_probe(run);
      if (!growable || attempt >= kMaxGrowth || tr.diagnostics.max_leakage <= kHeadroom) {
        return {run, tr.final_value("sigma_z")};
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Leakage || attempt >= kMaxGrowth || !growable) throw;
    }
    grow();
  }
}

std::function<double(double)> signal_of_amplitude(const ProbeRun& base) {
  return [base](double f) {
    ProbeRun run = base;
    run.pert = with_amplitude(base.pert, f);
    return final_sigma_z(run);
  };
}

// Reuses the calibration run for the nominal amplitude.
std::function<double(double)> signal_of_amplitude(const CalibratedRun& cal) {
  const double f0 = amplitude(cal.run.pert);
  auto other = signal_of_amplitude(cal.run);
  return [f0, s0 = cal.sigma_z, other](double f) { return f == f0 ? s0 : other(f); };
}

ErrorPropagationResult numeric_uncertainty(const ScenarioConfig& c, const std::function<double(double)>& fn) {
  const double f0 = kTwoPi * c.physics.f_hz;
  ErrorPropagationOptions o;
  o.noise_floor = c.numerics.tol;
  return error_propagation(fn, f0, c.numerics.fd_step_rel * std::abs(f0), o);
}

int thermal_cutoff(const ScenarioConfig& c) {
  if (c.numerics.n_cut >= 0) return c.numerics.n_cut;
  double captured = 0.0;
  for (int n = 0;; ++n) {
    captured += thermal_weight(c.physics.nbar_th, n);
    if (captured >= 1.0 - 1e-5) return n;
  }
}

std::function<double(double)> thermal_signal_of_amplitude(const ScenarioConfig& c, const ProbeRun& base) {
  const double nth = c.physics.nbar_th;
  const int n_cut = thermal_cutoff(c);
  return [base, nth, n_cut](double f) {
    ProbeRun run = base;
    run.pert = with_amplitude(base.pert, f);
    return thermal_ensemble_signal(run, nth, n_cut).signal;
  };
}

// Closed-form signal tanh(pi alpha tau) with alpha = 2 f S.
double closed_signal(const ScenarioConfig& c) {
  return signal(2.0 * kTwoPi * c.physics.f_hz * sensitivity_factor(occupation(c)), c.physics.tau_s);
}

double closed_uncertainty(const ScenarioConfig& c) {
  return uncertainty_closed(occupation(c), kTwoPi * c.physics.f_hz, c.physics.tau_s);
}

// Error propagation of the closed-form thermal signal tanh(u)/(1 + 2 nbar_th).
double closed_thermal_uncertainty(const ScenarioConfig& c) {
  const double tau = c.physics.tau_s;
  const double slope = 2.0 * sensitivity_factor(occupation(c));
  const double u = std::numbers::pi * slope * kTwoPi * c.physics.f_hz * tau;
  const double d = 1.0 + 2.0 * c.physics.nbar_th;
  const double s = std::tanh(u) / d;
  const double ch = std::cosh(u);
  return std::sqrt(1.0 - s * s) * d * ch * ch / (std::numbers::pi * tau * slope);
}

// ---------------------------------------------------------------------------
// Scenario point functions.

double spectrum_time(const ScenarioConfig& c, double value) {
  if (c.sweep.parameter == "t_over_tau") return value * c.physics.tau_s;
  return c.numerics.t_final_over_tau * c.physics.tau_s;
}

Eigen::VectorXd energies_at(const ScenarioConfig& c, double t) {
  const ProbeRun run = make_run(c);
  const HilbertSpec spec = probe_spec(run);
  Operator h = rabi_hamiltonian(run.params, t, spec, run.coupling);
  if (std::holds_alternative<NoPerturbation>(run.pert) == false) h += perturbation_hamiltonian(run.pert, spec);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Eigensolver, "spectrum");
  return es.eigenvalues() / kTwoPi;
}

Rows spectrum_point(const ScenarioConfig& c, double value) {
  const double t = spectrum_time(c, value);
  const Eigen::VectorXd e = energies_at(c, t);
  return {{t, e[0], e[1], e[2], e[3]}};
}

Rows gap_point(const ScenarioConfig& c, double) {
  const double t = c.numerics.t_final_over_tau * c.physics.tau_s;
  const Eigen::VectorXd e = energies_at(c, t);
  const double omega = kTwoPi * c.physics.omega_hz, xi = kTwoPi * c.physics.xi_hz;
  const double beta = displacement_amplitude(omega, xi, kTwoPi * c.physics.g_hz);
  const double rabi_t = rabi_schedule(kTwoPi * c.physics.rabi0_hz, c.physics.tau_s, t);
  return {{effective_frequency(omega, xi) / kTwoPi, 0.5 * (e[2] + e[3] - e[0] - e[1]), e[1] - e[0],
           gap(0, rabi_t, beta) / kTwoPi}};
}

Rows adiabaticity_point(const ScenarioConfig& c, double) {
  const ProbeRun run = make_run(c);
  const HilbertSpec spec = probe_spec(run);
  const TimeDependentHamiltonian h = probe_hamiltonian(run.params, spec, run.coupling, run.pert);
  const auto grid = linspace(0.0, run.params.t_final, c.numerics.time_points);
  const AdiabaticityReport rep = adiabaticity(h, grid);
  Rows rows;
  for (size_t i = 0; i < rep.times.size(); ++i) {
    rows.push_back({rep.times[i], rep.valid[i] ? rep.epsilon[i] : kNaN, rep.gap[i] / kTwoPi});
  }
  return rows;
}

Rows estimate_point(const ScenarioConfig& c, double) {
  const auto res = numeric_uncertainty(c, signal_of_amplitude(calibrate(c, make_run(c))));
  return {{nbar_a_of(c), res.signal, closed_signal(c), res.delta, closed_uncertainty(c)}};
}

Rows precision_point(const ScenarioConfig& c, double) {
  const CalibratedRun cal = calibrate(c, make_run(c));
  const ProbeRun& run = cal.run;
  const auto res = numeric_uncertainty(c, signal_of_amplitude(cal));
  const double f = kTwoPi * c.physics.f_hz;
  const double alpha =
      alpha_single_mode(c.physics.k, f, displacement_amplitude(run.params.omega, run.params.xi, run.params.g),
                        squeeze_amplitude(run.params.omega, run.params.xi));
  const double tau = c.physics.tau_s;
  const double via_alpha = std::cosh(std::numbers::pi * alpha * tau) / (std::numbers::pi * tau * std::abs(alpha / f));
  return {{nbar_a_of(c), res.signal, closed_signal(c), res.delta, closed_uncertainty(c), via_alpha}};
}

Rows multimode_point(const ScenarioConfig& c, double) {
  const auto res = numeric_uncertainty(c, signal_of_amplitude(calibrate(c, make_run(c))));
  return {{nbar_a_of(c), c.physics.nbar_b, nbar_c_of(c), res.signal, closed_signal(c), res.delta,
           closed_uncertainty(c)}};
}

Rows thermal_signal_point(const ScenarioConfig& c, double) {
  const double f = kTwoPi * c.physics.f_hz;
  const CalibratedRun pure = calibrate(c, make_run(c));
  const double thermal = thermal_signal_of_amplitude(c, pure.run)(f);
  const double closed =
      thermal_signal(2.0 * f * sensitivity_factor(occupation(c)), c.physics.tau_s, c.physics.nbar_th);
  return {{thermal, closed, pure.sigma_z, thermal / pure.sigma_z, 1.0 / (1.0 + 2.0 * c.physics.nbar_th)}};
}

Rows thermal_precision_point(const ScenarioConfig& c, double) {
  const CalibratedRun cal = calibrate(c, make_run(c));
  const auto thermal = numeric_uncertainty(c, thermal_signal_of_amplitude(c, cal.run));
  const auto pure = numeric_uncertainty(c, signal_of_amplitude(cal));
  return {{nbar_a_of(c), thermal.delta, closed_thermal_uncertainty(c), pure.delta, thermal.delta / pure.delta}};
}

// Numerical uncertainty for the configured run and for a variant of it,
// both on the dimensions calibrated for the configured run.
template <class Modify>
std::pair<double, double> paired_uncertainties(const ScenarioConfig& c, Modify&& modify) {
  const CalibratedRun primary = calibrate(c, make_run(c));
  ProbeRun variant = primary.run;
  modify(variant);
  const CalibratedRun secondary = calibrate(c, variant);
  return {numeric_uncertainty(c, signal_of_amplitude(primary)).delta,
          numeric_uncertainty(c, signal_of_amplitude(secondary)).delta};
}

Rows dephasing_point(const ScenarioConfig& c, double) {
  const auto [with, without] = paired_uncertainties(c, [](ProbeRun& r) { r.gamma = 0.0; });
  return {{nbar_a_of(c), with, without, with / without, closed_uncertainty(c)}};
}

Rows lamb_dicke_point(const ScenarioConfig& c, double) {
  const auto [ld, linear] = paired_uncertainties(c, [](ProbeRun& r) { r.coupling = LinearCoupling{}; });
  return {{nbar_a_of(c), ld, linear, ld / linear, closed_uncertainty(c)}};
}

const std::string kEnergyUnits = "times in s, energies and gaps in Hz (E / 2 pi)";
const std::string kPrecisionUnits = "uncertainties of the angular amplitude f in rad/s";

Plan plan_for(const std::string& name) {
  if (name == "spectrum" || name == "fig2a") {
    return {{"t_s", "E0_hz", "E1_hz", "E2_hz", "E3_hz"}, kEnergyUnits, spectrum_point};
  }
  if (name == "fig2b") {
    return {{"omega_eff_hz", "gap_numeric_hz", "doublet_splitting_hz", "doublet_splitting_closed_hz"},
            kEnergyUnits, gap_point};
  }
  if (name == "fig2c" || name == "fig2d") {
    return {{"t_s", "epsilon", "gap_hz"}, kEnergyUnits, adiabaticity_point};
  }
  if (name.rfind("fig3", 0) == 0) {
    return {{"nbar", "signal_numeric", "signal_closed", "delta_f_numeric", "delta_f_closed", "delta_f_alpha"},
            kPrecisionUnits, precision_point};
  }
  if (name == "fig4a" || name == "fig4b") {
    return {{"nbar_a", "nbar_b", "nbar_c", "signal_numeric", "signal_closed", "delta_f_numeric", "delta_f_closed"},
            kPrecisionUnits, multimode_point};
  }
  if (name == "fig5a") {
    return {{"signal_numeric", "signal_closed", "signal_pure_numeric", "ratio_numeric",
             "ratio_closed"},
            "dimensionless spin expectations", thermal_signal_point};
  }
  if (name == "fig5b") {
    return {{"nbar", "delta_f_numeric", "delta_f_closed", "delta_f_pure_numeric", "ratio_numeric"},
            kPrecisionUnits, thermal_precision_point};
  }
  if (name == "fig5c") {
    return {{"nbar", "delta_f_gamma", "delta_f_zero", "ratio_numeric", "delta_f_closed"}, kPrecisionUnits,
            dephasing_point};
  }
  if (name == "fig5d") {
    return {{"nbar", "delta_f_eta", "delta_f_linear", "ratio_numeric", "delta_f_closed"}, kPrecisionUnits,
            lamb_dicke_point};
  }
  if (name == "estimate") {
    return {{"nbar", "signal_numeric", "signal_closed", "delta_f_numeric", "delta_f_closed"}, kPrecisionUnits,
            estimate_point};
  }
  throw Error(ErrorCode::Config, "unknown scenario '" + name + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct PointOutcome {
  Rows rows;
  std::string failure;
};

PointOutcome run_point(const Plan& plan, const ScenarioConfig& cfg, double value) {
  PointOutcome out;
  try {
    ScenarioConfig c = cfg.at(value);
    resolve_coupling_from_nbar_a(c);
    out.rows = plan.point(c, value);
    for (const Row& r : out.rows) {
      if (r.size() != plan.columns.size()) throw Error(ErrorCode::Config, "internal column count mismatch");
    }
  } catch (const std::exception& e) {
    out.rows = {Row(plan.columns.size(), kNaN)};
    out.failure = e.what();
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<ScenarioInfo>& scenarios() {
  static const std::vector<ScenarioInfo> list = {
      {"spectrum", "lowest four eigenenergies of H(t) along the ramp"},
      {"fig2a", "lowest four eigenenergies versus time at xi/2pi = 1 kHz"},
      {"fig2b", "endpoint gap to the first excited doublet versus xi, with omega_eff"},
      {"fig2c", "adiabatic parameter epsilon(t) for several xi"},
      {"fig2d", "adiabatic parameter epsilon(t) for several g at xi = 0"},
      {"fig3a", "delta f3 versus nbar(xi), tau = 3.5 ms"},
      {"fig3b", "delta f3 versus nbar(g), xi = 0, tau = 3.0 ms"},
      {"fig3c", "delta f5 versus nbar(xi), tau = 3.5 ms"},
      {"fig3d", "delta f5 versus nbar(g), xi = 0, tau = 3.0 ms"},
      {"fig4a", "delta f_ab versus nbar_b at fixed nbar_a"},
      {"fig4b", "delta f_abc versus nbar_b = nbar_c at fixed nbar_a"},
      {"fig5a", "thermal signal versus nbar_th"},
      {"fig5b", "thermal delta f versus g"},
      {"fig5c", "delta f with spin dephasing versus g"},
      {"fig5d", "delta f beyond the Lamb-Dicke regime versus g"},
      {"estimate", "single-point signal and delta f for the configured perturbation"},
  };
  return list;
}

bool is_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (s.name == name) return true;
  return false;
}

json scenario_defaults(const std::string& name) {
  if (!is_scenario(name)) throw Error(ErrorCode::Config, "unknown scenario '" + name + "'");
  json d = ScenarioConfig{}.to_json();
  d["scenario"] = name;
  json& p = d["physics"];
  auto set_sweep = [&](const std::string& param, const std::vector<double>& grid) {
    d["sweep"] = {{"parameter", param}, {"grid", grid}};
  };
  const auto fig2_probe = [&] {
    p["omega_hz"] = 5000.0;
    p["rabi0_hz"] = 100000.0;
    p["g_hz"] = 4000.0;
    p["xi_hz"] = 1000.0;
    p["tau_s"] = 3.5e-3;
  };
  if (name == "spectrum" || name == "fig2a") {
    fig2_probe();
    p["perturbation"]["kind"] = "none";
    set_sweep("t_over_tau", linspace(0.0, 8.0, 33));
  } else if (name == "fig2b") {
    fig2_probe();
    p["perturbation"]["kind"] = "none";
    set_sweep("xi_hz", linspace(0.0, 2000.0, 9));
  } else if (name == "fig2c") {
    fig2_probe();
    p["rabi0_hz"] = 150000.0;
    set_sweep("xi_hz", {0.0, 1000.0, 2000.0});
  } else if (name == "fig2d") {
    fig2_probe();
    p["rabi0_hz"] = 150000.0;
    p["xi_hz"] = 0.0;
    set_sweep("g_hz", {2000.0, 4000.0, 6000.0});
  } else if (name == "fig3a" || name == "fig3c") {
    fig2_probe();
    p["perturbation"]["k"] = name == "fig3a" ? 3 : 5;
    set_sweep("xi_hz", linspace(0.0, 1750.0, 8));
  } else if (name == "fig3b" || name == "fig3d") {
    p["perturbation"]["k"] = name == "fig3b" ? 3 : 5;
    set_sweep("g_hz", linspace(3000.0, 8250.0, 8));
  } else if (name == "fig4a" || name == "fig4b") {
    p["rabi0_hz"] = 100000.0;
    p["tau_s"] = 3.5e-3;
    p["perturbation"]["kind"] = name == "fig4a" ? "two_mode" : "three_mode";
    set_sweep("nbar_b", {1.0, 1.5, 2.0, 3.0});
  } else if (name == "fig5a") {
    p["perturbation"]["f_hz"] = 5.0;
    set_sweep("nbar_th", {0.0, 0.25, 0.5, 1.0, 1.5, 2.0});
  } else if (name == "fig5b") {
    p["perturbation"]["f_hz"] = 5.0;
    p["nbar_th"] = 0.5;
    set_sweep("g_hz", {3000.0, 4000.0, 5000.0, 6000.0});
  } else if (name == "fig5c") {
    p["perturbation"]["f_hz"] = 1.0;
    p["gamma_hz"] = 1.0;
    set_sweep("g_hz", {3000.0, 4000.0, 5000.0, 6000.0});
  } else if (name == "fig5d") {
    p["perturbation"]["f_hz"] = 1.0;
    p["coupling"] = {{"kind", "beyond_lamb_dicke"}, {"eta", 0.2}};
    set_sweep("g_hz", {3000.0, 4000.0, 5000.0, 6000.0, 7000.0});
  } else {
    d["sweep"] = {{"parameter", ""}, {"grid", json::array()}};
  }
  return d;
}

size_t ResultTable::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw Error(ErrorCode::Config, "no column '" + name + "'");
}

std::vector<double> ResultTable::column_values(const std::string& name) const {
  const size_t j = column(name);
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r[j]);
  return v;
}

void ResultTable::write_csv(std::ostream& os) const {
  os << "# arsim " << tool_version << "\n";
  os << "# scenario: " << scenario << "\n";
  os << "# config_hash: " << config_hash << "\n";
  if (!units.empty()) os << "# units: " << units << "\n";
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
    os << "\n";
  }
  for (const auto& f : failures) os << "# failed: " << f << "\n";
}

std::string ResultTable::csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

ResultTable sweep(const ScenarioConfig& cfg, int worker_budget) {
  cfg.validate();
  const Plan plan = plan_for(cfg.scenario);
  const auto start = std::chrono::steady_clock::now();
  const bool has_grid = !cfg.sweep.parameter.empty();
  const std::vector<double> grid = has_grid ? cfg.sweep.grid : std::vector<double>{0.0};
  if (grid.empty()) throw Error(ErrorCode::Config, "sweep grid is empty");

  std::vector<PointOutcome> outcomes(grid.size());
  const int workers = std::clamp(worker_budget, 1, static_cast<int>(grid.size()));
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < grid.size(); i = next++) outcomes[i] = run_point(plan, cfg, grid[i]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ResultTable table;
  table.scenario = cfg.scenario;
  table.config_hash = cfg.hash();
  table.units = plan.units;
  const std::string lead_name = has_grid ? cfg.sweep.parameter : "point";
  // A sweep parameter that is already a data column is not repeated.
  const bool lead = std::find(plan.columns.begin(), plan.columns.end(), lead_name) == plan.columns.end();
  if (lead) table.columns.push_back(lead_name);
  table.columns.insert(table.columns.end(), plan.columns.begin(), plan.columns.end());
  for (size_t i = 0; i < grid.size(); ++i) {
    for (const Row& r : outcomes[i].rows) {
      Row row;
      if (lead) row.push_back(grid[i]);
      row.insert(row.end(), r.begin(), r.end());
      table.rows.push_back(std::move(row));
    }
    if (!outcomes[i].failure.empty()) {
      table.failures.push_back(lead_name + "=" + format_number(grid[i]) + ": " + outcomes[i].failure);
    }
  }
  table.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return table;
}

ResultTable run_scenario(const ScenarioConfig& cfg) { return sweep(cfg, cfg.numerics.threads); }

void write_outputs(const ResultTable& table, const ScenarioConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / (table.scenario + ".csv");
  {
    std::ofstream os(csv_path, std::ios::binary);
    if (!os) throw Error(ErrorCode::Config, "cannot write " + csv_path.string());
    table.write_csv(os);
  }
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  json manifest = {{"tool_version", table.tool_version},
                   {"scenario", table.scenario},
                   {"config_hash", table.config_hash},
                   {"created_utc", stamp},
                   {"wall_time_s", table.wall_time_s},
                   {"threads", cfg.numerics.threads},
                   {"csv", csv_path.filename().string()},
                   {"rows", table.rows.size()},
                   {"failures", table.failures},
                   {"config", cfg.to_json()}};
  std::ofstream os(dir / "run_manifest.json");
  if (!os) throw Error(ErrorCode::Config, "cannot write run manifest");
  os << manifest.dump(2) << "\n";
}

}  // namespace arsim
