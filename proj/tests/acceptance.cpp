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

// Acceptance checks. Each invocation evaluates one criterion and prints a
// single "criterion N: PASS|FAIL" line (plus indented detail lines); the
// exit status is 0 on PASS and 1 on FAIL.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include "arsim/analytic.hpp"
#include "arsim/evolution.hpp"
#include "arsim/metrology.hpp"
#include "arsim/runner.hpp"

using namespace arsim;
using nlohmann::json;
using std::numbers::pi;

namespace {

constexpr double kTwoPi = 2.0 * pi;

class Report {
 public:
  explicit Report(int id) : id_(id), start_(std::chrono::steady_clock::now()) {}

  // Records a sub-check; the criterion passes only when all of them do.
  void check(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    lines_.push_back(std::string(ok ? "  ok   " : "  FAIL ") + what);
  }
  void info(const std::string& what) { lines_.push_back("  info " + what); }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  int finish() const {
    std::printf("criterion %d: %s (%.1f s)\n", id_, ok_ ? "PASS" : "FAIL", elapsed());
    for (const auto& l : lines_) std::printf("%s\n", l.c_str());
    return ok_ ? 0 : 1;
  }

 private:
  int id_;
  bool ok_ = true;
  std::vector<std::string> lines_;
  std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

ResultTable run_config(const json& user, int workers = 1) {
  return sweep(ScenarioConfig::from_json(merged_config(user)), workers);
}

void report_failures(Report& r, const ResultTable& t) {
  for (const auto& f : t.failures) r.info("point failed: " + f);
}

using TwoState = std::array<cplx, 2>;

// Direct Dormand-Prince integration of the two-state equations with the
// exponentially decaying coupling, from the exact amplitudes at t = 0.
std::vector<TwoState> integrate_two_state(double alpha, double tau, double x, const std::vector<double>& times) {
  namespace ode = boost::numeric::odeint;
  const cplx i(0.0, 1.0);
  auto rhs = [&](const TwoState& s, TwoState& ds, double t) {
    const double half_gap = (x / tau) * std::exp(-t / tau);
    ds[0] = -i * (-alpha * s[0] + half_gap * s[1]);
    ds[1] = -i * (alpha * s[1] + half_gap * s[0]);
  };
  const auto c0 = demkov_exact({alpha, tau, x, 0.0});
  TwoState s{c0.c_up, c0.c_down};
  std::vector<TwoState> out;
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<TwoState>());
  double t = 0.0;
  for (double t1 : times) {
    if (t1 > t) ode::integrate_adaptive(stepper, rhs, s, t, t1, 1e-4 * tau);
    t = t1;
    out.push_back(s);
  }
  return out;
}

double demkov_signal(double alpha, double tau, double x, double t) {
  const auto a = demkov_exact({alpha, tau, x, t});
  return std::norm(a.c_up) - std::norm(a.c_down);
}

// ---------------------------------------------------------------------------

int criterion1() {
  Report r(1);
  const double tau = 1.0;
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(0.1 * i * tau);
  double worst = 0.0;
  for (double y : {0.0, 0.05, 0.2}) {
    for (double x : {50.0, 500.0}) {
      const auto ode = integrate_two_state(y / tau, tau, x, times);
      double w = 0.0;
      for (size_t i = 0; i < times.size(); ++i) {
        const auto e = demkov_exact({y / tau, tau, x, times[i]});
        w = std::max({w, std::abs(e.c_up - ode[i][0]), std::abs(e.c_down - ode[i][1])});
      }
      r.info(fmt("alpha tau = %.2f, x = %.0f: max componentwise deviation %.2e", y, x, w));
      worst = std::max(worst, w);
    }
  }
  r.check(worst <= 1e-6, fmt("max |demkov_exact - ODE| = %.2e <= 1e-6 over t in [0, 10 tau]", worst));
  return r.finish();
}

int criterion2() {
  Report r(2);
  const double tau = 1.0, x = 500.0;
  double worst_gamma = 0.0, worst_exact = 0.0;
  for (double y : {0.05, 0.1, 0.2, 0.3}) {
    const auto a = demkov_asymptotic({y / tau, tau, x, 8.0 * tau});
    const double s_asym = std::norm(a.c_up) - std::norm(a.c_down);
    worst_gamma = std::max(worst_gamma, std::abs(s_asym - std::tanh(pi * y)));
    const double s_exact = demkov_signal(y / tau, tau, x, 8.0 * tau);
    const double dev = std::abs(s_exact - std::tanh(pi * y));
    worst_exact = std::max(worst_exact, dev);
    double t_ok = 8.0;
    while (t_ok < 40.0 && std::abs(demkov_signal(y / tau, tau, x, t_ok * tau) - std::tanh(pi * y)) > 1e-4) t_ok += 0.5;
    r.info(fmt("alpha tau = %.2f: exact signal at 8 tau %.6f vs tanh %.6f (|diff| %.2e); |diff| <= 1e-4 from t = %.1f tau",
               y, s_exact, std::tanh(pi * y), dev, t_ok));
  }
  r.check(worst_gamma <= 1e-10, fmt("asymptotic |c_up|^2 - |c_down|^2 vs tanh(pi alpha tau): %.2e <= 1e-10", worst_gamma));
  r.check(worst_exact <= 1e-4, fmt("demkov_exact signal at t = 8 tau, x = 500 vs tanh: %.2e <= 1e-4", worst_exact));
  return r.finish();
}

json fig3_point(double tf_over_tau) {
  return json{{"scenario", "estimate"},
              {"physics",
               {{"omega_hz", 5000.0},
                {"rabi0_hz", 150000.0},
                {"g_hz", 4000.0},
                {"xi_hz", 0.0},
                {"tau_s", 3.0e-3},
                {"perturbation", {{"kind", "single"}, {"k", 3}, {"f_hz", 0.5}}}}},
              {"numerics", {{"t_final_over_tau", tf_over_tau}}}};
}

int criterion3() {
  Report r(3);
  const auto t = run_config(fig3_point(8.0));
  report_failures(r, t);
  r.check(t.ok(), "run at t_f = 8 tau completed");
  if (t.ok()) {
    const double s = t.column_values("signal_numeric")[0], sc = t.column_values("signal_closed")[0];
    const double d = t.column_values("delta_f_numeric")[0], dc = t.column_values("delta_f_closed")[0];
    r.check(rel_err(s, sc) <= 0.10, fmt("<sigma_z(t_f)> = %.5f vs tanh(2 pi tau f n^1.5) = %.5f: rel %.3f <= 0.10", s, sc,
                                        rel_err(s, sc)));
    r.check(rel_err(d, dc) <= 0.15,
            fmt("delta f_3 = %.3f vs closed %.3f rad/s: rel %.3f <= 0.15", d, dc, rel_err(d, dc)));
    const double beta = -0.8, x = demkov_x(kTwoPi * 150e3, 3e-3, beta);
    const double alpha = alpha_single_mode(3, kTwoPi * 0.5, -beta, 0.0);
    r.info(fmt("two-state model at 8 tau (x = %.1f, z = %.3f): signal %.5f", x, x * std::exp(-8.0),
               demkov_signal(alpha, 3e-3, x, 8.0 * 3e-3)));
  }
  r.check(r.elapsed() <= 120.0, fmt("runtime %.1f s <= 120 s", r.elapsed()));
  const auto t16 = run_config(fig3_point(16.0));
  if (t16.ok()) {
    r.info(fmt("t_f = 16 tau: signal %.5f vs %.5f, delta f %.3f vs %.3f", t16.column_values("signal_numeric")[0],
               t16.column_values("signal_closed")[0], t16.column_values("delta_f_numeric")[0],
               t16.column_values("delta_f_closed")[0]));
  }
  return r.finish();
}

void exponent_curve(Report& r, const std::string& scenario, double expect, double tol) {
  const auto start = std::chrono::steady_clock::now();
  json cfg = {{"scenario", scenario}, {"sweep", {{"parameter", "g_hz"}, {"grid", {3000, 3500, 4000, 4500, 5000, 5500, 6000, 6500}}}}};
  const auto t = run_config(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report_failures(r, t);
  r.check(t.ok(), scenario + ": all 8 points completed");
  if (!t.ok()) return;
  const auto n = t.column_values("nbar"), d = t.column_values("delta_f_numeric"), dc = t.column_values("delta_f_closed");
  std::vector<std::pair<double, double>> pts, closed;
  double regime = 0.0;
  const int k = scenario == "fig3b" ? 3 : 5;
  for (size_t i = 0; i < n.size(); ++i) {
    pts.emplace_back(n[i], d[i]);
    closed.emplace_back(n[i], dc[i]);
    regime = std::max(regime, 2.0 * pi * 3e-3 * kTwoPi * 0.5 * std::pow(n[i], 0.5 * k));
  }
  const ScalingFit fit = fit_scaling(pts);
  r.check(std::abs(fit.slope - expect) <= tol,
          fmt("%s: slope %.4f within %.2f of %.1f (n from %.2f to %.2f)", scenario.c_str(), fit.slope, tol, expect,
              n.front(), n.back()));
  r.info(fmt("%s: closed-form slope %.4f, max 2 pi tau f n^(k/2) = %.3f, fit residual %.3f", scenario.c_str(),
             fit_scaling(closed).slope, regime, fit.residual));
  r.check(secs <= 1800.0, fmt("%s: runtime %.1f s <= 1800 s", scenario.c_str(), secs));
}

int criterion4() {
  Report r(4);
  exponent_curve(r, "fig3b", -1.5, 0.15);
  exponent_curve(r, "fig3d", -2.5, 0.25);
  return r.finish();
}

void multimode_curve(Report& r, const std::string& scenario) {
  const auto start = std::chrono::steady_clock::now();
  json cfg = {{"scenario", scenario}, {"physics", {{"nbar_a", 0.64}}}, {"numerics", {{"tol", 1e-6}}}};
  const auto t = run_config(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report_failures(r, t);
  r.check(t.ok(), scenario + ": all points completed");
  if (!t.ok()) return;
  const auto nb = t.column_values("nbar_b"), d = t.column_values("delta_f_numeric"), dc = t.column_values("delta_f_closed");
  std::vector<std::pair<double, double>> pts;
  double worst = 0.0;
  for (size_t i = 0; i < nb.size(); ++i) {
    pts.emplace_back(nb[i], d[i]);
    worst = std::max(worst, rel_err(d[i], dc[i]));
    r.info(fmt("%s: n_b = %.2f  delta f %.4f  closed %.4f", scenario.c_str(), nb[i], d[i], dc[i]));
  }
  const double slope = fit_scaling(pts).slope;
  r.check(std::abs(slope + 1.0) <= 0.1, fmt("%s: slope vs n_b %.4f within 0.1 of -1", scenario.c_str(), slope));
  r.check(worst <= 0.20, fmt("%s: max relative deviation from closed form %.3f <= 0.20", scenario.c_str(), worst));
  r.check(secs <= 2700.0, fmt("%s: runtime %.1f s <= 2700 s", scenario.c_str(), secs));
}

int criterion5() {
  Report r(5);
  multimode_curve(r, "fig4a");
  multimode_curve(r, "fig4b");
  return r.finish();
}

int criterion6() {
  Report r(6);
  HilbertSpec spec = HilbertSpec::spin_boson({40});
  for (double xi_hz : {0.0, 500.0}) {
    ProbeParams p;
    p.omega = kTwoPi * 5e3;
    p.rabi0 = kTwoPi * 1e3;
    p.g = kTwoPi * 4e3;
    p.xi = kTwoPi * xi_hz;
    p.tau = 1.0;
    p.t_final = 1.0;
    const Operator h = rabi_hamiltonian(p, 0.0, spec);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense(), Eigen::EigenvaluesOnly);
    const double split = es.eigenvalues()(1) - es.eigenvalues()(0);
    const double closed = gap(0, p.rabi0, displacement_amplitude(p.omega, p.xi, p.g));
    const std::string what = fmt("xi = %.0f Hz: doublet splitting %.3f Hz vs Omega e^{-2 beta^2} = %.3f Hz: rel %.4f",
                                 xi_hz, split / kTwoPi, closed / kTwoPi, rel_err(split, closed));
    if (xi_hz == 0.0) {
      r.check(rel_err(split, closed) <= 0.01, what + " <= 0.01");
    } else {
      r.info(what);
    }
  }
  const auto t = run_config(json{{"scenario", "fig2b"}});
  report_failures(r, t);
  r.check(t.ok(), "fig2b sweep completed");
  if (t.ok()) {
    const auto xi = t.column_values("xi_hz"), w = t.column_values("omega_eff_hz"), g = t.column_values("gap_numeric_hz");
    double worst = 0.0;
    for (size_t i = 0; i < xi.size(); ++i) worst = std::max(worst, rel_err(g[i], w[i]));
    r.check(worst <= 0.02, fmt("endpoint first-excitation gap vs omega_eff over xi in [0, 2000] Hz: max rel %.4f <= 0.02", worst));
  }
  return r.finish();
}

int criterion7() {
  Report r(7);
  json cfg = {{"scenario", "fig5a"}, {"sweep", {{"parameter", "nbar_th"}, {"grid", {0.25, 0.5, 1.0}}}}};
  const auto t = run_config(cfg);
  report_failures(r, t);
  r.check(t.ok(), "thermal ensembles completed");
  if (t.ok()) {
    const auto n = t.column_values("nbar_th"), q = t.column_values("ratio_numeric");
    for (size_t i = 0; i < n.size(); ++i) {
      const double expect = 1.0 / (1.0 + 2.0 * n[i]);
      r.check(rel_err(q[i], expect) <= 0.05,
              fmt("n_th = %.2f: ensemble / coherent = %.4f vs 1/(1+2n) = %.4f, rel %.4f <= 0.05", n[i], q[i], expect,
                  rel_err(q[i], expect)));
    }
  }
  r.check(r.elapsed() <= 900.0, fmt("runtime %.1f s <= 900 s", r.elapsed()));
  return r.finish();
}

int criterion8() {
  Report r(8);
  const auto t = run_config(json{{"scenario", "fig5c"}});
  report_failures(r, t);
  r.check(t.ok(), "dephasing sweep completed");
  if (t.ok()) {
    const auto g = t.column_values("g_hz"), q = t.column_values("ratio_numeric");
    double mean = 0.0, var = 0.0;
    for (double v : q) mean += v / q.size();
    for (double v : q) var += (v - mean) * (v - mean) / (q.size() - 1);
    for (size_t i = 0; i < g.size(); ++i) r.info(fmt("g = %.0f Hz: delta f(Gamma)/delta f(0) = %.5f", g[i], q[i]));
    const double rsd = std::sqrt(var) / mean;
    r.check(g.size() == 4, fmt("%zu-point g grid", g.size()));
    r.check(rsd <= 0.10, fmt("relative standard deviation of the ratio %.4f <= 0.10", rsd));
  }
  r.check(r.elapsed() <= 1800.0, fmt("runtime %.1f s <= 1800 s", r.elapsed()));
  return r.finish();
}

int criterion9() {
  Report r(9);
  const auto id = lamb_dicke_factor(0.0, 40).dense();
  r.check(id == DenseMatrix::Identity(40, 40), "F(n) at eta = 0 equals the identity exactly");
  ScenarioConfig cfg = ScenarioConfig::from_json(merged_config(json{{"scenario", "estimate"}}));
  ProbeRun run;
  run.params = cfg.probe_params();
  run.pert = cfg.perturbation();
  run.options.rtol = cfg.numerics.tol;
  run.options.output_points = 2;
  const double lin = run_probe(run).final_value("sigma_z");
  run.coupling = BeyondLambDicke{1e-3};
  const double bld = run_probe(run).final_value("sigma_z");
  r.check(std::abs(bld - lin) <= 1e-3,
          fmt("<sigma_z(t_f)> beyond Lamb-Dicke (eta = 1e-3) %.8f vs linear %.8f: |diff| %.2e <= 1e-3", bld, lin,
              std::abs(bld - lin)));
  return r.finish();
}

double fd_qfi(double alpha, double tau, double x, double t) {
  const auto fam = [&](double a) {
    const auto s = demkov_exact({a, tau, x, t});
    StateVector v(2);
    v << s.c_up, s.c_down;
    return QuantumState::pure(HilbertSpec::spin_only(), v);
  };
  return qfi_numeric(fam, alpha, 1e-3 / tau);
}

int criterion10() {
  Report r(10);
  const double tau = 1.0;
  struct Sample {
    double y, x, t;
  };
  const std::vector<Sample> samples = {
      {0.0, 20000, 22}, {0.05, 20000, 22}, {0.1, 20000, 22}, {0.2, 20000, 24}, {0.3, 20000, 25}};
  const std::array<QfiForm, 3> forms = {QfiForm::InnerProduct, QfiForm::TrailingLinear, QfiForm::LeadingOnly};
  const std::array<const char*, 3> names = {"inner product", "trailing linear", "leading only"};
  std::array<double, 3> worst{};
  double worst_asym = 0.0;
  for (const auto& s : samples) {
    const double num = fd_qfi(s.y / tau, tau, s.x, s.t * tau);
    const double z = s.x * std::exp(-s.t);
    for (size_t f = 0; f < forms.size(); ++f) {
      worst[f] = std::max(worst[f], rel_err(qfi_exact_form(forms[f], 1.0, tau, z, s.y / tau), num));
    }
    const double t20 = 20.0 * tau;
    const double num20 = fd_qfi(s.y / tau, tau, s.x, t20);
    const double asym = qfi_closed(1.0, tau, s.x * std::exp(-20.0), s.y / tau, t20).asymptotic;
    worst_asym = std::max(worst_asym, rel_err(asym, num20));
    r.info(fmt("alpha tau = %.2f, x = %.0f, t = %.0f tau: finite-difference QFI %.6f; at 20 tau %.3f vs asymptotic %.3f",
               s.y, s.x, s.t, num, num20, asym));
  }
  for (size_t f = 0; f < forms.size(); ++f) {
    r.info(fmt("brace placement '%s': max rel deviation %.2e%s", names[f], worst[f],
               forms[f] == kQfiForm ? " (implemented)" : ""));
  }
  const size_t chosen = std::find(forms.begin(), forms.end(), kQfiForm) - forms.begin();
  r.check(worst[chosen] <= 1e-4, fmt("implemented exact-form QFI vs finite differences: %.2e <= 1e-4", worst[chosen]));
  r.check(worst_asym <= 0.01, fmt("asymptotic 4 t^2 sech^2 form at t = 20 tau: max rel %.3f <= 0.01", worst_asym));
  return r.finish();
}

int criterion11() {
  Report r(11);
  const ScenarioConfig cfg = ScenarioConfig::from_json(merged_config(json{{"scenario", "fig3b"}}));
  const ResultTable one = sweep(cfg, 1);
  const ResultTable eight = sweep(cfg, 8);
  report_failures(r, one);
  r.check(one.csv() == eight.csv(), fmt("fig3b CSV bytes with 1 and 8 workers identical (%zu bytes, %zu rows)",
                                        one.csv().size(), one.rows.size()));
  return r.finish();
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--criterion") which = std::atoi(argv[i + 1]);
  }
  const std::array<std::function<int()>, 11> all = {criterion1, criterion2, criterion3, criterion4,
                                                     criterion5, criterion6, criterion7, criterion8,
                                                     criterion9, criterion10, criterion11};
  try {
    if (which >= 1 && which <= 11) return all[which - 1]();
    if (which == 0) {
      int failed = 0;
      for (const auto& c : all) failed += c();
      return failed == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::printf("criterion %d: FAIL (error: %s)\n", which, e.what());
    return 1;
  }
  std::fprintf(stderr, "usage: acceptance [--criterion 1..11]\n");
  return 2;
}
