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

#include "arsim/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "arsim/analytic.hpp"

namespace arsim {

namespace {

const cplx kI(0.0, 1.0);

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double state_norm(const StateVector& v) { return v.norm(); }
double state_norm(const DenseMatrix& m) { return m.norm(); }

// Adaptive integration of y' = f(t, y) across a sorted output grid; the
// step is clipped so every grid time is hit exactly and observe(i, y) is
// called there.
template <class State, class Rhs, class Observe>
void dopri5(Rhs&& f, State& y, const std::vector<double>& grid, double rtol, double atol, long long max_steps,
            Diagnostics& diag, Observe&& observe) {
  double t = grid.front();
  State k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
  f(t, y, k1);
  ++diag.rhs_evaluations;
  observe(0, y);

  const double span = grid.back() - grid.front();
  double h;
  {
    const double fn = state_norm(k1);
    h = fn > 0.0 ? 0.01 * std::max(state_norm(y), 1e-300) / fn : span;
    h = std::min(h, span);
  }
  double fac_max = 5.0;
  for (size_t gi = 1; gi < grid.size(); ++gi) {
    const double target = grid[gi];
    while (t < target) {
      if (diag.accepted_steps + diag.rejected_steps > max_steps) {
        throw Error(ErrorCode::ToleranceNotMet, "step budget exhausted at t = " + std::to_string(t));
      }
      const bool clipped = t + h >= target - 1e-14 * std::max(1.0, std::abs(target));
      const double hs = clipped ? target - t : h;
      if (!(hs > 0.0) || t + hs == t) throw Error(ErrorCode::ToleranceNotMet, "step size underflow");

      tmp = y + (hs * a21) * k1;
      f(t + c2 * hs, tmp, k2);
      tmp = y + hs * (a31 * k1 + a32 * k2);
      f(t + c3 * hs, tmp, k3);
      tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      f(t + c4 * hs, tmp, k4);
      tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      f(t + c5 * hs, tmp, k5);
      tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      f(t + hs, tmp, k6);
      ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      f(t + hs, ynew, k7);
      diag.rhs_evaluations += 6;

      tmp = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double scale = atol + rtol * std::max(state_norm(y), state_norm(ynew));
      const double err = state_norm(tmp) / scale;
      if (!std::isfinite(err)) throw Error(ErrorCode::ToleranceNotMet, "non-finite error estimate");

      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : fac_max;
      if (err <= 1.0) {
        t = clipped ? target : t + hs;
        std::swap(y, ynew);
        std::swap(k1, k7);
        ++diag.accepted_steps;
        // A clipped step says nothing about the natural step: keep h.
        if (!clipped || hs >= h) h = hs * std::clamp(fac, 0.2, fac_max);
        fac_max = 5.0;
      } else {
        ++diag.rejected_steps;
        h = hs * std::clamp(fac, 0.2, 1.0);
        fac_max = 1.0;
      }
    }
    observe(gi, y);
  }
}

// exp(-i dt H(t)) psi by Chebyshev expansion on Gershgorin spectral bounds.
class ChebyshevExponential {
 public:
  explicit ChebyshevExponential(const TimeDependentHamiltonian& h) : h_(h) {
    static_ = bounds(h.static_part().matrix());
    for (const auto& term : h.terms()) terms_.push_back(bounds(term.op.matrix()));
    identity_.resize(h.dim(), h.dim());
    identity_.setIdentity();
  }

  void apply(double t, double dt, StateVector& psi, Diagnostics& diag) {
    coeffs_.clear();
    for (const auto& term : h_.terms()) coeffs_.push_back(term.coeff(t));
    Eigen::VectorXd centre = static_.diag;
    Eigen::VectorXd radius = static_.radius;
    for (size_t i = 0; i < terms_.size(); ++i) {
      centre += coeffs_[i] * terms_[i].diag;
      radius += std::abs(coeffs_[i]) * terms_[i].radius;
    }
    const double lo = (centre - radius).minCoeff();
    const double hi = (centre + radius).maxCoeff();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * (1.0 + 1e-3) + 1e-300;
    // Long steps of a fixed generator are split so the expansion argument
    // stays in the range where the Bessel coefficients are accurate.
    const int pieces = std::max(1, static_cast<int>(std::ceil(dt * half / kMaxChebyshevArgument)));
    if (dt * half >= 1e-14) {
      hn_ = h_.static_part().matrix();
      for (size_t i = 0; i < coeffs_.size(); ++i) hn_ += coeffs_[i] * h_.terms()[i].op.matrix();
      hn_ -= mid * identity_;
      hn_ *= 1.0 / half;
      hn_.makeCompressed();
      real_ = true;
      for (int p = 0; p < hn_.nonZeros(); ++p) real_ = real_ && hn_.valuePtr()[p].imag() == 0.0;
      if (real_) {
        real_values_.resize(hn_.nonZeros());
        for (int p = 0; p < hn_.nonZeros(); ++p) real_values_[p] = hn_.valuePtr()[p].real();
      }
    }
    for (int p = 0; p < pieces; ++p) expand(dt / pieces, mid, half, psi, diag);
  }

 private:
  static constexpr double kMaxChebyshevArgument = 40.0;

  void expand(double dt, double mid, double half, StateVector& psi, Diagnostics& diag) {
    const double r = dt * half;
    const cplx global = std::polar(1.0, -dt * mid);
    if (r < 1e-14) {
      psi *= global;
      return;
    }
    // Chebyshev recursion T_{k+1} = 2 Hn T_k - T_{k-1} on Hn = (H - mid)/half,
    // fused with the accumulation of sum_k c_k T_k.
    const int n = static_cast<int>(psi.size());
    prev_ = psi;
    cur_.resize(n);
    acc_.resize(n);
    const cplx c0 = std::cyl_bessel_j(0.0, r);
    const cplx c1 = 2.0 * cplx(0.0, -1.0) * std::cyl_bessel_j(1.0, r);
    sweep(prev_.data(), nullptr, cur_.data(), 1.0, c1, c0, prev_.data(), acc_.data());
    ++diag.rhs_evaluations;
    cplx phase(0.0, -1.0);
    int quiet = 0;
    for (int k = 2; k < 100000; ++k) {
      phase *= cplx(0.0, -1.0);
      const double jk = std::cyl_bessel_j(static_cast<double>(k), r);
      // prev_ is overwritten row by row with T_{k}; only cur_ is read across rows.
      sweep(cur_.data(), prev_.data(), prev_.data(), 2.0, (2.0 * jk) * phase, 0.0, nullptr, acc_.data());
      ++diag.rhs_evaluations;
      std::swap(prev_, cur_);
      if (k > r && std::abs(jk) < 1e-17) {
        if (++quiet >= 2) break;
      } else {
        quiet = 0;
      }
    }
    psi = global * acc_;
  }

  // out_i = scale (Hn x)_i - sub_i;  acc_i = base acc-seed + c out_i.
  // With seed_src set, acc_i is initialised to seed * seed_src_i first.
  void sweep(const cplx* x, const cplx* sub, cplx* out, double scale, cplx c, cplx seed, const cplx* seed_src,
             cplx* acc) const {
    const int n = static_cast<int>(hn_.rows());
    const int* outer = hn_.outerIndexPtr();
    const int* inner = hn_.innerIndexPtr();
    for (int i = 0; i < n; ++i) {
      cplx s = 0.0;
      if (real_) {
        double re = 0.0, im = 0.0;
        for (int p = outer[i]; p < outer[i + 1]; ++p) {
          const double v = real_values_[p];
          re += v * x[inner[p]].real();
          im += v * x[inner[p]].imag();
        }
        s = cplx(re, im);
      } else {
        const cplx* val = hn_.valuePtr();
        for (int p = outer[i]; p < outer[i + 1]; ++p) s += val[p] * x[inner[p]];
      }
      const cplx o = sub ? scale * s - sub[i] : scale * s;
      out[i] = o;
      acc[i] = (seed_src ? seed * seed_src[i] : acc[i]) + c * o;
    }
  }

  struct RowBounds {
    Eigen::VectorXd diag;
    Eigen::VectorXd radius;
  };

  static RowBounds bounds(const SparseMatrix& m) {
    RowBounds b{Eigen::VectorXd::Zero(m.rows()), Eigen::VectorXd::Zero(m.rows())};
    for (int r = 0; r < m.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
        if (it.col() == r) {
          b.diag(r) += it.value().real();
        } else {
          b.radius(r) += std::abs(it.value());
        }
      }
    return b;
  }

  const TimeDependentHamiltonian& h_;
  RowBounds static_;
  std::vector<RowBounds> terms_;
  std::vector<double> coeffs_;
  SparseMatrix identity_, hn_;
  bool real_ = false;
  std::vector<double> real_values_;
  StateVector prev_, cur_, acc_;
};

// Exponential midpoint rule psi <- exp(-i h H(t + h/2)) psi. Each step is
// compared with two half steps; the half-step result is kept.
template <class Observe>
void magnus_midpoint(const TimeDependentHamiltonian& h, StateVector& y, const std::vector<double>& grid, double rtol,
                     double atol, long long max_steps, Diagnostics& diag, Observe&& observe) {
  ChebyshevExponential expo(h);
  double t = grid.front();
  observe(0, y);
  double step = 0.0;
  {
    // Initial guess: a tenth of a radian of the largest phase.
    const SparseMatrix m = h.at(t).matrix();
    double norm1 = 0.0;
    for (int r = 0; r < m.outerSize(); ++r) {
      double row = 0.0;
      for (SparseMatrix::InnerIterator it(m, r); it; ++it) row += std::abs(it.value());
      norm1 = std::max(norm1, row);
    }
    step = norm1 > 0.0 ? 0.1 / norm1 : grid.back() - grid.front();
  }
  StateVector full, halves;
  for (size_t gi = 1; gi < grid.size(); ++gi) {
    const double target = grid[gi];
    while (t < target) {
      if (diag.accepted_steps + diag.rejected_steps > max_steps) {
        throw Error(ErrorCode::ToleranceNotMet, "step budget exhausted at t = " + std::to_string(t));
      }
      const bool clipped = t + step >= target - 1e-14 * std::max(1.0, std::abs(target));
      const double hs = clipped ? target - t : step;
      if (!(hs > 0.0) || t + hs == t) throw Error(ErrorCode::ToleranceNotMet, "step size underflow");
      full = y;
      expo.apply(t + 0.5 * hs, hs, full, diag);
      halves = y;
      expo.apply(t + 0.25 * hs, 0.5 * hs, halves, diag);
      expo.apply(t + 0.75 * hs, 0.5 * hs, halves, diag);
      const double err = (full - halves).norm() / 3.0 / (atol + rtol * halves.norm());
      if (!std::isfinite(err)) throw Error(ErrorCode::ToleranceNotMet, "non-finite error estimate");
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 2.0;
      if (err <= 1.0) {
        t = clipped ? target : t + hs;
        std::swap(y, halves);
        ++diag.accepted_steps;
        if (!clipped || hs >= step) step = hs * std::clamp(fac, 0.2, 2.0);
      } else {
        ++diag.rejected_steps;
        step = hs * std::clamp(fac, 0.2, 1.0);
      }
    }
    observe(gi, y);
  }
}

std::vector<double> uniform_grid(double t0, double t1, int points) {
  if (!(t1 > t0)) throw Error(ErrorCode::Domain, "propagation needs t1 > t0");
  points = std::max(points, 2);
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = t0 + (t1 - t0) * i / (points - 1);
  g.back() = t1;
  return g;
}

// e^{i d t} for a real diagonal d, evaluated once per distinct entry.
class PhaseTable {
 public:
  explicit PhaseTable(const Eigen::VectorXd& d) : n_(d.size()) {
    std::unordered_map<double, int> index;
    cls_.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      auto [it, inserted] = index.try_emplace(d(i), static_cast<int>(values_.size()));
      if (inserted) values_.push_back(d(i));
      cls_[i] = it->second;
    }
  }

  void evaluate(double t, StateVector& out) const {
    std::vector<cplx> v(values_.size());
    for (size_t k = 0; k < values_.size(); ++k) v[k] = std::polar(1.0, values_[k] * t);
    out.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i) out(i) = v[cls_[i]];
  }

 private:
  Eigen::Index n_;
  std::vector<int> cls_;
  std::vector<double> values_;
};

// Shared machinery for the two propagators: frame handling and the
// observable bookkeeping on the reporting grid.
class Frame {
 public:
  Frame(const TimeDependentHamiltonian& h, bool enabled) : enabled_(enabled) {
    const SparseMatrix& m = h.static_part().matrix();
    diag_ = Eigen::VectorXd::Zero(h.dim());
    if (enabled_) {
      for (int i = 0; i < h.dim(); ++i) diag_(i) = m.coeff(i, i).real();
      enabled_ = diag_.cwiseAbs().maxCoeff() > 0.0;
    }
    if (enabled_) table_.emplace(diag_);
  }

  bool enabled() const { return enabled_; }
  const Eigen::VectorXd& diag() const { return diag_; }
  void phases(double t, StateVector& out) const { table_->evaluate(t, out); }

 private:
  bool enabled_;
  Eigen::VectorXd diag_;
  std::optional<PhaseTable> table_;
};

struct ObservableSet {
  const HilbertSpec& spec;
  int half = 0;
  Eigen::VectorXd occupation_a;
  std::vector<std::vector<int>> top_indices;

  explicit ObservableSet(const HilbertSpec& s) : spec(s) {
    half = spec.has_spin() ? spec.dim() / 2 : 0;
    if (spec.num_modes() > 0) {
      const int d = spec.mode_dims()[0];
      const int stride = spec.stride(Slot::mode(0));
      occupation_a.resize(spec.dim());
      for (int i = 0; i < spec.dim(); ++i) occupation_a(i) = (i / stride) % d;
    }
    for (int m = 0; m < spec.num_modes(); ++m) {
      const int d = spec.mode_dims()[m];
      const int stride = spec.stride(Slot::mode(m));
      std::vector<int> idx;
      for (int i = 0; i < spec.dim(); ++i)
        if ((i / stride) % d >= d - 2) idx.push_back(i);
      top_indices.push_back(std::move(idx));
    }
  }

  double leakage_vec(const StateVector& psi) const {
    double worst = 0.0;
    for (const auto& idx : top_indices) {
      double p = 0.0;
      for (int i : idx) p += std::norm(psi(i));
      worst = std::max(worst, p);
    }
    return worst;
  }

  double leakage_mat(const DenseMatrix& rho) const {
    double worst = 0.0;
    for (const auto& idx : top_indices) {
      double p = 0.0;
      for (int i : idx) p += rho(i, i).real();
      worst = std::max(worst, p);
    }
    return worst;
  }
};

void init_series(Trajectory& tr, const HilbertSpec& spec, const PropagationOptions& opts, size_t n) {
  tr.times.assign(n, 0.0);
  auto add = [&](const std::string& name) { tr.observables[name].assign(n, 0.0); };
  if (spec.has_spin()) {
    add("sigma_x");
    add("sigma_y");
    add("sigma_z");
  }
  if (spec.num_modes() > 0) {
    add("n_a");
    add("leakage");
  }
  for (const auto& [name, op] : opts.extra_observables) {
    if (!(op.spec() == spec)) throw Error(ErrorCode::SpecMismatch, "observable " + name + " lives on another space");
    add(name);
  }
}

}  // namespace

const std::vector<double>& Trajectory::series(const std::string& name) const {
  const auto it = observables.find(name);
  if (it == observables.end()) throw Error(ErrorCode::Config, "no observable named " + name);
  return it->second;
}

double Trajectory::final_value(const std::string& name) const { return series(name).back(); }

// ---------------------------------------------------------------------------

GroundState ground_state(const Operator& h) {
  const DenseMatrix m = h.dense();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::Eigensolver, "ground_state diagonalization failed");
  const Eigen::VectorXd& e = es.eigenvalues();
  const double scale = std::max(e.cwiseAbs().maxCoeff(), 1e-300);
  const double tol = 1e-9 * scale;
  std::vector<StateVector> basis;
  for (Eigen::Index j = 0; j < e.size() && e(j) - e(0) <= tol; ++j) basis.push_back(es.eigenvectors().col(j));
  StateVector psi = es.eigenvectors().col(0);
  // Fix the global phase: largest component real positive.
  Eigen::Index imax;
  psi.cwiseAbs().maxCoeff(&imax);
  psi *= std::conj(psi(imax)) / std::abs(psi(imax));
  psi.normalize();
  const bool degenerate = basis.size() > 1;
  return GroundState{QuantumState::pure(h.spec(), psi), e(0), degenerate ? 0.0 : e(1) - e(0), degenerate,
                     degenerate ? basis : std::vector<StateVector>{}};
}

Trajectory propagate(const TimeDependentHamiltonian& h, const QuantumState& psi0, double t0, double t1,
                     const PropagationOptions& opts) {
  if (!psi0.is_pure()) throw Error(ErrorCode::InvalidState, "propagate needs a pure state");
  if (!(psi0.spec() == h.spec())) throw Error(ErrorCode::SpecMismatch, "state and Hamiltonian spaces differ");
  const HilbertSpec& spec = h.spec();
  const std::vector<double> grid = uniform_grid(t0, t1, opts.output_points);
  const Frame frame(h, opts.interaction_frame && opts.integrator == Integrator::DormandPrince);
  const ObservableSet obs(spec);

  Trajectory tr;
  init_series(tr, spec, opts, grid.size());
  tr.diagnostics.rtol = opts.rtol;

  StateVector ph, u, w;
  auto rhs = [&](double t, const StateVector& y, StateVector& out) {
    if (frame.enabled()) {
      frame.phases(t, ph);
      u = ph.conjugate().cwiseProduct(y);
      h.apply(t, u, w);
      w.array() -= frame.diag().array() * u.array();
      out = (-kI) * ph.cwiseProduct(w);
    } else {
      h.apply(t, y, out);
      out *= -kI;
    }
  };

  StateVector lab;
  auto observe = [&](size_t i, const StateVector& y) {
    const double t = grid[i];
    if (frame.enabled()) {
      frame.phases(t, ph);
      lab = ph.conjugate().cwiseProduct(y);
    } else {
      lab = y;
    }
    tr.times[i] = t;
    const double drift = std::abs(lab.norm() - 1.0);
    tr.diagnostics.max_norm_drift = std::max(tr.diagnostics.max_norm_drift, drift);
    if (drift > opts.norm_gate) {
      throw Error(ErrorCode::ToleranceNotMet, "norm drift " + std::to_string(drift) + " at t = " + std::to_string(t));
    }
    if (spec.has_spin()) {
      const auto up = lab.head(obs.half), down = lab.tail(obs.half);
      const cplx ov = up.dot(down);
      tr.observables["sigma_x"][i] = 2.0 * ov.real();
      tr.observables["sigma_y"][i] = 2.0 * ov.imag();
      tr.observables["sigma_z"][i] = up.squaredNorm() - down.squaredNorm();
    }
    if (spec.num_modes() > 0) {
      tr.observables["n_a"][i] = obs.occupation_a.dot(lab.cwiseAbs2());
      const double leak = obs.leakage_vec(lab);
      tr.observables["leakage"][i] = leak;
      tr.diagnostics.max_leakage = std::max(tr.diagnostics.max_leakage, leak);
      if (opts.monitor_leakage && leak > kLeakageLimit) {
        throw Error(ErrorCode::Leakage, "top-level population " + std::to_string(leak) + " at t = " +
                                            std::to_string(t) + "; increase the Fock dimension");
      }
    }
    for (const auto& [name, op] : opts.extra_observables) {
      tr.observables[name][i] = lab.dot(op.matrix() * lab).real();
    }
    const bool last = i + 1 == grid.size();
    if (opts.store_every > 0 && i % opts.store_every == 0 && !last) {
      tr.state_times.push_back(t);
      tr.states.push_back(QuantumState::pure(spec, lab));
    }
    if (last) tr.final_state = QuantumState::pure(spec, lab);
  };

  StateVector y = psi0.vector();
  if (opts.integrator == Integrator::DormandPrince) {
    if (frame.enabled()) {
      frame.phases(t0, ph);
      y = ph.cwiseProduct(y);
    }
    dopri5(rhs, y, grid, opts.rtol, opts.atol, opts.max_steps, tr.diagnostics, observe);
  } else {
    magnus_midpoint(h, y, grid, opts.rtol, opts.atol, opts.max_steps, tr.diagnostics, observe);
  }
  return tr;
}

Trajectory propagate_lindblad(const TimeDependentHamiltonian& h, const QuantumState& rho0, double gamma, double t0,
                              double t1, const PropagationOptions& opts) {
  if (!(rho0.spec() == h.spec())) throw Error(ErrorCode::SpecMismatch, "state and Hamiltonian spaces differ");
  if (opts.integrator == Integrator::MagnusChebyshev) {
    throw Error(ErrorCode::UnsupportedSpec, "density-matrix propagation uses the Dormand-Prince stepper");
  }
  if (gamma < 0.0) throw Error(ErrorCode::Domain, "dephasing rate must be >= 0");
  const HilbertSpec& spec = h.spec();
  if (gamma > 0.0 && !spec.has_spin()) throw Error(ErrorCode::UnsupportedSpec, "dephasing needs a spin");
  const std::vector<double> grid = uniform_grid(t0, t1, opts.output_points);
  const Frame frame(h, opts.interaction_frame);
  const ObservableSet obs(spec);
  const int n = spec.dim();
  const int half = obs.half;

  Trajectory tr;
  init_series(tr, spec, opts, grid.size());
  tr.diagnostics.rtol = opts.rtol;
  tr.diagnostics.min_eigenvalue = std::numeric_limits<double>::infinity();

  StateVector ph;
  DenseMatrix u, x;
  auto to_lab = [&](double t, const DenseMatrix& y, DenseMatrix& out) {
    if (!frame.enabled()) {
      out = y;
      return;
    }
    frame.phases(t, ph);
    out = ph.conjugate().asDiagonal() * y * ph.asDiagonal();
  };
  auto rhs = [&](double t, const DenseMatrix& y, DenseMatrix& out) {
    to_lab(t, y, u);
    h.apply(t, u, x);
    if (frame.enabled()) x -= frame.diag().asDiagonal() * u;
    out = (-kI) * (x - x.adjoint());
    if (frame.enabled()) out = ph.asDiagonal() * out * ph.conjugate().asDiagonal();
    if (gamma > 0.0) {
      out.topRightCorner(half, half) -= gamma * y.topRightCorner(half, half);
      out.bottomLeftCorner(half, half) -= gamma * y.bottomLeftCorner(half, half);
    }
  };

  DenseMatrix lab;
  auto observe = [&](size_t i, const DenseMatrix& y) {
    const double t = grid[i];
    to_lab(t, y, lab);
    tr.times[i] = t;
    const double drift = std::abs(lab.trace() - cplx(1.0, 0.0));
    tr.diagnostics.max_norm_drift = std::max(tr.diagnostics.max_norm_drift, drift);
    if (drift > opts.norm_gate) {
      throw Error(ErrorCode::ToleranceNotMet, "trace drift " + std::to_string(drift) + " at t = " + std::to_string(t));
    }
    const double herm = (lab - lab.adjoint()).cwiseAbs().maxCoeff();
    tr.diagnostics.max_hermiticity_defect = std::max(tr.diagnostics.max_hermiticity_defect, herm);
    if (herm > 1e-10) throw Error(ErrorCode::ToleranceNotMet, "density matrix lost Hermiticity");
    const DenseMatrix sym = 0.5 * (lab + lab.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(sym, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    tr.diagnostics.min_eigenvalue = std::min(tr.diagnostics.min_eigenvalue, emin);
    if (emin < -1e-6) {
      throw Error(ErrorCode::PositivityViolation,
                  "density matrix eigenvalue " + std::to_string(emin) + " at t = " + std::to_string(t));
    }
    if (spec.has_spin()) {
      const cplx ud = lab.topRightCorner(half, half).trace();
      tr.observables["sigma_x"][i] = 2.0 * ud.real();
      tr.observables["sigma_y"][i] = -2.0 * ud.imag();
      tr.observables["sigma_z"][i] = lab.topLeftCorner(half, half).trace().real() -
                                     lab.bottomRightCorner(half, half).trace().real();
    }
    if (spec.num_modes() > 0) {
      tr.observables["n_a"][i] = obs.occupation_a.dot(lab.diagonal().real());
      const double leak = obs.leakage_mat(lab);
      tr.observables["leakage"][i] = leak;
      tr.diagnostics.max_leakage = std::max(tr.diagnostics.max_leakage, leak);
      if (opts.monitor_leakage && leak > kLeakageLimit) {
        throw Error(ErrorCode::Leakage, "top-level population " + std::to_string(leak) + " at t = " +
                                            std::to_string(t) + "; increase the Fock dimension");
      }
    }
    for (const auto& [name, op] : opts.extra_observables) {
      cplx tr_val = 0.0;
      const SparseMatrix& m = op.matrix();
      for (int r = 0; r < m.outerSize(); ++r)
        for (SparseMatrix::InnerIterator it(m, r); it; ++it) tr_val += it.value() * lab(it.col(), it.row());
      tr.observables[name][i] = tr_val.real();
    }
    const bool last = i + 1 == grid.size();
    const bool store = opts.store_every > 0 && i % opts.store_every == 0 && !last;
    if (store || last) {
      // Integration error below the positivity gate is clipped from stored states.
      DenseMatrix kept = sym;
      if (emin < -1e-9) {
        Eigen::SelfAdjointEigenSolver<DenseMatrix> full(sym);
        const Eigen::VectorXd ev = full.eigenvalues().cwiseMax(0.0);
        kept = full.eigenvectors() * (ev / ev.sum()).asDiagonal() * full.eigenvectors().adjoint();
      }
      if (store) {
        tr.state_times.push_back(t);
        tr.states.push_back(QuantumState::mixed(spec, kept));
      } else {
        tr.final_state = QuantumState::mixed(spec, kept);
      }
    }
  };

  DenseMatrix y = rho0.density();
  if (y.rows() != n) throw Error(ErrorCode::DimensionMismatch, "density matrix size");
  if (frame.enabled()) {
    frame.phases(t0, ph);
    y = ph.asDiagonal() * y * ph.conjugate().asDiagonal();
  }
  dopri5(rhs, y, grid, opts.rtol, opts.atol, opts.max_steps, tr.diagnostics, observe);
  return tr;
}

// ---------------------------------------------------------------------------

HilbertSpec probe_spec(const ProbeRun& run) {
  std::vector<int> dims = run.mode_dims;
  const int need = std::max(1, required_modes(run.pert));
  if (dims.empty()) {
    const double r = squeeze_amplitude(run.params.omega, run.params.xi);
    const double beta = displacement_amplitude(run.params.omega, run.params.xi, run.params.g);
    dims.push_back(default_mode_dim(beta, r) + run.fock_a);
  }
  if (static_cast<int>(dims.size()) < need) {
    throw Error(ErrorCode::ModeCountMismatch, "perturbation needs " + std::to_string(need) + " mode dimensions");
  }
  return HilbertSpec::spin_boson(dims);
}

StateVector probe_initial_state(const ProbeRun& run) {
  const HilbertSpec spec = probe_spec(run);
  const double r = squeeze_amplitude(run.params.omega, run.params.xi);
  const int da = spec.mode_dims()[0];
  std::vector<StateVector> factors;
  StateVector minus(2);
  minus << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  factors.push_back(minus);
  StateVector a = fock_state(da, run.fock_a);
  if (r != 0.0) a = squeeze_operator(r, run.params.theta - std::numbers::pi, da).apply(a);
  factors.push_back(a);
  for (int m = 1; m < spec.num_modes(); ++m) {
    const double amp = m - 1 < static_cast<int>(run.coherent.size()) ? run.coherent[m - 1] : 0.0;
    factors.push_back(coherent_state(amp, spec.mode_dims()[m]));
  }
  return product_vector(spec, factors);
}

Trajectory run_probe(const ProbeRun& run) {
  run.params.validate();
  const HilbertSpec spec = probe_spec(run);
  const TimeDependentHamiltonian h = probe_hamiltonian(run.params, spec, run.coupling, run.pert);
  const StateVector psi0 = probe_initial_state(run);
  if (run.gamma > 0.0) {
    const DenseMatrix rho0 = psi0 * psi0.adjoint();
    return propagate_lindblad(h, QuantumState::mixed(spec, rho0), run.gamma, 0.0, run.params.t_final, run.options);
  }
  return propagate(h, QuantumState::pure(spec, psi0), 0.0, run.params.t_final, run.options);
}

// ---------------------------------------------------------------------------

double thermal_weight(double nbar_th, int n) {
  if (nbar_th < 0.0) throw Error(ErrorCode::Domain, "thermal occupation must be >= 0");
  if (nbar_th == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::pow(nbar_th / (1.0 + nbar_th), n) / (1.0 + nbar_th);
}

ThermalResult thermal_ensemble_signal(const ProbeRun& base, double nbar_th, int n_cut, int workers) {
  if (n_cut < 0) throw Error(ErrorCode::Domain, "n_cut must be >= 0");
  ThermalResult out;
  for (int n = 0; n <= n_cut; ++n) {
    const double w = thermal_weight(nbar_th, n);
    if (w == 0.0) break;
    out.components.push_back({n, w, 0.0});
    out.captured_weight += w;
  }
  if (out.captured_weight < 1.0 - 1e-4) {
    throw Error(ErrorCode::CutoffInsufficient, "Fock components up to " + std::to_string(n_cut) + " capture weight " +
                                                   std::to_string(out.captured_weight));
  }
  // Higher Fock components spread further; their mode-a dimension grows on leakage.
  auto run_one = [&](size_t idx) {
    ProbeRun run = base;
    run.fock_a = out.components[idx].n;
    if (run.mode_dims.empty()) return run_probe(run).final_value("sigma_z");
    run.mode_dims[0] = base.mode_dims[0] + run.fock_a;
    for (int attempt = 0;; ++attempt) {
      try {
        return run_probe(run).final_value("sigma_z");
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Leakage || attempt >= 6 || run.fock_a == 0) throw;
        run.mode_dims[0] = static_cast<int>(std::ceil(1.3 * run.mode_dims[0])) + 2;
      }
    }
  };
  const size_t count = out.components.size();
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) out.components[i].sigma_z = run_one(i);
  } else {
    for (size_t start = 0; start < count; start += workers) {
      std::vector<std::future<double>> futs;
      for (size_t i = start; i < std::min(count, start + workers); ++i)
        futs.push_back(std::async(std::launch::async, run_one, i));
      for (size_t i = 0; i < futs.size(); ++i) out.components[start + i].sigma_z = futs[i].get();
    }
  }
  for (const auto& c : out.components) out.signal += c.weight * c.sigma_z;
  return out;
}

// ---------------------------------------------------------------------------

AdiabaticityReport adiabaticity(const TimeDependentHamiltonian& h, const std::vector<double>& t_grid,
                                const AdiabaticityOptions& opts) {
  if (t_grid.empty()) throw Error(ErrorCode::Domain, "adiabaticity needs a time grid");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw Error(ErrorCode::Domain, "time grid must be strictly increasing");
  const double span = t_grid.size() > 1 ? t_grid.back() - t_grid.front() : std::max(std::abs(t_grid.front()), 1.0);
  const double delta = opts.delta > 0.0 ? opts.delta : 1e-6 * span;

  auto eig = [&](double t) {
    const DenseMatrix m = h.at(t).dense();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::Eigensolver, "adiabaticity diagonalization failed");
    return es;
  };

  AdiabaticityReport rep;
  for (const double t : t_grid) {
    const auto es = eig(t);
    const Eigen::VectorXd& e = es.eigenvalues();
    const DenseMatrix& v = es.eigenvectors();
    const double scale = std::max(e.cwiseAbs().maxCoeff(), 1e-300);
    const StateVector g = v.col(0);

    const double tm = std::max(t - delta, t_grid.front() - delta);
    const auto ep = eig(t + delta), em = eig(tm);
    StateVector gp = ep.eigenvectors().col(0), gm = em.eigenvectors().col(0);
    for (StateVector* s : {&gp, &gm}) {
      const cplx ov = g.dot(*s);
      if (std::abs(ov) < 0.5) {
        throw Error(ErrorCode::GaugeFixing, "ground-state overlap " + std::to_string(std::abs(ov)) + " at t = " +
                                                std::to_string(t) + "; refine the grid");
      }
      *s *= std::conj(ov) / std::abs(ov);
    }
    const StateVector dg = (gp - gm) / (t + delta - tm);
    const DenseMatrix hdot = (h.at(t + delta).dense() - h.at(tm).dense()) / (t + delta - tm);
    const StateVector hg = hdot * g;
    const double hscale = std::max(hdot.cwiseAbs().maxCoeff(), 1e-300);

    const bool nondegenerate = e.size() > 1 && e(1) - e(0) > 1e-9 * scale;
    double eps = 0.0, gap_val = e.size() > 1 ? e(1) - e(0) : 0.0;
    for (Eigen::Index j = 1; j < e.size(); ++j) {
      if (e(j) - e(0) <= 1e-9 * scale) continue;
      if (std::abs(v.col(j).dot(hg)) > opts.coupling_threshold * hscale) {
        gap_val = e(j) - e(0);
        eps = std::abs(v.col(j).dot(dg)) / gap_val;
        break;
      }
    }
    rep.times.push_back(t);
    rep.epsilon.push_back(eps);
    rep.gap.push_back(gap_val);
    rep.valid.push_back(nondegenerate);
  }
  return rep;
}

}  // namespace arsim
