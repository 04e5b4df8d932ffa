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

#include "arsim/hamiltonian.hpp"

#include <cmath>
#include <string>

#include "arsim/analytic.hpp"
#include "arsim/specfun.hpp"

namespace arsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Operator power(const Operator& op, int k) {
  Operator out = Operator::identity(op.spec());
  for (int i = 0; i < k; ++i) out = out * op;
  return out;
}

void require_probe_space(const HilbertSpec& spec) {
  if (!spec.has_spin() || spec.num_modes() < 1) {
    throw Error(ErrorCode::UnsupportedSpec, "probe Hamiltonian needs a spin and at least one mode");
  }
}

Operator mode_ladder(const HilbertSpec& spec, int mode) {
  return embed(ladder_ops(spec.mode_dims()[mode]).annihilation, Slot::mode(mode), spec);
}

}  // namespace

void ProbeParams::validate() const {
  const auto bad = [](const std::string& what) { throw Error(ErrorCode::Domain, what); };
  if (!(omega > 0.0)) bad("omega must be positive");
  if (rabi0 < 0.0 || g < 0.0 || xi < 0.0) bad("rates must be nonnegative");
  if (!(2.0 * xi < omega)) bad("squeezing requires 2 xi < omega");
  if (!(tau > 0.0)) bad("tau must be positive");
  if (!(t_final > 0.0)) bad("t_final must be positive");
  if (!std::isfinite(theta)) bad("theta must be finite");
}

double ProbeParams::rabi(double t) const { return rabi_schedule(rabi0, tau, t, profile); }

int required_modes(const PerturbationSpec& pert) {
  return std::visit(Overloaded{[](const NoPerturbation&) { return 0; },
                               [](const SingleModePerturbation&) { return 1; },
                               [](const TwoModePerturbation&) { return 2; },
                               [](const ThreeModePerturbation&) { return 3; }},
                    pert);
}

PerturbationSpec with_amplitude(const PerturbationSpec& pert, double f) {
  return std::visit(Overloaded{[](const NoPerturbation&) -> PerturbationSpec { return NoPerturbation{}; },
                               [f](const SingleModePerturbation& s) -> PerturbationSpec {
                                 return SingleModePerturbation{s.k, f};
                               },
                               [f](const TwoModePerturbation&) -> PerturbationSpec { return TwoModePerturbation{f}; },
                               [f](const ThreeModePerturbation&) -> PerturbationSpec {
                                 return ThreeModePerturbation{f};
                               }},
                    pert);
}

double amplitude(const PerturbationSpec& pert) {
  return std::visit(Overloaded{[](const NoPerturbation&) { return 0.0; },
                               [](const SingleModePerturbation& s) { return s.f; },
                               [](const TwoModePerturbation& s) { return s.f; },
                               [](const ThreeModePerturbation& s) { return s.f; }},
                    pert);
}

double rabi_schedule(double rabi0, double tau, double t) { return rabi0 * std::exp(-t / tau); }

double rabi_schedule(double rabi0, double tau, double t, const RampProfile& profile) {
  return profile ? rabi0 * profile(t / tau) : rabi_schedule(rabi0, tau, t);
}

// ---------------------------------------------------------------------------

TimeDependentHamiltonian::TimeDependentHamiltonian(HilbertSpec spec)
    : spec_(spec), static_(Operator::zero(spec)) {}

void TimeDependentHamiltonian::add_static(const Operator& op) { static_ += op; }

void TimeDependentHamiltonian::add_term(const Operator& op, std::function<double(double)> coeff) {
  if (!(op.spec() == spec_)) throw Error(ErrorCode::SpecMismatch, "term lives on a different space");
  if (!coeff) {
    add_static(op);
    return;
  }
  terms_.push_back({op, std::move(coeff)});
}

Operator TimeDependentHamiltonian::at(double t) const {
  Operator h = static_;
  for (const auto& term : terms_) h += term.coeff(t) * term.op;
  return h;
}

void TimeDependentHamiltonian::apply(double t, const StateVector& v, StateVector& out) const {
  out.noalias() = static_.matrix() * v;
  for (const auto& term : terms_) out.noalias() += term.coeff(t) * (term.op.matrix() * v);
}

void TimeDependentHamiltonian::apply(double t, const DenseMatrix& m, DenseMatrix& out) const {
  out.noalias() = static_.matrix() * m;
  for (const auto& term : terms_) out.noalias() += term.coeff(t) * (term.op.matrix() * m);
}

// ---------------------------------------------------------------------------

namespace {

Operator static_probe(const ProbeParams& p, const HilbertSpec& spec, const CouplingForm& coupling) {
  require_probe_space(spec);
  const Operator a = mode_ladder(spec, 0);
  const Operator ad = a.adjoint();
  const Operator sz = embed(spin_ops().z, Slot::spin(), spec);
  Operator h = p.omega * (ad * a);
  const Operator coupling_op = std::visit(
      Overloaded{[&](const LinearCoupling&) { return sz * (a + ad); },
                 [&](const BeyondLambDicke& ld) {
                   const Operator f = embed(lamb_dicke_factor(ld.eta, spec.mode_dims()[0]), Slot::mode(0), spec);
                   return sz * (ad * f + f * a);
                 }},
      coupling);
  h += p.g * coupling_op;
  if (p.xi != 0.0) {
    const Operator sq = std::polar(p.xi, p.theta) * (ad * ad) + std::polar(p.xi, -p.theta) * (a * a);
    h += sq;
  }
  return Operator(spec, h.matrix(), true);
}

}  // namespace

Operator rabi_hamiltonian(const ProbeParams& p, double t, const HilbertSpec& spec, const CouplingForm& coupling) {
  if (t < 0.0) throw Error(ErrorCode::Domain, "time must be nonnegative");
  Operator h = static_probe(p, spec, coupling);
  h += (0.5 * p.rabi(t)) * embed(spin_ops().x, Slot::spin(), spec);
  return Operator(spec, h.matrix(), true);
}

TimeDependentHamiltonian probe_hamiltonian(const ProbeParams& p, const HilbertSpec& spec,
                                           const CouplingForm& coupling, const PerturbationSpec& pert) {
  TimeDependentHamiltonian h(spec);
  h.add_static(static_probe(p, spec, coupling));
  if (required_modes(pert) > 0) h.add_static(perturbation_hamiltonian(pert, spec));
  const double rabi0 = p.rabi0, tau = p.tau;
  const RampProfile profile = p.profile;
  h.add_term(embed(spin_ops().x, Slot::spin(), spec),
             [rabi0, tau, profile](double t) { return 0.5 * rabi_schedule(rabi0, tau, t, profile); });
  return h;
}

Operator perturbation_hamiltonian(const PerturbationSpec& pert, const HilbertSpec& spec) {
  const int need = required_modes(pert);
  if (spec.num_modes() < need) {
    throw Error(ErrorCode::ModeCountMismatch, "perturbation needs " + std::to_string(need) + " modes, space has " +
                                                  std::to_string(spec.num_modes()));
  }
  const auto hermitian = [&](const Operator& m) { return Operator(spec, m.matrix(), true); };
  return std::visit(
      Overloaded{[&](const NoPerturbation&) { return Operator::zero(spec); },
                 [&](const SingleModePerturbation& s) {
                   if (s.k < 1) throw Error(ErrorCode::Domain, "perturbation order k must be >= 1");
                   const Operator ak = power(mode_ladder(spec, 0), s.k);
                   return hermitian(s.f * (ak + ak.adjoint()));
                 },
                 [&](const TwoModePerturbation& s) {
                   const Operator a = mode_ladder(spec, 0);
                   const Operator b = mode_ladder(spec, 1);
                   const Operator term = a * b.adjoint() * b.adjoint();
                   return hermitian(s.f * (term + term.adjoint()));
                 },
                 [&](const ThreeModePerturbation& s) {
                   const Operator a = mode_ladder(spec, 0);
                   const Operator b = mode_ladder(spec, 1);
                   const Operator c = mode_ladder(spec, 2);
                   const Operator term = a.adjoint() * b * c;
                   return hermitian(s.f * (term + term.adjoint()));
                 }},
      pert);
}

Operator lamb_dicke_factor(double eta, int dim) {
  if (eta < 0.0 || eta >= 1.0) throw Error(ErrorCode::Domain, "Lamb-Dicke parameter must lie in [0, 1)");
  if (dim < 2) throw Error(ErrorCode::InvalidDimension, "lamb_dicke_factor needs dim >= 2");
  const double e2 = eta * eta;
  const double pref = std::exp(-0.5 * e2);
  SparseMatrix m(dim, dim);
  for (int n = 0; n < dim; ++n) m.insert(n, n) = pref * assoc_laguerre(n, 1.0, e2) / (n + 1.0);
  return Operator(HilbertSpec::single_mode(dim), m, true);
}

// ---------------------------------------------------------------------------

TwoStateInputs two_state_inputs(const ProbeParams& p, const PerturbationSpec& pert) {
  p.validate();
  const auto* single = std::get_if<SingleModePerturbation>(&pert);
  if (single == nullptr) {
    throw Error(ErrorCode::UnsupportedSpec, "two_state_inputs handles single-mode perturbations");
  }
  if (std::abs(std::remainder(p.theta - std::numbers::pi, 2.0 * std::numbers::pi)) > 1e-12) {
    throw Error(ErrorCode::UnsupportedSpec, "closed-form matrix element assumes theta = pi");
  }
  TwoStateInputs out;
  out.r = squeeze_amplitude(p.omega, p.xi);
  out.beta = displacement_amplitude(p.omega, p.xi, p.g);
  out.alpha = alpha_single_mode(single->k, single->f, out.beta, out.r);

  const int dim = default_mode_dim(out.beta, out.r) + 4 * single->k;
  const Operator s = squeeze_operator(out.r, 0.0, dim);
  const LadderOps lad = ladder_ops(dim);
  const Operator ak = power(lad.annihilation, single->k);
  const Operator hp = single->f * (ak + ak.adjoint());
  const auto matrix_element = [&](double beta) {
    const StateVector psi = s.apply(displace_operator(beta, dim).apply(fock_state(dim, 0)));
    return psi.dot(hp.apply(psi)).real();
  };
  out.alpha_numeric = matrix_element(out.beta);
  out.alpha_physical = matrix_element(-out.beta);
  if (std::abs(out.alpha - out.alpha_numeric) > 1e-6 * std::max(std::abs(out.alpha), 1.0)) {
    throw Error(ErrorCode::Reconciliation, "closed-form alpha " + std::to_string(out.alpha) +
                                               " vs matrix element " + std::to_string(out.alpha_numeric));
  }
  const double rabi0 = p.rabi0, tau = p.tau, supp = std::exp(-2.0 * out.beta * out.beta);
  const RampProfile profile = p.profile;
  out.gap0 = [=](double t) { return rabi_schedule(rabi0, tau, t, profile) * supp; };
  return out;
}

}  // namespace arsim
