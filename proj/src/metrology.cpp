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

#include "arsim/metrology.hpp"

#include <cmath>
#include <future>
#include <string>

namespace arsim {

std::array<double, 3> bloch(const QuantumState& state) {
  const HilbertSpec& spec = state.spec();
  if (!spec.has_spin()) throw Error(ErrorCode::SpecMismatch, "bloch needs a spin factor");
  const int half = spec.dim() / 2;
  if (state.is_pure()) {
    const StateVector& v = state.vector();
    const cplx ov = v.head(half).dot(v.tail(half));
    return {2.0 * ov.real(), 2.0 * ov.imag(), v.head(half).squaredNorm() - v.tail(half).squaredNorm()};
  }
  const DenseMatrix& rho = state.matrix();
  const cplx ud = rho.topRightCorner(half, half).trace();
  return {2.0 * ud.real(), -2.0 * ud.imag(),
          rho.topLeftCorner(half, half).trace().real() - rho.bottomRightCorner(half, half).trace().real()};
}

BatchEvaluator make_evaluator(int workers) {
  return [workers](const std::function<double(double)>& fn, const std::vector<double>& xs) {
    std::vector<double> out(xs.size());
    if (workers <= 1) {
      for (size_t i = 0; i < xs.size(); ++i) out[i] = fn(xs[i]);
      return out;
    }
    for (size_t start = 0; start < xs.size(); start += workers) {
      std::vector<std::future<double>> futs;
      const size_t stop = std::min(xs.size(), start + static_cast<size_t>(workers));
      for (size_t i = start; i < stop; ++i) futs.push_back(std::async(std::launch::async, fn, xs[i]));
      for (size_t i = start; i < stop; ++i) out[i] = futs[i - start].get();
    }
    return out;
  };
}

ErrorPropagationResult error_propagation(const std::function<double(double)>& signal_fn, double lambda0, double h,
                                         const ErrorPropagationOptions& opts) {
  if (!(h > 0.0)) throw Error(ErrorCode::Domain, "finite-difference step must be positive");
  const BatchEvaluator eval = opts.evaluator ? opts.evaluator : make_evaluator(1);
  const std::vector<double> xs = {lambda0, lambda0 - h, lambda0 + h, lambda0 - 0.5 * h, lambda0 + 0.5 * h};
  const std::vector<double> s = eval(signal_fn, xs);

  const double diff_h = s[2] - s[1];
  const double diff_half = s[4] - s[3];
  const double floor = 10.0 * opts.noise_floor;
  if (std::abs(diff_h) < floor || std::abs(diff_half) < floor) {
    throw Error(ErrorCode::DerivativeUnresolved, "signal change " + std::to_string(diff_half) +
                                                     " is below ten times the noise floor");
  }
  ErrorPropagationResult out;
  out.signal = s[0];
  out.derivative_h = diff_h / (2.0 * h);
  out.derivative_half = diff_half / h;
  const double gap = std::abs(out.derivative_h - out.derivative_half);
  if (gap > opts.richardson_tolerance * std::abs(out.derivative_half)) {
    throw Error(ErrorCode::DerivativeUnresolved,
                "derivative at h and h/2 differ by " + std::to_string(gap / std::abs(out.derivative_half)));
  }
  out.derivative = (4.0 * out.derivative_half - out.derivative_h) / 3.0;
  const double var = std::max(0.0, 1.0 - out.signal * out.signal);
  out.delta = std::sqrt(var) / std::abs(out.derivative);
  return out;
}

double qfi_numeric(const std::function<QuantumState(double)>& state_fn, double lambda0, double h,
                   const QfiNumericOptions& opts) {
  if (!(h > 0.0)) throw Error(ErrorCode::Domain, "finite-difference step must be positive");
  const auto pure = [&](double x) {
    const QuantumState s = state_fn(x);
    if (!s.is_pure()) throw Error(ErrorCode::InvalidState, "qfi_numeric needs pure states");
    return s.vector();
  };
  const StateVector psi = pure(lambda0);
  const auto aligned = [&](double x) {
    StateVector v = pure(x);
    if (v.size() != psi.size()) throw Error(ErrorCode::DimensionMismatch, "state family changes dimension");
    const cplx ov = psi.dot(v);
    if (std::abs(ov) > 0.0) v *= std::conj(ov) / std::abs(ov);
    return v;
  };
  const auto fisher = [&](double step) {
    const StateVector d = (aligned(lambda0 + step) - aligned(lambda0 - step)) / (2.0 * step);
    const double f = 4.0 * (d.squaredNorm() - std::norm(psi.dot(d)));
    return std::max(f, 0.0);
  };
  const double fh = fisher(h);
  const double fhalf = fisher(0.5 * h);
  if (std::max(fh, fhalf) < opts.zero_floor) return 0.0;
  if (std::abs(fh - fhalf) > opts.richardson_tolerance * fhalf) {
    throw Error(ErrorCode::DerivativeUnresolved,
                "QFI at h and h/2 differ by " + std::to_string(std::abs(fh - fhalf) / fhalf));
  }
  return (4.0 * fhalf - fh) / 3.0;
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw Error(ErrorCode::InsufficientPoints, "scaling fit needs at least 4 points");
  std::vector<double> lx, ly;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw Error(ErrorCode::Domain, "scaling fit needs positive values");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InsufficientPoints, "scaling fit needs distinct abscissae");
  ScalingFit fit;
  fit.points = points;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [x, y] : points) {
    fit.residual = std::max(fit.residual, std::abs(std::log(y) - fit.intercept - fit.slope * std::log(x)));
  }
  return fit;
}

}  // namespace arsim
