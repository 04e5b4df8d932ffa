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

// Estimation layer: Bloch vectors, error propagation of a spin signal,
// numerical quantum Fisher information and power-law fits.

#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "arsim/fockspace.hpp"

namespace arsim {

// Reduced-spin expectations (<sigma_x>, <sigma_y>, <sigma_z>).
std::array<double, 3> bloch(const QuantumState& state);

// Runs independent evaluations fn(x_i), possibly concurrently; results come
// back in input order.
using BatchEvaluator =
    std::function<std::vector<double>(const std::function<double(double)>& fn, const std::vector<double>& xs)>;

// Sequential evaluation, or one thread per point up to `workers`.
BatchEvaluator make_evaluator(int workers);

struct ErrorPropagationOptions {
  // Absolute noise level of the signal (e.g. the integrator tolerance).
  double noise_floor = 1e-12;
  double richardson_tolerance = 0.01;
  BatchEvaluator evaluator;  // empty: sequential
};

struct ErrorPropagationResult {
  double delta = 0.0;       // sqrt(1 - s^2)/|ds/dlambda|
  double signal = 0.0;      // s(lambda0)
  double derivative = 0.0;  // Richardson-extrapolated
  double derivative_h = 0.0;
  double derivative_half = 0.0;
};

// Central differences at h and h/2; throws DerivativeUnresolved when the
// two disagree by more than the Richardson tolerance or the signal change
// is below ten times the noise floor.
ErrorPropagationResult error_propagation(const std::function<double(double)>& signal_fn, double lambda0, double h,
                                         const ErrorPropagationOptions& opts = {});

struct QfiNumericOptions {
  double richardson_tolerance = 0.01;
  // Absolute floor below which the QFI is reported as zero without the
  // Richardson check.
  double zero_floor = 1e-10;
};

// 4(<d psi|d psi> - |<psi|d psi>|^2) with the neighbouring states rotated
// so their overlap with psi(lambda0) is real positive.
double qfi_numeric(const std::function<QuantumState(double)>& state_fn, double lambda0, double h,
                   const QfiNumericOptions& opts = {});

struct ScalingFit {
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
  // Largest |ln y - (intercept + slope ln x)|.
  double residual = 0.0;
};

// Least-squares line in (ln x, ln y); needs >= 4 positive points.
ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points);

}  // namespace arsim
