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

#include "arsim/error.hpp"

namespace arsim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid-dimension";
    case ErrorCode::SlotOutOfRange: return "slot-out-of-range";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::SpecMismatch: return "spec-mismatch";
    case ErrorCode::NotHermitian: return "not-hermitian";
    case ErrorCode::InvalidState: return "invalid-state";
    case ErrorCode::UnsupportedSpec: return "unsupported-spec";
    case ErrorCode::Leakage: return "leakage";
    case ErrorCode::Pole: return "pole";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::ModeCountMismatch: return "mode-count-mismatch";
    case ErrorCode::Reconciliation: return "reconciliation-failure";
    case ErrorCode::Eigensolver: return "eigensolver-failure";
    case ErrorCode::ToleranceNotMet: return "tolerance-not-met";
    case ErrorCode::PositivityViolation: return "positivity-violation";
    case ErrorCode::CutoffInsufficient: return "cutoff-insufficient";
    case ErrorCode::GaugeFixing: return "gauge-fixing-failure";
    case ErrorCode::DerivativeUnresolved: return "derivative-unresolved";
    case ErrorCode::InsufficientPoints: return "insufficient-points";
    case ErrorCode::ZeroOccupation: return "zero-occupation";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace arsim
