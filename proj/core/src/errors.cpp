// Copyright 2026 The Mollow Sensors Authors
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

#include "mollow/errors.hpp"

namespace mollow {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidDimension: return "invalid-dimension";
        case ErrorKind::Layout: return "layout";
        case ErrorKind::Model: return "model";
        case ErrorKind::Parameter: return "parameter";
        case ErrorKind::Capacity: return "capacity";
        case ErrorKind::Regime: return "regime";
        case ErrorKind::Degeneracy: return "degeneracy";
        case ErrorKind::Solver: return "solver";
        case ErrorKind::Precision: return "precision";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Propagation: return "propagation";
        case ErrorKind::Oracle: return "oracle";
        case ErrorKind::Feasibility: return "feasibility";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
        case ErrorKind::Integrity: return "integrity";
    }
    return "unknown";
}

}  // namespace mollow
