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

#pragma once

#include <array>
#include <vector>

#include "mollow/operators.hpp"

namespace mollow {

/// Driven two-level emitter in the laser rotating frame; all rates and
/// frequencies are in units of the emitter decay rate unless `gamma` != 1.
struct SystemParams {
    double detuning = 0.0;  ///< emitter minus laser frequency
    double rabi = 0.0;      ///< coherent drive amplitude
    double gamma = 1.0;     ///< emitter decay rate

    void validate() const;
};

/// One filter mode. `truncation` of 0 means bundle_order + 1.
struct SensorSpec {
    double frequency = 0.0;  ///< sensor minus laser frequency
    double linewidth = 1.0;
    int bundle_order = 1;
    Index truncation = 0;

    Index dimension() const { return truncation > 0 ? truncation : bundle_order + 1; }
    void validate() const;
};

struct ModelOptions {
    Index max_total_dim = 4096;
};

/// Emitter plus sensors, assembled once and then read-only.
struct CompositeModel {
    SystemParams params;
    std::vector<SensorSpec> sensors;
    double epsilon = 0.0;
    SpaceLayout layout{{2}};
    ComplexMatrix hamiltonian;
    std::vector<Dissipator> dissipators;
    ComplexMatrix sigma;
    std::vector<ComplexMatrix> xi;

    Liouvillian liouvillian() const;
    Liouvillian liouvillian(Storage assembly) const;
};

CompositeModel build_model(const SystemParams& params,
                           const std::vector<SensorSpec>& sensors,
                           double epsilon,
                           const ModelOptions& options = {});

/// 0.05 * sqrt(gamma * smallest linewidth): the starting sensor coupling.
double default_epsilon(double gamma, double min_linewidth);

enum class SplittingFormula {
    Corrected,  ///< 9 gamma^4 under the inner root (dimensionally consistent)
    AsPrinted,  ///< 9 gamma under the inner root, kept for comparison
};

struct DressedInfo {
    double omega0 = 0.0;      ///< sqrt(4 rabi^2 + detuning^2)
    double omega_plus = 0.0;  ///< triplet splitting
    std::array<double, 3> peaks{};  ///< {-omega_plus, 0, +omega_plus}
};

/// Triplet splitting of the dressed emitter. Throws RegimeError when either
/// discriminant is negative (no resolved triplet).
DressedInfo dressed_splitting(const SystemParams& params,
                              SplittingFormula formula = SplittingFormula::Corrected);

/// Drive amplitude that produces `target_splitting` at the given detuning.
double drive_for_target_splitting(double target_splitting, double detuning, double gamma = 1.0);

}  // namespace mollow
