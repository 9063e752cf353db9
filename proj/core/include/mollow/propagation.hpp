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

#include <span>
#include <vector>

#include "mollow/operators.hpp"

namespace mollow {

enum class PropagationMethod {
    RungeKutta,         ///< adaptive Dormand-Prince 5(4) on the vectorized equation
    MatrixExponential,  ///< dense exp(L dt); only below the dense cap
};

struct PropagationOptions {
    PropagationMethod method = PropagationMethod::RungeKutta;
    double relative_tolerance = 1e-9;
    /// Absolute tolerance, applied in the scaled coordinates described by `scale`.
    double absolute_tolerance = 1e-13;
    /// Per-component magnitude scale of the state. Errors in component i are
    /// controlled relative to scale[i], so sparsely populated blocks are
    /// integrated as accurately as the dominant ones. Empty means all ones.
    std::vector<double> scale;
    /// Largest Hilbert-space dimension for which the dense exponential is allowed.
    Index dense_max_dim = 32;
    std::size_t max_steps = 5'000'000;
};

/// exp(L t) x0 for each t in `times` (nonnegative, nondecreasing).
std::vector<ComplexVector> propagate(const Liouvillian& liouvillian,
                                     const ComplexVector& initial,
                                     std::span<const double> times,
                                     const PropagationOptions& options = {});

/// Per-component scale grouped by sensor excitation level: every component
/// whose basis pair has total excitation n_i + n_j gets the largest magnitude
/// `state` has in that group. Groups with nothing above `floor` times the
/// overall maximum get the smallest populated group's scale.
std::vector<double> level_scale(const SpaceLayout& layout, const ComplexVector& state, double floor = 1e-30);

}  // namespace mollow
