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
#include <span>
#include <string>
#include <vector>

#include "mollow/correlators.hpp"

namespace mollow {

/// Hyperplane sum_mu c_mu * omega_mu = delta, delta in {-omega_plus, 0, +omega_plus}.
struct LeapfrogCondition {
    std::vector<int> coefficients;  ///< one per group, 0 <= c_mu <= n_mu
    int branch = 0;                 ///< -1, 0 or +1
    double delta = 0.0;             ///< branch * omega_plus

    int order() const;
    double residual(std::span<const double> frequencies) const;
    bool contains(std::span<const double> frequencies, double tolerance) const;
    /// e.g. "2w1+w2=+W"
    std::string label() const;
};

/// The all-photon condition sum n_mu omega_mu = delta, followed by every
/// sub-cascade: each proper sub-multiset of the photons with at least two
/// photons drawn from at least two groups. Each for the three branches.
std::vector<LeapfrogCondition> enumerate_conditions(std::span<const int> partition, double omega_plus);

struct OverlayLine {
    LeapfrogCondition condition;
    std::vector<std::array<double, 2>> points;  ///< grid coordinates; one point on 1-axis grids
    bool skipped = false;
    std::string note;
};

struct Overlay {
    std::vector<OverlayLine> lines;
};

/// Traces each condition in the coordinates of `grid`, whose axes sweep the
/// plane `plane` (for one-axis grids the v direction is ignored). Lines are
/// clipped to the axis ranges; conditions that do not depend on the free axes,
/// or miss the grid, are kept as skipped entries with a note.
Overlay annotate(const ResultGrid& grid, const PlaneSpec& plane, std::span<const LeapfrogCondition> conditions);

/// Distance of the closest partial photon-energy sum to {-omega_plus, 0, +omega_plus}.
/// Partial sums run over every nonempty proper sub-multiset of the photons.
double exclusion_distance(std::span<const int> partition, std::span<const double> frequencies, double omega_plus);

struct FilterRecommendation {
    std::vector<double> frequencies;
    LeapfrogCondition condition;
    double margin = 0.0;            ///< achieved exclusion distance in units of linewidth
    double requested_margin = 0.0;  ///< in units of linewidth
    std::string rationale;
};

struct RecommendOptions {
    /// Every frequency stays inside [-band, band] * omega_plus.
    double band = 1.0;
};

/// Frequencies on the all-photon condition with branch `branch` that keep every
/// partial sum as far as possible from a real transition. Ties go to the most
/// nearly equal frequencies. Throws FeasibilityError (with the best achievable
/// margin) when that distance is below margin * linewidth.
FilterRecommendation recommend_filters(std::span<const int> partition, int branch, double omega_plus,
                                       double margin, double linewidth, const RecommendOptions& options = {});

}  // namespace mollow
