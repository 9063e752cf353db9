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
#include <optional>
#include <span>
#include <vector>

#include "mollow/propagation.hpp"
#include "mollow/result_grid.hpp"
#include "mollow/steady_state.hpp"
#include "mollow/system_model.hpp"

namespace mollow {

/// How a group's moment is normalized in the denominator.
enum class Normalization {
    Bundle,  ///< <xi^dag^n xi^n> per group
    Photon,  ///< <xi^dag xi>^n per group (ordinary N-th order autocorrelation)
};

/// Photons grouped over sensors: group mu collects partition[mu] photons at
/// frequencies[mu] through one sensor of linewidth linewidths[mu].
struct CorrelationRequest {
    std::vector<int> partition;
    std::vector<double> frequencies;
    std::vector<double> linewidths;
    std::vector<double> tau;  ///< empty for zero delay; strictly increasing otherwise
    std::optional<double> epsilon;
    Normalization normalization = Normalization::Bundle;

    void validate() const;
    /// One sensor per group with truncation partition[mu] + 1 + extra_levels.
    std::vector<SensorSpec> sensors(int extra_levels = 0) const;
    double min_linewidth() const;
};

struct EpsilonPolicy {
    double tolerance = 0.005;  ///< accepted relative change between epsilon and epsilon/2
    int max_doublings = 6;     ///< retries with a larger coupling when moments are unresolved
    int max_halvings = 3;      ///< retries with a smaller coupling when the halving test fails
    /// Largest accepted estimated relative error of a moment. The estimate is
    /// the size of the last extended-precision refinement correction.
    double noise_floor = 1e-9;
    double imaginary_tolerance = 1e-10;  ///< relative imaginary part tolerated in a moment
    bool check_truncation = false;       ///< also evaluate with one more sensor level
    /// Check every stationary state (hermiticity, trace, positivity, residual)
    /// and fail the point with SolverError when a check does not hold.
    bool validate_state = true;
    ValidationTolerances state_tolerances;
    ModelOptions model;
    SteadyStateOptions solver;
};

/// Outcome of the coupling protocol for one value.
struct Verdict {
    double epsilon = 0.0;         ///< coupling of the reported (finer) evaluation
    double value_coarse = 0.0;    ///< value at 2 * epsilon
    double value_fine = 0.0;      ///< value at epsilon (reported)
    double relative_change = 0.0;
    int doublings = 0;
    int halvings = 0;
    bool converged = false;
    std::optional<double> truncation_change;  ///< set when check_truncation was requested
};

struct CorrelationValue {
    double value = 0.0;
    PointFlag flag = PointFlag::Ok;
    Verdict verdict;
};

struct MomentTable {
    double joint = 0.0;                ///< <: prod_mu xi_mu^dag^n xi_mu^n :>
    std::vector<double> normalizers;   ///< per-group denominator factors
    double worst_relative_error = 0.0; ///< from the refinement correction
    bool zero_denominator = false;

    double ratio() const;
};

/// Moments of the sensor groups in a stationary state. Throws PrecisionError
/// when a moment is negative, has a sizable imaginary part, or (when the
/// correction is available) is not resolved to `policy.noise_floor`.
MomentTable sensor_moments(const CompositeModel& model,
                           const SteadyStateSolution& state,
                           std::span<const int> partition,
                           Normalization normalization,
                           const EpsilonPolicy& policy = {});

/// Zero-delay correlator under the coupling protocol. A vanishing denominator
/// yields NaN with PointFlag::ZeroDenominator; protocol failures throw
/// PrecisionError or ConvergenceError.
CorrelationValue g_zero_delay(const SystemParams& params,
                              const CorrelationRequest& request,
                              const EpsilonPolicy& policy = {});

/// Same, but returns NaN with a flag for every per-point failure instead of throwing.
CorrelationValue g_zero_delay_flagged(const SystemParams& params,
                                      const CorrelationRequest& request,
                                      const EpsilonPolicy& policy = {});

/// Time-resolved correlation between two groups (request.partition.size() == 2).
/// For tau >= 0 group 0 is detected first; negative tau exchanges the groups.
ResultGrid g_tau(const SystemParams& params,
                 const CorrelationRequest& request,
                 const EpsilonPolicy& policy = {},
                 const PropagationOptions& propagation = {});

/// Filtered emission spectrum from a single one-photon sensor, normalized to
/// unit sum over the grid.
ResultGrid spectrum_scan(const SystemParams& params, double linewidth, std::span<const double> grid,
                         const EpsilonPolicy& policy = {}, int workers = 1);

/// Unnormalized filtered spectrum (sensor population per coupling squared) at
/// one frequency under the coupling protocol; failures come back flagged.
CorrelationValue spectrum_point(const SystemParams& params, double linewidth, double frequency,
                                const EpsilonPolicy& policy = {}, std::optional<double> epsilon = {});

/// Divides every Ok value by the sum of the Ok values, summed in index order.
void normalize_to_unit_sum(ResultGrid& grid);

/// Stores flag counts, the coupling range and the worst halving change in
/// metadata["verdict"].
void summarize_verdicts(ResultGrid& grid);

/// Writes one evaluated point into a grid (NaN plus flag on failure).
void store(ResultGrid& grid, std::size_t flat, const CorrelationValue& value);

struct OracleOptions {
    double window = 0.0;  ///< integration window in time; 0 picks one from the decay rates
    double step = 0.0;    ///< quadrature step; 0 picks one from the fastest frequency
    double decay_threshold = 1e-6;
};

/// Independent spectrum: two-time function of the bare emitter, damped by the
/// filter response, Fourier transformed by quadrature; same normalization as
/// spectrum_scan. Throws OracleError when the window is too short.
ResultGrid wk_spectrum_oracle(const SystemParams& params, double linewidth, std::span<const double> grid,
                              const OracleOptions& options = {});

/// N-th order frequency-resolved autocorrelation <xi^dag^N xi^N> / <xi^dag xi>^N.
ResultGrid autocorrelation_scan(const SystemParams& params, int order, double linewidth,
                                std::span<const double> grid, const EpsilonPolicy& policy = {}, int workers = 1);

/// Affine plane through frequency space: frequency[mu] = origin[mu] + u_dir[mu] u + v_dir[mu] v.
struct PlaneSpec {
    std::vector<double> origin;
    std::vector<double> u_dir;
    std::vector<double> v_dir;

    /// Plane where groups `first` and `second` follow u and v, others stay at `fixed`.
    static PlaneSpec free_pair(std::size_t groups, std::size_t first, std::size_t second,
                               std::span<const double> fixed);
    std::vector<double> frequencies(double u, double v) const;
};

/// Zero-delay correlator over a plane; per-point failures become flagged NaN.
ResultGrid plane_map(const SystemParams& params, const CorrelationRequest& request, const PlaneSpec& plane,
                     Axis u_axis, Axis v_axis, const EpsilonPolicy& policy = {}, int workers = 1);

/// Two free group frequencies over grid1 x grid2; the remaining groups keep
/// their frequency from the request.
ResultGrid map2d(const SystemParams& params, const CorrelationRequest& request,
                 std::array<std::size_t, 2> free_groups, std::span<const double> grid1,
                 std::span<const double> grid2, const EpsilonPolicy& policy = {}, int workers = 1);

/// Planar slice of the three-photon correlator; `request.partition` must have three groups.
ResultGrid cut3d(const SystemParams& params, const CorrelationRequest& request, const PlaneSpec& plane,
                 std::span<const double> u_grid, std::span<const double> v_grid,
                 const EpsilonPolicy& policy = {}, int workers = 1);

/// Parameter echo shared by every result: system, epsilon policy, code version.
nlohmann::json describe(const SystemParams& params);
nlohmann::json describe(const CorrelationRequest& request);
nlohmann::json describe(const EpsilonPolicy& policy);

/// Library version string.
const char* version();

}  // namespace mollow
