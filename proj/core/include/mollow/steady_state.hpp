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

#include <string>
#include <vector>

#include "mollow/operators.hpp"

namespace mollow {

struct DensityMatrix {
    DenseMatrix matrix;
    SpaceLayout layout{{2}};

    Complex expectation(const ComplexMatrix& op) const;
};

enum class SolverPath { Auto, Direct, Iterative };

struct SteadyStateOptions {
    SolverPath path = SolverPath::Auto;
    /// Largest generator (rows) handled by sparse LU before switching to GMRES.
    Index direct_max_rows = 16384;
    /// Optional diagonal similarity applied to the vectorized system before
    /// solving; see excitation_balance(). Empty means no balancing.
    std::vector<double> balance;
    /// Refinement sweeps after the direct solve (residuals in extended precision).
    int refinement_steps = 2;
    double iterative_tolerance = 1e-14;
    int iterative_max_iterations = 20000;
    int iterative_restart = 60;
};

struct SteadyStateSolution {
    DensityMatrix rho;
    /// Correction applied by the final refinement sweep; its size bounds the
    /// remaining error of any linear functional of rho. Zero on the GMRES path.
    DenseMatrix last_correction;
};

/// Stationary state. The population row of the emitter-ground/sensor-vacuum
/// state is replaced by the trace constraint and the system is factorized.
DensityMatrix solve_steady_state(const Liouvillian& liouvillian, const SteadyStateOptions& options = {});

SteadyStateSolution solve_steady_state_detailed(const Liouvillian& liouvillian,
                                                const SteadyStateOptions& options = {});

/// Weights scale^(n_i + n_j) for vector index (i, j), where n_i counts the
/// total sensor excitation of basis state i. Used with scale = epsilon this
/// makes every block of the perturbative steady state order one.
std::vector<double> excitation_balance(const SpaceLayout& layout, double scale);

/// Total sensor excitation (sum of occupations of slots 1..N) of a basis state.
Index sensor_excitation(const SpaceLayout& layout, Index state);

struct ValidationTolerances {
    double hermiticity = 1e-10;
    double trace = 1e-10;
    double min_eigenvalue = -1e-8;
    double residual = 1e-10;  ///< relative to the generator's infinity norm
};

struct ValidationReport {
    double hermiticity_defect = 0.0;
    double trace_defect = 0.0;
    double min_eigenvalue = 0.0;
    double residual = 0.0;  ///< ||L vec(rho)||_inf / ||L||_inf, NaN when no generator was given
    bool hermitian = false;
    bool unit_trace = false;
    bool positive = false;
    bool stationary = false;

    bool ok() const { return hermitian && unit_trace && positive && stationary; }
    std::string summary() const;
};

/// Reports defects only; never modifies the state.
ValidationReport validate_density_matrix(const DensityMatrix& rho,
                                         const Liouvillian* liouvillian = nullptr,
                                         const ValidationTolerances& tolerances = {});

double trace_distance(const DenseMatrix& a, const DenseMatrix& b);

/// Second-smallest singular value of the generator, i.e. the residual of the
/// best null-vector candidate orthogonal to the first. Dense; small systems only.
double second_null_residual(const Liouvillian& liouvillian);

double infinity_norm(const SparseMatrix& m);

}  // namespace mollow
