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

#include "mollow/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "mollow/errors.hpp"
#include "mollow/steady_state.hpp"

namespace mollow {

namespace odeint = boost::numeric::odeint;

std::vector<double> level_scale(const SpaceLayout& layout, const ComplexVector& state, double floor) {
    const Index dim = layout.total_dim();
    if (state.size() != dim * dim) throw LayoutError("state length does not match layout");
    std::vector<Index> level(static_cast<std::size_t>(dim));
    for (Index i = 0; i < dim; ++i) level[i] = sensor_excitation(layout, i);

    std::map<Index, double> peak;
    double overall = 0.0;
    for (Index j = 0; j < dim; ++j) {
        for (Index i = 0; i < dim; ++i) {
            const double a = std::abs(state(j * dim + i));
            double& p = peak[level[i] + level[j]];
            p = std::max(p, a);
            overall = std::max(overall, a);
        }
    }
    // Levels empty in `state` get the smallest populated scale.
    const double lowest = std::max(floor * overall, std::numeric_limits<double>::min());
    double smallest = overall;
    for (const auto& [lvl, p] : peak)
        if (p > lowest) smallest = std::min(smallest, p);
    smallest = std::max(smallest, lowest);
    std::vector<double> s(static_cast<std::size_t>(dim * dim));
    for (Index j = 0; j < dim; ++j) {
        for (Index i = 0; i < dim; ++i) {
            const double p = peak[level[i] + level[j]];
            s[j * dim + i] = p > lowest ? p : smallest;
        }
    }
    return s;
}

namespace {

void check_times(std::span<const double> times) {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0) || !std::isfinite(times[k])) throw PropagationError("propagation times must be finite and >= 0");
        if (k > 0 && times[k] < times[k - 1]) throw PropagationError("propagation times must be nondecreasing");
    }
}

std::vector<ComplexVector> by_exponential(const SparseMatrix& gen, const ComplexVector& x0, std::span<const double> times) {
    const DenseMatrix dense(gen);
    std::vector<ComplexVector> out;
    out.reserve(times.size());
    std::map<double, DenseMatrix> steps;
    ComplexVector x = x0;
    double t = 0.0;
    for (double target : times) {
        const double dt = target - t;
        if (dt > 0.0) {
            auto it = steps.find(dt);
            if (it == steps.end()) it = steps.emplace(dt, DenseMatrix((dense * Complex(dt)).exp())).first;
            x = it->second * x;
            t = target;
        }
        out.push_back(x);
    }
    return out;
}

using State = std::vector<Complex>;

std::vector<ComplexVector> by_runge_kutta(const SparseMatrix& gen, const ComplexVector& x0,
                                          std::span<const double> times, const PropagationOptions& o) {
    auto rhs = [&gen](const State& x, State& dxdt, double /*t*/) {
        Eigen::Map<const ComplexVector> xv(x.data(), static_cast<Index>(x.size()));
        Eigen::Map<ComplexVector> dv(dxdt.data(), static_cast<Index>(dxdt.size()));
        dv.noalias() = gen * xv;
    };

    std::vector<ComplexVector> out;
    out.reserve(times.size());
    std::vector<double> grid(times.begin(), times.end());
    std::size_t skip = 0;
    while (skip < grid.size() && grid[skip] == 0.0) {
        out.push_back(x0);
        ++skip;
    }
    if (skip == grid.size()) return out;

    State x(x0.data(), x0.data() + x0.size());
    std::vector<double> sample{0.0};
    sample.insert(sample.end(), grid.begin() + static_cast<std::ptrdiff_t>(skip), grid.end());

    // Initial step from the fastest rate in the generator.
    double fastest = 0.0;
    for (Index k = 0; k < gen.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(gen, k); it; ++it)
            if (it.row() == it.col()) fastest = std::max(fastest, std::abs(it.value()));
    const double dt0 = fastest > 0.0 ? 0.01 / fastest : 1e-3;

    auto stepper = odeint::make_dense_output(o.absolute_tolerance, o.relative_tolerance,
                                             odeint::runge_kutta_dopri5<State>());
    bool first = true;
    try {
        odeint::integrate_times(
            stepper, rhs, x, sample.begin(), sample.end(), dt0,
            [&](const State& s, double) {
                if (first) {
                    first = false;
                    return;
                }
                out.emplace_back(Eigen::Map<const ComplexVector>(s.data(), static_cast<Index>(s.size())));
            },
            odeint::max_step_checker(o.max_steps));
    } catch (const std::exception& e) {
        throw PropagationError(std::string("adaptive integration failed: ") + e.what());
    }
    return out;
}

}  // namespace

std::vector<ComplexVector> propagate(const Liouvillian& liouvillian,
                                     const ComplexVector& initial,
                                     std::span<const double> times,
                                     const PropagationOptions& options) {
    const Index n = liouvillian.dim();
    if (initial.size() != n) throw LayoutError("initial state length does not match generator");
    check_times(times);
    const auto& s = options.scale;
    if (!s.empty() && static_cast<Index>(s.size()) != n) throw LayoutError("scale vector has wrong length");

    // Work in coordinates y_i = x_i / s_i with generator S^-1 L S.
    SparseMatrix gen = liouvillian.generator;
    ComplexVector y = initial;
    if (!s.empty()) {
        for (Index k = 0; k < gen.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(gen, k); it; ++it) it.valueRef() *= s[it.col()] / s[it.row()];
        for (Index i = 0; i < n; ++i) y(i) /= s[i];
    }

    std::vector<ComplexVector> out;
    if (options.method == PropagationMethod::MatrixExponential) {
        if (liouvillian.layout.total_dim() > options.dense_max_dim) {
            throw PropagationError("dense exponential refused above dimension " + std::to_string(options.dense_max_dim));
        }
        out = by_exponential(gen, y, times);
    } else {
        out = by_runge_kutta(gen, y, times, options);
    }
    if (!s.empty()) {
        for (auto& v : out)
            for (Index i = 0; i < n; ++i) v(i) *= s[i];
    }
    for (const auto& v : out)
        if (!v.allFinite()) throw PropagationError("propagated state is not finite");
    return out;
}

}  // namespace mollow
