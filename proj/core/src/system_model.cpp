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

#include "mollow/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "mollow/errors.hpp"

namespace mollow {

void SystemParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
    if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw ParameterError("rabi amplitude must be nonnegative");
    if (!std::isfinite(detuning)) throw ParameterError("detuning must be finite");
}

void SensorSpec::validate() const {
    if (!(linewidth > 0.0) || !std::isfinite(linewidth)) throw ParameterError("sensor linewidth must be positive");
    if (!std::isfinite(frequency)) throw ParameterError("sensor frequency must be finite");
    if (bundle_order < 1) throw ParameterError("bundle order must be >= 1");
    if (truncation != 0 && truncation < bundle_order + 1) {
        throw ParameterError("sensor truncation must be >= bundle_order + 1");
    }
}

Liouvillian CompositeModel::liouvillian() const {
    return build_liouvillian(hamiltonian, dissipators, layout);
}

Liouvillian CompositeModel::liouvillian(Storage assembly) const {
    return build_liouvillian(hamiltonian, dissipators, layout, assembly);
}

CompositeModel build_model(const SystemParams& params,
                           const std::vector<SensorSpec>& sensors,
                           double epsilon,
                           const ModelOptions& options) {
    params.validate();
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ParameterError("sensor coupling epsilon must be positive");

    std::vector<Index> dims{2};
    double total = 2.0;
    for (const auto& s : sensors) {
        s.validate();
        dims.push_back(s.dimension());
        total *= static_cast<double>(s.dimension());
    }
    if (total > static_cast<double>(options.max_total_dim)) {
        throw CapacityError("composite dimension " + std::to_string(static_cast<long long>(total)) +
                            " exceeds the cap of " + std::to_string(options.max_total_dim) +
                            "; lower the sensor truncations or the number of sensors");
    }

    CompositeModel model;
    model.params = params;
    model.sensors = sensors;
    model.epsilon = epsilon;
    model.layout = SpaceLayout(dims);

    const Index dim = model.layout.total_dim();
    const Storage storage = storage_for_dimension(dim);
    model.sigma = lift(annihilation_op(2), 0, model.layout);
    const ComplexMatrix sigma_dag = model.sigma.adjoint();

    ComplexMatrix h = Complex(params.detuning) * (sigma_dag * model.sigma) +
                      Complex(params.rabi) * (sigma_dag + model.sigma);
    model.dissipators.push_back({params.gamma, model.sigma});

    for (std::size_t k = 0; k < sensors.size(); ++k) {
        ComplexMatrix xi = lift(annihilation_op(sensors[k].dimension()), static_cast<Index>(k + 1), model.layout);
        const ComplexMatrix xi_dag = xi.adjoint();
        h = h + Complex(sensors[k].frequency) * (xi_dag * xi) +
            Complex(epsilon) * (sigma_dag * xi + xi_dag * model.sigma);
        model.dissipators.push_back({sensors[k].linewidth, xi});
        model.xi.push_back(std::move(xi));
    }
    model.hamiltonian = h.with_storage(storage);
    return model;
}

double default_epsilon(double gamma, double min_linewidth) {
    return 0.05 * std::sqrt(gamma * min_linewidth);
}

namespace {

std::optional<DressedInfo> try_splitting(const SystemParams& p, SplittingFormula formula) {
    const double g = p.gamma;
    const double g2 = g * g;
    const double o02 = 4.0 * p.rabi * p.rabi + p.detuning * p.detuning;
    const double constant = formula == SplittingFormula::Corrected ? 9.0 * g2 * g2 : 9.0 * g;
    const double inner = constant + 16.0 * o02 * o02 - 24.0 * g2 * (16.0 * p.rabi * p.rabi + o02);
    if (inner < 0.0) return std::nullopt;
    const double outer = 8.0 * o02 - 6.0 * g2 + std::sqrt(inner);
    if (outer < 0.0) return std::nullopt;
    DressedInfo info;
    info.omega0 = std::sqrt(o02);
    info.omega_plus = std::sqrt(outer) / (2.0 * std::sqrt(3.0));
    info.peaks = {-info.omega_plus, 0.0, info.omega_plus};
    return info;
}

}  // namespace

DressedInfo dressed_splitting(const SystemParams& params, SplittingFormula formula) {
    params.validate();
    auto info = try_splitting(params, formula);
    if (!info) {
        throw RegimeError("no resolved triplet: negative discriminant at rabi=" + std::to_string(params.rabi) +
                          ", detuning=" + std::to_string(params.detuning));
    }
    return *info;
}

double drive_for_target_splitting(double target_splitting, double detuning, double gamma) {
    if (!(target_splitting > 0.0) || !std::isfinite(target_splitting)) {
        throw ParameterError("target splitting must be positive");
    }
    if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");

    // Splitting below target (or undefined) is negative; the splitting grows monotonically with drive.
    auto residual = [&](double rabi) {
        SystemParams p{detuning, rabi, gamma};
        auto info = try_splitting(p, SplittingFormula::Corrected);
        return info ? info->omega_plus - target_splitting : -target_splitting;
    };

    const double guess = 0.5 * std::sqrt(std::max(target_splitting * target_splitting - detuning * detuning, 0.0));
    double hi = std::max(guess, gamma);
    int expand = 0;
    while (residual(hi) <= 0.0) {
        hi *= 2.0;
        if (++expand > 60) throw ParameterError("no drive amplitude reaches the target splitting");
    }
    double lo = 0.0;
    if (residual(lo) >= 0.0) {
        throw ParameterError("target splitting " + std::to_string(target_splitting) +
                             " is below the undriven splitting at this detuning");
    }

    std::uintmax_t iterations = 200;
    auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, boost::math::tools::eps_tolerance<double>(50),
                                                    iterations);
    const double rabi = 0.5 * (a + b);
    if (std::abs(residual(rabi)) > 1e-9 * target_splitting) {
        throw ParameterError("root finding did not reach the target splitting");
    }
    return rabi;
}

}  // namespace mollow
