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

#include "mollow/correlators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "mollow/errors.hpp"
#include "mollow/parallel.hpp"

namespace mollow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Thrown by point evaluators when a normalizing moment vanishes identically.
struct ZeroDenominator {};

ComplexMatrix power(const ComplexMatrix& op, int n) {
    ComplexMatrix out = ComplexMatrix::identity(op.rows(), op.storage());
    for (int k = 0; k < n; ++k) out = out * op;
    return out;
}

// xi^dag^n xi^n
ComplexMatrix ladder_moment_op(const ComplexMatrix& xi, int n) {
    const ComplexMatrix lower = power(xi, n);
    return lower.adjoint() * lower;
}

// Tr[M X] for X given in column-stacked form.
Complex trace_with(const ComplexMatrix& m, const ComplexVector& x, Index d) {
    Complex acc = 0.0;
    if (m.is_sparse()) {
        const auto& s = m.sparse();
        for (Index k = 0; k < s.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(s, k); it; ++it) acc += it.value() * x(it.row() * d + it.col());
    } else {
        const auto& a = m.dense();
        for (Index j = 0; j < d; ++j)
            for (Index i = 0; i < d; ++i) acc += a(i, j) * x(i * d + j);
    }
    return acc;
}

double checked_real(Complex z, double relative_error, const char* what, const EpsilonPolicy& policy) {
    const double mag = std::abs(z);
    if (mag > 0.0 && std::abs(z.imag()) > policy.imaginary_tolerance * mag) {
        throw PrecisionError(std::string(what) + " has a relative imaginary part above tolerance; increase epsilon");
    }
    if (z.real() < 0.0) throw PrecisionError(std::string(what) + " is negative at the noise floor; increase epsilon");
    if (relative_error > policy.noise_floor) {
        std::ostringstream msg;
        msg << what << " is not resolved (estimated relative error " << relative_error << "); increase epsilon";
        throw PrecisionError(msg.str());
    }
    return z.real();
}

double relative_change(double fine, double coarse) {
    const double scale = std::max(std::abs(fine), std::numeric_limits<double>::min());
    return std::abs(fine - coarse) / scale;
}

struct ProtocolOutcome {
    std::vector<double> values;
    std::vector<double> coarse;
    Verdict verdict;
    std::size_t worst = 0;
};

// Coupling protocol: grow epsilon while moments are unresolved, then accept
// only when halving it changes every value by less than the tolerance.
template <class Eval>
ProtocolOutcome run_protocol(Eval&& evaluate, double eps0, const EpsilonPolicy& policy) {
    ProtocolOutcome out;
    double eps = eps0;
    std::vector<double> coarse;
    for (;;) {
        try {
            coarse = evaluate(eps);
            break;
        } catch (const PrecisionError&) {
            if (out.verdict.doublings >= policy.max_doublings) throw;
            eps *= 2.0;
            ++out.verdict.doublings;
        }
    }
    for (;;) {
        std::vector<double> fine = evaluate(0.5 * eps);
        double change = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < fine.size(); ++i) {
            const double c = relative_change(fine[i], coarse[i]);
            if (c > change || i == 0) {
                change = c;
                worst = i;
            }
        }
        if (change < policy.tolerance) {
            out.verdict.epsilon = 0.5 * eps;
            out.verdict.value_coarse = coarse[worst];
            out.verdict.value_fine = fine[worst];
            out.verdict.relative_change = change;
            out.verdict.converged = true;
            out.values = std::move(fine);
            out.coarse = std::move(coarse);
            out.worst = worst;
            return out;
        }
        if (out.verdict.halvings >= policy.max_halvings) {
            std::ostringstream msg;
            msg << "value changes by " << change * 100.0 << "% when epsilon is halved to " << 0.5 * eps;
            throw ConvergenceError(msg.str(), coarse[worst], fine[worst]);
        }
        coarse = std::move(fine);
        eps *= 0.5;
        ++out.verdict.halvings;
    }
}

double start_epsilon(const SystemParams& params, const CorrelationRequest& request) {
    return request.epsilon ? *request.epsilon : default_epsilon(params.gamma, request.min_linewidth());
}

SteadyStateSolution stationary(const CompositeModel& model, const EpsilonPolicy& policy) {
    const Liouvillian l = model.liouvillian();
    SteadyStateSolution s = solve_steady_state_detailed(l, policy.solver);
    if (policy.validate_state) {
        const ValidationReport r = validate_density_matrix(s.rho, &l, policy.state_tolerances);
        if (!r.ok()) throw SolverError("stationary state failed validation: " + r.summary());
    }
    return s;
}

// One zero-delay evaluation at a fixed coupling.
double zero_delay_at(const SystemParams& params, const CorrelationRequest& request, double eps,
                     const EpsilonPolicy& policy, int extra_levels) {
    const CompositeModel model = build_model(params, request.sensors(extra_levels), eps, policy.model);
    const MomentTable table = sensor_moments(model, stationary(model, policy), request.partition,
                                             request.normalization, policy);
    if (table.zero_denominator) throw ZeroDenominator{};
    return table.ratio();
}

PointFlag flag_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
            case ErrorKind::Precision: return PointFlag::Precision;
            case ErrorKind::Convergence: return PointFlag::Convergence;
            case ErrorKind::Solver:
            case ErrorKind::Degeneracy: return PointFlag::Solver;
            case ErrorKind::Regime: return PointFlag::Regime;
            case ErrorKind::Propagation: return PointFlag::Propagation;
            default: break;
        }
    }
    return PointFlag::Failed;
}

}  // namespace

nlohmann::json describe(const EpsilonPolicy& p) {
    return {{"tolerance", p.tolerance},     {"max_doublings", p.max_doublings},
            {"max_halvings", p.max_halvings}, {"noise_floor", p.noise_floor},
            {"check_truncation", p.check_truncation}, {"validate_state", p.validate_state}};
}

void summarize_verdicts(ResultGrid& grid) {
    double eps_lo = std::numeric_limits<double>::infinity(), eps_hi = 0.0, worst = 0.0;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ++counts[std::string(to_string(grid.flags[i]))];
        if (grid.flags[i] != PointFlag::Ok) continue;
        if (std::isfinite(grid.epsilon[i])) {
            eps_lo = std::min(eps_lo, grid.epsilon[i]);
            eps_hi = std::max(eps_hi, grid.epsilon[i]);
        }
        if (std::isfinite(grid.epsilon_change[i])) worst = std::max(worst, grid.epsilon_change[i]);
    }
    nlohmann::json verdict = {{"flag_counts", counts}, {"max_epsilon_change", worst}};
    if (eps_hi > 0.0) verdict["epsilon_range"] = {eps_lo, eps_hi};
    grid.metadata["verdict"] = verdict;
}

namespace {

ResultGrid start_grid(const char* kind, std::vector<Axis> axes, const SystemParams& params,
                      const EpsilonPolicy& policy) {
    ResultGrid grid = ResultGrid::with_axes(std::move(axes));
    grid.metadata["kind"] = kind;
    grid.metadata["system"] = describe(params);
    grid.metadata["policy"] = describe(policy);
    grid.metadata["version"] = version();
    return grid;
}

}  // namespace

const char* version() { return "0.1.0"; }

void CorrelationRequest::validate() const {
    if (partition.empty()) throw ParameterError("partition must contain at least one group");
    if (frequencies.size() != partition.size() || linewidths.size() != partition.size()) {
        throw ParameterError("partition, frequencies and linewidths must have equal length");
    }
    for (int n : partition)
        if (n < 1) throw ParameterError("every bundle order must be >= 1");
    for (double w : frequencies)
        if (!std::isfinite(w)) throw ParameterError("frequencies must be finite");
    for (double g : linewidths)
        if (!(g > 0.0) || !std::isfinite(g)) throw ParameterError("linewidths must be positive");
    for (std::size_t k = 1; k < tau.size(); ++k)
        if (!(tau[k] > tau[k - 1])) throw ParameterError("tau grid must be strictly increasing");
    if (epsilon && (!(*epsilon > 0.0) || !std::isfinite(*epsilon))) throw ParameterError("epsilon must be positive");
    if (partition.size() == 1 && normalization == Normalization::Bundle) {
        throw ParameterError("a single bundle has no cross-correlation; use photon normalization");
    }
}

std::vector<SensorSpec> CorrelationRequest::sensors(int extra_levels) const {
    std::vector<SensorSpec> out;
    for (std::size_t k = 0; k < partition.size(); ++k) {
        SensorSpec s;
        s.frequency = frequencies[k];
        s.linewidth = linewidths[k];
        s.bundle_order = partition[k];
        s.truncation = partition[k] + 1 + extra_levels;
        out.push_back(s);
    }
    return out;
}

double CorrelationRequest::min_linewidth() const {
    if (linewidths.empty()) throw ParameterError("request has no linewidths");
    return *std::min_element(linewidths.begin(), linewidths.end());
}

double MomentTable::ratio() const {
    double den = 1.0;
    for (double n : normalizers) den *= n;
    return joint / den;
}

MomentTable sensor_moments(const CompositeModel& model,
                           const SteadyStateSolution& state,
                           std::span<const int> partition,
                           Normalization normalization,
                           const EpsilonPolicy& policy) {
    if (partition.size() != model.xi.size()) throw LayoutError("partition does not match the number of sensors");
    for (std::size_t k = 0; k < partition.size(); ++k) {
        if (partition[k] < 1 || partition[k] > model.layout.dim(static_cast<Index>(k + 1)) - 1) {
            throw LayoutError("bundle order exceeds the sensor truncation");
        }
    }
    const DensityMatrix& rho = state.rho;
    const bool have_correction = state.last_correction.size() > 0 && state.last_correction.cwiseAbs().maxCoeff() > 0.0;
    const DensityMatrix correction{state.last_correction, rho.layout};

    auto measure = [&](const ComplexMatrix& op, const char* what) {
        const Complex m = rho.expectation(op);
        const double mag = std::abs(m);
        double rel = 0.0;
        if (have_correction) rel = mag > 0.0 ? std::abs(correction.expectation(op)) / mag : 0.0;
        return std::pair<Complex, double>{m, rel};
    };

    MomentTable table;
    ComplexMatrix joint_op = ComplexMatrix::identity(model.layout.total_dim(), storage_for_dimension(model.layout.total_dim()));
    for (std::size_t k = 0; k < partition.size(); ++k) {
        const ComplexMatrix bundle = ladder_moment_op(model.xi[k], partition[k]);
        joint_op = joint_op * bundle;
        const ComplexMatrix& norm_op = normalization == Normalization::Bundle ? bundle : ladder_moment_op(model.xi[k], 1);
        const auto [m, rel] = measure(norm_op, "sensor normalizer");
        if (m == Complex(0.0)) {
            table.zero_denominator = true;
            table.normalizers.push_back(0.0);
            continue;
        }
        const double v = checked_real(m, rel, "sensor normalizer", policy);
        table.worst_relative_error = std::max(table.worst_relative_error, rel);
        table.normalizers.push_back(normalization == Normalization::Bundle ? v : std::pow(v, partition[k]));
    }
    if (table.zero_denominator) return table;
    const auto [j, rel] = measure(joint_op, "joint moment");
    table.joint = checked_real(j, rel, "joint moment", policy);
    table.worst_relative_error = std::max(table.worst_relative_error, rel);
    return table;
}

CorrelationValue g_zero_delay(const SystemParams& params, const CorrelationRequest& request,
                              const EpsilonPolicy& policy) {
    params.validate();
    request.validate();
    if (!request.tau.empty()) throw ParameterError("zero-delay correlator requested with a tau grid");

    CorrelationValue out;
    if (params.rabi == 0.0) {
        out.value = kNaN;
        out.flag = PointFlag::ZeroDenominator;
        return out;
    }
    try {
        auto eval = [&](double eps) { return std::vector<double>{zero_delay_at(params, request, eps, policy, 0)}; };
        ProtocolOutcome res = run_protocol(eval, start_epsilon(params, request), policy);
        out.value = res.values[0];
        out.verdict = res.verdict;
        if (policy.check_truncation) {
            const double wider = zero_delay_at(params, request, res.verdict.epsilon, policy, 1);
            out.verdict.truncation_change = relative_change(out.value, wider);
        }
    } catch (const ZeroDenominator&) {
        out.value = kNaN;
        out.flag = PointFlag::ZeroDenominator;
    }
    return out;
}

CorrelationValue g_zero_delay_flagged(const SystemParams& params, const CorrelationRequest& request,
                                      const EpsilonPolicy& policy) {
    try {
        return g_zero_delay(params, request, policy);
    } catch (const ParameterError&) {
        throw;
    } catch (const LayoutError&) {
        throw;
    } catch (const CapacityError&) {
        throw;
    } catch (const std::exception& e) {
        CorrelationValue out;
        out.value = kNaN;
        out.flag = flag_for(e);
        return out;
    }
}

namespace {

// g(tau) for all requested delays at one coupling.
std::vector<double> tau_profile_at(const SystemParams& params, const CorrelationRequest& request, double eps,
                                   const EpsilonPolicy& policy, const PropagationOptions& propagation) {
    const CompositeModel model = build_model(params, request.sensors(), eps, policy.model);
    const Liouvillian lv = model.liouvillian();
    const SteadyStateSolution state = stationary(model, policy);
    const MomentTable table = sensor_moments(model, state, request.partition, request.normalization, policy);
    if (table.zero_denominator) throw ZeroDenominator{};
    const double den = table.normalizers[0] * table.normalizers[1];
    const Index d = model.layout.total_dim();

    std::vector<double> out(request.tau.size(), kNaN);
    // first = group detected at the earlier time
    for (int first : {0, 1}) {
        const int second = 1 - first;
        std::vector<double> times;
        std::vector<std::size_t> where;
        for (std::size_t k = 0; k < request.tau.size(); ++k) {
            const double t = request.tau[k];
            if ((first == 0 && t >= 0.0) || (first == 1 && t < 0.0)) {
                times.push_back(std::abs(t));
                where.push_back(k);
            }
        }
        if (times.empty()) continue;
        if (first == 1) {
            std::reverse(times.begin(), times.end());
            std::reverse(where.begin(), where.end());
        }
        const ComplexMatrix lower = power(model.xi[first], request.partition[first]);
        const ComplexMatrix observable = ladder_moment_op(model.xi[second], request.partition[second]);
        const DenseMatrix conditioned = (lower * ComplexMatrix(state.rho.matrix) * lower.adjoint()).to_dense();
        const ComplexVector x0 = vectorize(conditioned);

        PropagationOptions opts = propagation;
        if (opts.scale.empty()) opts.scale = level_scale(model.layout, x0);
        const std::vector<ComplexVector> states = propagate(lv, x0, times, opts);
        for (std::size_t k = 0; k < states.size(); ++k) {
            const Complex v = trace_with(observable, states[k], d);
            out[where[k]] = v.real() / den;
        }
    }
    return out;
}

}  // namespace

ResultGrid g_tau(const SystemParams& params, const CorrelationRequest& request, const EpsilonPolicy& policy,
                 const PropagationOptions& propagation) {
    params.validate();
    request.validate();
    if (request.partition.size() != 2) throw ParameterError("time-resolved correlator needs exactly two groups");
    if (request.tau.empty()) throw ParameterError("time-resolved correlator needs a tau grid");

    ResultGrid grid = start_grid("g_tau", {Axis{"tau", "1/gamma", request.tau}}, params, policy);
    grid.metadata["request"] = describe(request);
    grid.metadata["propagation"] = {
        {"method", propagation.method == PropagationMethod::RungeKutta ? "runge_kutta" : "matrix_exponential"},
        {"relative_tolerance", propagation.relative_tolerance},
        {"absolute_tolerance", propagation.absolute_tolerance}};
    if (params.rabi == 0.0) {
        for (std::size_t i = 0; i < grid.size(); ++i) grid.set_failure(i, PointFlag::ZeroDenominator);
        summarize_verdicts(grid);
        return grid;
    }
    try {
        auto eval = [&](double eps) { return tau_profile_at(params, request, eps, policy, propagation); };
        ProtocolOutcome res = run_protocol(eval, start_epsilon(params, request), policy);
        const auto& coarse = res.coarse;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            grid.set(i, res.values[i], PointFlag::Ok, res.verdict.epsilon, relative_change(res.values[i], coarse[i]));
        }
    } catch (const ZeroDenominator&) {
        for (std::size_t i = 0; i < grid.size(); ++i) grid.set_failure(i, PointFlag::ZeroDenominator);
    }
    summarize_verdicts(grid);
    return grid;
}

CorrelationValue spectrum_point(const SystemParams& params, double linewidth, double frequency,
                                const EpsilonPolicy& policy, std::optional<double> epsilon) {
    params.validate();
    if (!(linewidth > 0.0)) throw ParameterError("linewidth must be positive");
    CorrelationValue out;
    SensorSpec s;
    s.frequency = frequency;
    s.linewidth = linewidth;
    // Population per unit coupling squared is the coupling-independent spectral density.
    auto eval = [&](double eps) {
        const CompositeModel model = build_model(params, {s}, eps, policy.model);
        const std::array<int, 1> one{1};
        const MomentTable t = sensor_moments(model, stationary(model, policy), one, Normalization::Bundle, policy);
        if (t.zero_denominator) throw ZeroDenominator{};
        return std::vector<double>{t.normalizers[0] / (eps * eps)};
    };
    try {
        ProtocolOutcome res = run_protocol(eval, epsilon.value_or(default_epsilon(params.gamma, linewidth)), policy);
        out.value = res.values[0];
        out.verdict = res.verdict;
    } catch (const ZeroDenominator&) {
        out.value = kNaN;
        out.flag = PointFlag::ZeroDenominator;
    } catch (const Error& e) {
        out.value = kNaN;
        out.flag = flag_for(e);
    }
    return out;
}

void normalize_to_unit_sum(ResultGrid& grid) {
    double total = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid.flags[i] == PointFlag::Ok) total += grid.values[i];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid.flags[i] != PointFlag::Ok) continue;
        if (total > 0.0) {
            grid.values[i] /= total;
        } else {
            grid.set_failure(i, PointFlag::ZeroDenominator);
        }
    }
}

void store(ResultGrid& grid, std::size_t i, const CorrelationValue& v) {
    if (v.flag == PointFlag::Ok) {
        grid.set(i, v.value, PointFlag::Ok, v.verdict.epsilon, v.verdict.relative_change);
    } else {
        grid.set_failure(i, v.flag);
    }
}

ResultGrid spectrum_scan(const SystemParams& params, double linewidth, std::span<const double> grid_points,
                         const EpsilonPolicy& policy, int workers) {
    params.validate();
    if (grid_points.empty()) throw ParameterError("spectrum grid is empty");
    if (!(linewidth > 0.0)) throw ParameterError("linewidth must be positive");
    ResultGrid grid = start_grid("spectrum", {Axis{"omega", "gamma", {grid_points.begin(), grid_points.end()}}},
                                 params, policy);
    grid.metadata["linewidth"] = linewidth;
    auto points = parallel_map<CorrelationValue>(grid_points.size(), workers, [&](std::size_t i) {
        return spectrum_point(params, linewidth, grid_points[i], policy);
    });
    for (std::size_t i = 0; i < points.size(); ++i) store(grid, i, points[i]);
    normalize_to_unit_sum(grid);
    summarize_verdicts(grid);
    return grid;
}

ResultGrid wk_spectrum_oracle(const SystemParams& params, double linewidth, std::span<const double> grid_points,
                              const OracleOptions& options) {
    params.validate();
    if (grid_points.empty()) throw ParameterError("spectrum grid is empty");
    if (!(linewidth > 0.0)) throw ParameterError("linewidth must be positive");

    const CompositeModel bare = build_model(params, {}, 1.0);
    const Liouvillian lv = bare.liouvillian();
    const DensityMatrix rho = solve_steady_state(lv);
    const DenseMatrix gen(lv.generator);

    // Fastest oscillation of the integrand: generator frequencies plus the largest probe frequency.
    const Eigen::ComplexEigenSolver<DenseMatrix> eig(gen, false);
    double fastest = 0.0;
    for (Index k = 0; k < eig.eigenvalues().size(); ++k) fastest = std::max(fastest, std::abs(eig.eigenvalues()(k).imag()));
    double probe = 0.0;
    for (double w : grid_points) probe = std::max(probe, std::abs(w));
    fastest += probe + linewidth;

    const double window = options.window > 0.0 ? options.window
                                               : 2.0 * std::log(1e3 / options.decay_threshold) / linewidth;
    double step = options.step > 0.0 ? options.step : 2.0 * M_PI / (60.0 * fastest);
    std::size_t intervals = static_cast<std::size_t>(std::ceil(window / step));
    intervals += intervals % 2;  // Simpson needs an even count
    step = window / static_cast<double>(intervals);

    // G(t) = Tr[sigma e^{L t}(rho sigma^dag)] sampled on the quadrature grid.
    const DenseMatrix propagator = (gen * Complex(step)).exp();
    ComplexVector x = vectorize((ComplexMatrix(rho.matrix) * bare.sigma.adjoint()).to_dense());
    std::vector<Complex> corr(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
        corr[k] = trace_with(bare.sigma, x, 2);
        x = propagator * x;
    }

    double peak = 0.0;
    for (const auto& c : corr) peak = std::max(peak, std::abs(c));
    const double tail = std::abs(corr.back()) * std::exp(-0.5 * linewidth * window);
    if (peak > 0.0 && tail > options.decay_threshold * peak) {
        std::ostringstream msg;
        msg << "integration window " << window << " too short: damped correlation is " << tail / peak
            << " of its peak at the end";
        throw OracleError(msg.str());
    }

    ResultGrid grid = ResultGrid::with_axes({Axis{"omega", "gamma", {grid_points.begin(), grid_points.end()}}});
    grid.metadata["kind"] = "spectrum_oracle";
    grid.metadata["system"] = describe(params);
    grid.metadata["linewidth"] = linewidth;
    grid.metadata["window"] = window;
    grid.metadata["step"] = step;
    grid.metadata["version"] = version();

    std::vector<double> raw(grid_points.size());
    double total = 0.0;
    for (std::size_t i = 0; i < grid_points.size(); ++i) {
        const Complex rate(-0.5 * linewidth, grid_points[i]);
        const Complex phase_step = std::exp(rate * step);
        Complex phase = 1.0;
        Complex acc = 0.0;
        for (std::size_t k = 0; k <= intervals; ++k) {
            const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            acc += w * phase * corr[k];
            phase *= phase_step;
        }
        raw[i] = std::max(0.0, (acc * (step / 3.0)).real());
        total += raw[i];
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (total > 0.0) {
            grid.set(i, raw[i] / total, PointFlag::Ok, kNaN, kNaN);
        } else {
            grid.set_failure(i, PointFlag::ZeroDenominator);
        }
    }
    return grid;
}

ResultGrid autocorrelation_scan(const SystemParams& params, int order, double linewidth,
                                std::span<const double> grid_points, const EpsilonPolicy& policy, int workers) {
    params.validate();
    if (order < 2) throw ParameterError("autocorrelation order must be >= 2");
    if (grid_points.empty()) throw ParameterError("autocorrelation grid is empty");
    CorrelationRequest request;
    request.partition = {order};
    request.frequencies = {0.0};
    request.linewidths = {linewidth};
    request.normalization = Normalization::Photon;
    request.validate();

    ResultGrid grid = start_grid("autocorrelation", {Axis{"omega", "gamma", {grid_points.begin(), grid_points.end()}}},
                                 params, policy);
    grid.metadata["order"] = order;
    grid.metadata["request"] = describe(request);
    auto values = parallel_map<CorrelationValue>(grid_points.size(), workers, [&](std::size_t i) {
        CorrelationRequest r = request;
        r.frequencies[0] = grid_points[i];
        return g_zero_delay_flagged(params, r, policy);
    });
    for (std::size_t i = 0; i < values.size(); ++i) store(grid, i, values[i]);
    summarize_verdicts(grid);
    return grid;
}

PlaneSpec PlaneSpec::free_pair(std::size_t groups, std::size_t first, std::size_t second,
                               std::span<const double> fixed) {
    if (first >= groups || second >= groups || first == second) throw ParameterError("invalid free group pair");
    if (fixed.size() != groups) throw ParameterError("fixed frequency list has the wrong length");
    PlaneSpec p;
    p.origin.assign(fixed.begin(), fixed.end());
    p.u_dir.assign(groups, 0.0);
    p.v_dir.assign(groups, 0.0);
    p.origin[first] = 0.0;
    p.origin[second] = 0.0;
    p.u_dir[first] = 1.0;
    p.v_dir[second] = 1.0;
    return p;
}

std::vector<double> PlaneSpec::frequencies(double u, double v) const {
    std::vector<double> f(origin.size());
    for (std::size_t k = 0; k < origin.size(); ++k) f[k] = origin[k] + u_dir[k] * u + v_dir[k] * v;
    return f;
}

ResultGrid plane_map(const SystemParams& params, const CorrelationRequest& request, const PlaneSpec& plane,
                     Axis u_axis, Axis v_axis, const EpsilonPolicy& policy, int workers) {
    params.validate();
    request.validate();
    const std::size_t groups = request.partition.size();
    if (plane.origin.size() != groups || plane.u_dir.size() != groups || plane.v_dir.size() != groups) {
        throw ParameterError("plane specification does not match the number of groups");
    }
    ResultGrid grid = start_grid("map", {std::move(u_axis), std::move(v_axis)}, params, policy);
    grid.metadata["request"] = describe(request);
    grid.metadata["plane"] = {{"origin", plane.origin}, {"u", plane.u_dir}, {"v", plane.v_dir}};

    auto values = parallel_map<CorrelationValue>(grid.size(), workers, [&](std::size_t i) {
        const auto c = grid.coordinates(i);
        CorrelationRequest r = request;
        r.frequencies = plane.frequencies(c[0], c[1]);
        return g_zero_delay_flagged(params, r, policy);
    });
    for (std::size_t i = 0; i < values.size(); ++i) store(grid, i, values[i]);
    summarize_verdicts(grid);
    return grid;
}

ResultGrid map2d(const SystemParams& params, const CorrelationRequest& request,
                 std::array<std::size_t, 2> free_groups, std::span<const double> grid1,
                 std::span<const double> grid2, const EpsilonPolicy& policy, int workers) {
    request.validate();
    const PlaneSpec plane =
        PlaneSpec::free_pair(request.partition.size(), free_groups[0], free_groups[1], request.frequencies);
    Axis u{"omega" + std::to_string(free_groups[0] + 1), "gamma", {grid1.begin(), grid1.end()}};
    Axis v{"omega" + std::to_string(free_groups[1] + 1), "gamma", {grid2.begin(), grid2.end()}};
    return plane_map(params, request, plane, std::move(u), std::move(v), policy, workers);
}

ResultGrid cut3d(const SystemParams& params, const CorrelationRequest& request, const PlaneSpec& plane,
                 std::span<const double> u_grid, std::span<const double> v_grid, const EpsilonPolicy& policy,
                 int workers) {
    if (request.partition.size() != 3) throw ParameterError("a three-photon cut needs three groups");
    return plane_map(params, request, plane, Axis{"u", "gamma", {u_grid.begin(), u_grid.end()}},
                     Axis{"v", "gamma", {v_grid.begin(), v_grid.end()}}, policy, workers);
}

nlohmann::json describe(const SystemParams& params) {
    nlohmann::json j = {{"detuning", params.detuning}, {"rabi", params.rabi}, {"gamma", params.gamma}};
    try {
        j["omega_plus"] = dressed_splitting(params).omega_plus;
    } catch (const RegimeError&) {
        j["omega_plus"] = nullptr;
    }
    return j;
}

nlohmann::json describe(const CorrelationRequest& request) {
    nlohmann::json j = {{"partition", request.partition},
                        {"frequencies", request.frequencies},
                        {"linewidths", request.linewidths},
                        {"normalization", request.normalization == Normalization::Bundle ? "bundle" : "photon"}};
    if (!request.tau.empty()) j["tau_count"] = request.tau.size();
    if (request.epsilon) j["epsilon"] = *request.epsilon;
    return j;
}

}  // namespace mollow
