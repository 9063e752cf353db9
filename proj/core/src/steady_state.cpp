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

#include "mollow/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "mollow/errors.hpp"

namespace mollow {

Complex DensityMatrix::expectation(const ComplexMatrix& op) const {
    if (op.rows() != matrix.rows()) throw LayoutError("operator does not match density matrix dimension");
    if (op.is_sparse()) {
        // Tr[op rho] = sum_{ij} op_ij rho_ji
        Complex acc = 0.0;
        const auto& s = op.sparse();
        for (Index k = 0; k < s.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(s, k); it; ++it) acc += it.value() * matrix(it.col(), it.row());
        return acc;
    }
    return (op.dense() * matrix).trace();
}

Index sensor_excitation(const SpaceLayout& layout, Index state) {
    Index n = 0;
    for (Index slot = 1; slot < layout.slots(); ++slot) n += layout.local_index(state, slot);
    return n;
}

std::vector<double> excitation_balance(const SpaceLayout& layout, double scale) {
    const Index dim = layout.total_dim();
    std::vector<double> level(static_cast<std::size_t>(dim));
    for (Index i = 0; i < dim; ++i) level[i] = static_cast<double>(sensor_excitation(layout, i));
    std::vector<double> w(static_cast<std::size_t>(dim * dim));
    for (Index j = 0; j < dim; ++j)
        for (Index i = 0; i < dim; ++i) w[j * dim + i] = std::pow(scale, level[i] + level[j]);
    return w;
}

double infinity_norm(const SparseMatrix& m) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
    for (Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows(it.row()) += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

namespace {

SparseMatrix balanced(const SparseMatrix& gen, const std::vector<double>& w) {
    SparseMatrix out = gen;
    for (Index k = 0; k < out.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(out, k); it; ++it) it.valueRef() *= w[it.col()] / w[it.row()];
    return out;
}

// Replace `row` with the (weighted) trace functional.
SparseMatrix with_trace_row(const SparseMatrix& gen, Index row, Index dim, const std::vector<double>& w) {
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(gen.nonZeros() + dim));
    for (Index k = 0; k < gen.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(gen, k); it; ++it)
            if (it.row() != row) trips.emplace_back(it.row(), it.col(), it.value());
    for (Index j = 0; j < dim; ++j) {
        const Index idx = j * dim + j;
        trips.emplace_back(row, idx, w.empty() ? 1.0 : w[idx]);
    }
    SparseMatrix a(gen.rows(), gen.cols());
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    return a;
}

ComplexVector extended_residual(const SparseMatrix& a, const ComplexVector& x, const ComplexVector& b) {
    using Wide = std::complex<long double>;
    std::vector<Wide> acc(static_cast<std::size_t>(b.size()));
    for (Index i = 0; i < b.size(); ++i) acc[i] = Wide(b(i).real(), b(i).imag());
    for (Index k = 0; k < a.outerSize(); ++k) {
        const Wide xk(x(k).real(), x(k).imag());
        for (SparseMatrix::InnerIterator it(a, k); it; ++it)
            acc[it.row()] -= Wide(it.value().real(), it.value().imag()) * xk;
    }
    ComplexVector r(b.size());
    for (Index i = 0; i < b.size(); ++i)
        r(i) = Complex(static_cast<double>(acc[i].real()), static_cast<double>(acc[i].imag()));
    return r;
}

}  // namespace

SteadyStateSolution solve_steady_state_detailed(const Liouvillian& liouvillian, const SteadyStateOptions& options) {
    const Index dim = liouvillian.layout.total_dim();
    const Index n = dim * dim;
    if (liouvillian.generator.rows() != n || liouvillian.generator.cols() != n) {
        throw LayoutError("generator size does not match layout");
    }
    const auto& w = options.balance;
    if (!w.empty() && static_cast<Index>(w.size()) != n) throw LayoutError("balance vector has wrong length");

    const SparseMatrix gen = w.empty() ? liouvillian.generator : balanced(liouvillian.generator, w);

    // Only the population rows (j, j) are linearly dependent (their sum is the
    // trace functional applied to L, which vanishes). The replaced one is the
    // emitter-ground/sensor-vacuum population: the heaviest state, so the
    // balance equations of the weakly populated sensor states are all kept.
    const Index row = 0;
    const SparseMatrix system = with_trace_row(gen, row, dim, w);
    ComplexVector rhs = ComplexVector::Zero(n);
    rhs(row) = 1.0;

    const bool direct = options.path == SolverPath::Direct ||
                        (options.path == SolverPath::Auto && n <= options.direct_max_rows);
    ComplexVector x;
    ComplexVector last_correction = ComplexVector::Zero(n);
    if (direct) {
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(system);
        lu.factorize(system);
        if (lu.info() != Eigen::Success) {
            throw DegeneracyError("steady-state system is singular: the generator has more than one stationary state (" +
                                  lu.lastErrorMessage() + ")");
        }
        x = lu.solve(rhs);
        // Iterative refinement with residuals accumulated in extended precision.
        for (int step = 0; step < options.refinement_steps; ++step) {
            ComplexVector delta = lu.solve(extended_residual(system, x, rhs));
            x += delta;
            if (step + 1 == options.refinement_steps) last_correction = std::move(delta);
        }
    } else {
        Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<Complex>> gmres;
        gmres.preconditioner().setDroptol(1e-6);
        gmres.preconditioner().setFillfactor(20);
        gmres.set_restart(options.iterative_restart);
        gmres.setTolerance(options.iterative_tolerance);
        gmres.setMaxIterations(options.iterative_max_iterations);
        gmres.compute(system);
        if (gmres.info() != Eigen::Success) throw SolverError("preconditioner construction failed");
        x = gmres.solve(rhs);
        if (gmres.info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "GMRES did not converge: relative residual " << gmres.error() << " after " << gmres.iterations()
                << " iterations";
            throw SolverError(msg.str());
        }
    }
    if (!x.allFinite()) throw DegeneracyError("steady-state solution is not finite; stationary state is not unique");

    if (!w.empty()) {
        for (Index i = 0; i < n; ++i) {
            x(i) *= w[i];
            last_correction(i) *= w[i];
        }
    }

    return SteadyStateSolution{DensityMatrix{unvectorize(x, dim), liouvillian.layout},
                               unvectorize(last_correction, dim)};
}

DensityMatrix solve_steady_state(const Liouvillian& liouvillian, const SteadyStateOptions& options) {
    return solve_steady_state_detailed(liouvillian, options).rho;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "hermiticity " << hermiticity_defect << (hermitian ? " ok" : " FAIL") << ", trace " << trace_defect
       << (unit_trace ? " ok" : " FAIL") << ", min eigenvalue " << min_eigenvalue << (positive ? " ok" : " FAIL")
       << ", residual " << residual << (stationary ? " ok" : " FAIL");
    return os.str();
}

ValidationReport validate_density_matrix(const DensityMatrix& rho,
                                         const Liouvillian* liouvillian,
                                         const ValidationTolerances& tol) {
    const Index dim = rho.layout.total_dim();
    if (rho.matrix.rows() != dim || rho.matrix.cols() != dim) throw LayoutError("density matrix does not match layout");

    ValidationReport r;
    r.hermiticity_defect = (rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff();
    r.trace_defect = std::abs(rho.matrix.trace() - Complex(1.0));
    const DenseMatrix herm = 0.5 * (rho.matrix + rho.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(herm, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = eig.eigenvalues().minCoeff();
    r.hermitian = r.hermiticity_defect < tol.hermiticity;
    r.unit_trace = r.trace_defect < tol.trace;
    r.positive = r.min_eigenvalue >= tol.min_eigenvalue;
    if (liouvillian) {
        const ComplexVector res = liouvillian->generator * vectorize(rho.matrix);
        const double norm = infinity_norm(liouvillian->generator);
        r.residual = res.cwiseAbs().maxCoeff() / (norm > 0.0 ? norm : 1.0);
        r.stationary = r.residual < tol.residual;
    } else {
        r.residual = std::numeric_limits<double>::quiet_NaN();
        r.stationary = true;
    }
    return r;
}

double trace_distance(const DenseMatrix& a, const DenseMatrix& b) {
    const DenseMatrix d = a - b;
    const DenseMatrix herm = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(herm, Eigen::EigenvaluesOnly);
    return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

double second_null_residual(const Liouvillian& liouvillian) {
    const DenseMatrix gen(liouvillian.generator);
    Eigen::BDCSVD<DenseMatrix> svd(gen);
    const auto& s = svd.singularValues();
    if (s.size() < 2) return std::numeric_limits<double>::infinity();
    return s(s.size() - 2);
}

}  // namespace mollow
