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

#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "mollow/errors.hpp"
#include "mollow/operators.hpp"
#include "mollow/steady_state.hpp"
#include "mollow/system_model.hpp"

using namespace mollow;

namespace {

DenseMatrix sigma_dense() {
    DenseMatrix s = DenseMatrix::Zero(2, 2);
    s(0, 1) = 1.0;
    return s;
}

Liouvillian driven_2ls(double detuning, double rabi, double gamma = 1.0) {
    const SpaceLayout layout({2});
    const ComplexMatrix s(sigma_dense());
    const ComplexMatrix h = Complex(detuning) * (s.adjoint() * s) + Complex(rabi) * (s + s.adjoint());
    const std::vector<Dissipator> d{{gamma, s}};
    return build_liouvillian(h, d, layout);
}

}  // namespace

TEST_CASE("annihilation operator ladder") {
    const DenseMatrix a2 = annihilation_op(2).to_dense();
    CHECK(std::abs(a2(0, 1) - 1.0) == 0.0);
    CHECK(std::abs(a2(0, 0)) == 0.0);
    CHECK(std::abs(a2(1, 0)) == 0.0);
    CHECK(std::abs(a2(1, 1)) == 0.0);

    const DenseMatrix a3 = annihilation_op(3).to_dense();
    CHECK(std::abs(a3(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(a3(1, 2) - std::sqrt(2.0)) < 1e-15);
    CHECK(a3.cwiseAbs().sum() == doctest::Approx(1.0 + std::sqrt(2.0)));

    for (Index d = 2; d <= 7; ++d) {
        const DenseMatrix a = annihilation_op(d).to_dense();
        const DenseMatrix n = a.adjoint() * a;
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) CHECK(std::abs(n(i, j) - (i == j ? double(i) : 0.0)) < 1e-14);
    }
    CHECK_THROWS_AS(annihilation_op(1), InvalidDimensionError);
    CHECK_THROWS_AS(annihilation_op(0), InvalidDimensionError);
}

TEST_CASE("lift embeds operators in their slot") {
    const SpaceLayout layout({2, 2});
    const DenseMatrix s = lift(annihilation_op(2), 0, layout).to_dense();
    // |e>|0> has composite index 1*2 + 0 = 2; |g>|0> is 0.
    ComplexVector e0 = ComplexVector::Zero(4);
    e0(2) = 1.0;
    const ComplexVector out = s * e0;
    CHECK(std::abs(out(0) - 1.0) < 1e-15);
    CHECK(out.cwiseAbs().sum() == doctest::Approx(1.0));

    const SpaceLayout big({2, 3, 2});
    const ComplexMatrix a = lift(annihilation_op(2), 0, big);
    const ComplexMatrix b = lift(annihilation_op(3), 1, big);
    const ComplexMatrix c = lift(annihilation_op(2), 2, big);
    CHECK((a * b - b * a).max_abs() == 0.0);
    CHECK((b * c.adjoint() - c.adjoint() * b).max_abs() == 0.0);

    for (Index slot = 0; slot < 3; ++slot) {
        const Index d = big.dim(slot);
        const ComplexMatrix id = lift(ComplexMatrix::identity(d, Storage::Dense), slot, big);
        CHECK(max_abs_diff(id, ComplexMatrix::identity(12, Storage::Dense)) == 0.0);
    }
    CHECK_THROWS_AS(lift(annihilation_op(2), 3, big), LayoutError);
    CHECK_THROWS_AS(lift(annihilation_op(2), 1, big), LayoutError);
}

TEST_CASE("pure decay relaxes to the ground state") {
    const Liouvillian lv = driven_2ls(0.0, 0.0);
    const DensityMatrix rho = solve_steady_state(lv);
    CHECK(std::abs(rho.matrix(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(rho.matrix(1, 1)) < 1e-12);
}

TEST_CASE("generator preserves the trace") {
    const CompositeModel m = build_model({1.5, 2.0, 1.0}, {{3.0, 1.0, 1}, {-2.0, 2.0, 2}}, 0.3);
    const Liouvillian lv = m.liouvillian();
    const ComplexVector row = trace_functional(m.layout.total_dim());
    const ComplexVector left = lv.generator.transpose() * row;
    CHECK(left.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("optical Bloch steady state") {
    // Excited population of a driven two-level system, written out by hand:
    // rho_ee = rabi^2 / (gamma^2/4 + detuning^2 + 2 rabi^2).
    for (auto [detuning, rabi] : {std::pair{0.0, 0.5}, std::pair{1.3, 0.7}, std::pair{-4.0, 2.5}}) {
        const DensityMatrix rho = solve_steady_state(driven_2ls(detuning, rabi));
        const double expected = rabi * rabi / (0.25 + detuning * detuning + 2 * rabi * rabi);
        CHECK(rho.matrix(1, 1).real() == doctest::Approx(expected).epsilon(1e-12));
    }
    const DensityMatrix rho = solve_steady_state(driven_2ls(0.0, 0.5));
    CHECK(rho.matrix(1, 1).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("assembly rejects invalid inputs") {
    const SpaceLayout layout({2});
    DenseMatrix h = DenseMatrix::Zero(2, 2);
    h(0, 1) = 1.0;  // not Hermitian
    const std::vector<Dissipator> none;
    CHECK_THROWS_AS(build_liouvillian(ComplexMatrix(h), none, layout), ModelError);
    const std::vector<Dissipator> negative{{-1.0, ComplexMatrix(sigma_dense())}};
    CHECK_THROWS_AS(build_liouvillian(ComplexMatrix(DenseMatrix::Zero(2, 2)), negative, layout), ModelError);
}

TEST_CASE("sparse and dense assembly agree") {
    const std::vector<std::vector<SensorSpec>> cases = {
        {},
        {{1.0, 1.0, 1}},
        {{2.0, 1.0, 1}, {-1.0, 3.0, 1}},
        {{2.0, 1.0, 1}, {-1.0, 3.0, 1}, {0.5, 0.5, 1}},
        {{4.0, 2.0, 2}},
    };
    for (const auto& sensors : cases) {
        const CompositeModel m = build_model({0.7, 3.0, 1.0}, sensors, 0.2);
        REQUIRE(m.layout.total_dim() <= 16);
        const SparseMatrix a = m.liouvillian(Storage::Dense).generator;
        const SparseMatrix b = m.liouvillian(Storage::Sparse).generator;
        CHECK(DenseMatrix(a - b).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("generator spectrum is stable") {
    const CompositeModel m = build_model({1.0, 2.0, 1.0}, {{1.0, 0.5, 2}, {-3.0, 1.0, 1}}, 0.4);
    REQUIRE(m.layout.total_dim() == 12);
    const DenseMatrix g(m.liouvillian().generator);
    const Eigen::ComplexEigenSolver<DenseMatrix> es(g);
    REQUIRE(es.info() == Eigen::Success);
    const auto& ev = es.eigenvalues();
    CHECK(ev.real().maxCoeff() < 1e-9);
    CHECK(ev.cwiseAbs().minCoeff() < 1e-9);
}

TEST_CASE("short evolution keeps hermiticity and trace") {
    const CompositeModel m = build_model({0.5, 2.0, 1.0}, {{1.0, 1.0, 1}, {-1.0, 2.0, 1}}, 0.5);
    const Index d = m.layout.total_dim();
    DenseMatrix a = DenseMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) a(i, j) = Complex(std::sin(1.0 + i + 3 * j), std::cos(2.0 * i - j));
    DenseMatrix rho = a * a.adjoint();
    rho /= rho.trace();
    const DenseMatrix step = (DenseMatrix(m.liouvillian().generator) * 0.01).exp();
    ComplexVector v = vectorize(rho);
    for (int k = 0; k < 200; ++k) {
        v = step * v;
        const DenseMatrix r = unvectorize(v, d);
        CHECK((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(r.trace() - 1.0) < 1e-10);
    }
}
