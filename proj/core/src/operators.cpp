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

#include "mollow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "mollow/errors.hpp"

namespace mollow {

namespace {

SparseMatrix sparse_identity(Index dim) {
    SparseMatrix id(dim, dim);
    id.setIdentity();
    return id;
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw LayoutError(std::string("shape mismatch in ") + op + ": " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

}  // namespace

ComplexMatrix ComplexMatrix::identity(Index dim, Storage storage) {
    if (storage == Storage::Sparse) return ComplexMatrix(sparse_identity(dim));
    return ComplexMatrix(DenseMatrix(DenseMatrix::Identity(dim, dim)));
}

ComplexMatrix ComplexMatrix::zero(Index rows, Index cols, Storage storage) {
    if (storage == Storage::Sparse) return ComplexMatrix(SparseMatrix(rows, cols));
    return ComplexMatrix(DenseMatrix(DenseMatrix::Zero(rows, cols)));
}

Index ComplexMatrix::rows() const {
    return std::visit([](const auto& m) { return static_cast<Index>(m.rows()); }, data_);
}

Index ComplexMatrix::cols() const {
    return std::visit([](const auto& m) { return static_cast<Index>(m.cols()); }, data_);
}

DenseMatrix ComplexMatrix::to_dense() const {
    if (is_sparse()) return DenseMatrix(sparse());
    return dense();
}

SparseMatrix ComplexMatrix::to_sparse() const {
    if (is_sparse()) return sparse();
    SparseMatrix s = dense().sparseView(Complex(0.0), 0.0);
    s.makeCompressed();
    return s;
}

ComplexMatrix ComplexMatrix::with_storage(Storage storage) const {
    if (storage == Storage::Sparse) return ComplexMatrix(to_sparse());
    return ComplexMatrix(to_dense());
}

Complex ComplexMatrix::coeff(Index row, Index col) const {
    if (is_sparse()) return sparse().coeff(row, col);
    return dense()(row, col);
}

ComplexMatrix ComplexMatrix::adjoint() const {
    if (is_sparse()) return ComplexMatrix(SparseMatrix(sparse().adjoint()));
    return ComplexMatrix(DenseMatrix(dense().adjoint()));
}

ComplexMatrix ComplexMatrix::transpose() const {
    if (is_sparse()) return ComplexMatrix(SparseMatrix(sparse().transpose()));
    return ComplexMatrix(DenseMatrix(dense().transpose()));
}

ComplexMatrix ComplexMatrix::conjugate() const {
    if (is_sparse()) return ComplexMatrix(SparseMatrix(sparse().conjugate()));
    return ComplexMatrix(DenseMatrix(dense().conjugate()));
}

double ComplexMatrix::max_abs() const {
    if (is_sparse()) {
        double best = 0.0;
        const auto& s = sparse();
        for (Index k = 0; k < s.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(s, k); it; ++it) best = std::max(best, std::abs(it.value()));
        return best;
    }
    return dense().size() == 0 ? 0.0 : dense().cwiseAbs().maxCoeff();
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "addition");
    if (!a.is_sparse() && !b.is_sparse()) return ComplexMatrix(DenseMatrix(a.dense() + b.dense()));
    return ComplexMatrix(SparseMatrix(a.to_sparse() + b.to_sparse()));
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
    require_same_shape(a, b, "subtraction");
    if (!a.is_sparse() && !b.is_sparse()) return ComplexMatrix(DenseMatrix(a.dense() - b.dense()));
    return ComplexMatrix(SparseMatrix(a.to_sparse() - b.to_sparse()));
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw LayoutError("inner dimension mismatch in product: " + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()));
    }
    if (!a.is_sparse() && !b.is_sparse()) return ComplexMatrix(DenseMatrix(a.dense() * b.dense()));
    return ComplexMatrix(SparseMatrix(a.to_sparse() * b.to_sparse()));
}

ComplexMatrix operator*(Complex s, const ComplexMatrix& a) {
    if (a.is_sparse()) return ComplexMatrix(SparseMatrix(s * a.sparse()));
    return ComplexMatrix(DenseMatrix(s * a.dense()));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (!a.is_sparse() && !b.is_sparse()) {
        return ComplexMatrix(DenseMatrix(Eigen::kroneckerProduct(a.dense(), b.dense())));
    }
    SparseMatrix out = Eigen::kroneckerProduct(a.to_sparse(), b.to_sparse());
    out.makeCompressed();
    return ComplexMatrix(std::move(out));
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).max_abs();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.max_abs());
    return max_abs_diff(m, m.adjoint()) <= tol * scale;
}

SpaceLayout::SpaceLayout(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw LayoutError("layout needs at least the emitter slot");
    if (dims_.front() != 2) throw LayoutError("emitter slot must have dimension 2");
    for (Index d : dims_) {
        if (d < 2) throw LayoutError("every slot needs dimension >= 2, got " + std::to_string(d));
    }
    strides_.assign(dims_.size(), 1);
    for (Index k = slots() - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * dims_[k + 1];
    total_ = strides_[0] * dims_[0];
}

Index SpaceLayout::dim(Index slot) const {
    if (slot < 0 || slot >= slots()) {
        throw LayoutError("slot " + std::to_string(slot) + " out of range for " +
                          std::to_string(slots()) + " slots");
    }
    return dims_[slot];
}

Index SpaceLayout::local_index(Index state, Index slot) const {
    const Index d = dim(slot);
    return (state / strides_[slot]) % d;
}

ComplexMatrix annihilation_op(Index dim) {
    if (dim < 2) throw InvalidDimensionError("annihilation operator needs dim >= 2, got " + std::to_string(dim));
    DenseMatrix a = DenseMatrix::Zero(dim, dim);
    for (Index m = 1; m < dim; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
    return ComplexMatrix(std::move(a)).with_storage(storage_for_dimension(dim));
}

ComplexMatrix lift(const ComplexMatrix& op, Index slot, const SpaceLayout& layout) {
    const Index local = layout.dim(slot);
    if (op.rows() != local || op.cols() != local) {
        throw LayoutError("operator of dimension " + std::to_string(op.rows()) + " does not fit slot " +
                          std::to_string(slot) + " of dimension " + std::to_string(local));
    }
    Index before = 1;
    Index after = 1;
    for (Index k = 0; k < slot; ++k) before *= layout.dims()[k];
    for (Index k = slot + 1; k < layout.slots(); ++k) after *= layout.dims()[k];

    const Storage storage = storage_for_dimension(layout.total_dim());
    ComplexMatrix out = op.with_storage(storage);
    if (before > 1) out = kron(ComplexMatrix::identity(before, storage), out);
    if (after > 1) out = kron(out, ComplexMatrix::identity(after, storage));
    return out.with_storage(storage);
}

namespace {

// Each term is built as sum of Kronecker products (B^T (x) A) realising vec(A rho B).
template <class Mat>
Mat assemble(const Mat& h, const std::vector<std::pair<double, Mat>>& dissipators, const Mat& id) {
    const Complex i(0.0, 1.0);
    Mat gen = Mat(Eigen::kroneckerProduct(Mat(h.transpose()), id)) * i -
              Mat(Eigen::kroneckerProduct(id, h)) * i;
    for (const auto& [rate, c] : dissipators) {
        const Mat cdc = c.adjoint() * c;
        const Mat jump = Eigen::kroneckerProduct(Mat(c.conjugate()), c);
        const Mat left = Eigen::kroneckerProduct(id, cdc);
        const Mat right = Eigen::kroneckerProduct(Mat(cdc.transpose()), id);
        gen = gen + (jump * Complex(rate)) - (left * Complex(0.5 * rate)) - (right * Complex(0.5 * rate));
    }
    return gen;
}

}  // namespace

Liouvillian build_liouvillian(const ComplexMatrix& hamiltonian,
                              std::span<const Dissipator> dissipators,
                              const SpaceLayout& layout,
                              Storage assembly) {
    const Index dim = layout.total_dim();
    if (hamiltonian.rows() != dim || hamiltonian.cols() != dim) {
        throw LayoutError("Hamiltonian dimension " + std::to_string(hamiltonian.rows()) +
                          " does not match layout dimension " + std::to_string(dim));
    }
    if (!is_hermitian(hamiltonian, kHermiticityTolerance)) {
        throw ModelError("Hamiltonian is not Hermitian within tolerance");
    }
    for (const auto& d : dissipators) {
        if (!(d.rate >= 0.0)) throw ModelError("dissipator rate must be nonnegative, got " + std::to_string(d.rate));
        if (d.collapse.rows() != dim || d.collapse.cols() != dim) {
            throw LayoutError("collapse operator dimension does not match layout");
        }
    }

    SparseMatrix generator;
    if (assembly == Storage::Dense) {
        std::vector<std::pair<double, DenseMatrix>> ds;
        for (const auto& d : dissipators) ds.emplace_back(d.rate, d.collapse.to_dense());
        const DenseMatrix id = DenseMatrix::Identity(dim, dim);
        generator = assemble<DenseMatrix>(hamiltonian.to_dense(), ds, id).sparseView(Complex(0.0), 0.0);
    } else {
        std::vector<std::pair<double, SparseMatrix>> ds;
        for (const auto& d : dissipators) ds.emplace_back(d.rate, d.collapse.to_sparse());
        generator = assemble<SparseMatrix>(hamiltonian.to_sparse(), ds, sparse_identity(dim));
        generator.prune(Complex(0.0), 0.0);
    }
    generator.makeCompressed();
    return Liouvillian{std::move(generator), layout, Vectorization::ColumnStacking};
}

Liouvillian build_liouvillian(const ComplexMatrix& hamiltonian,
                              std::span<const Dissipator> dissipators,
                              const SpaceLayout& layout) {
    return build_liouvillian(hamiltonian, dissipators, layout, storage_for_dimension(layout.total_dim()));
}

ComplexVector vectorize(const DenseMatrix& rho) {
    return Eigen::Map<const ComplexVector>(rho.data(), rho.size());
}

DenseMatrix unvectorize(const ComplexVector& v, Index dim) {
    if (v.size() != dim * dim) throw LayoutError("vector length does not match dim^2");
    return Eigen::Map<const DenseMatrix>(v.data(), dim, dim);
}

ComplexVector trace_functional(Index dim) {
    ComplexVector t = ComplexVector::Zero(dim * dim);
    for (Index j = 0; j < dim; ++j) t(j * dim + j) = 1.0;
    return t;
}

}  // namespace mollow
