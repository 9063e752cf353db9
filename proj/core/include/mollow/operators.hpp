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

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mollow {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

enum class Storage { Dense, Sparse };

/// Operators up to this Hilbert-space dimension are stored densely.
inline constexpr Index kDenseStorageMaxDim = 16;

inline Storage storage_for_dimension(Index dim) {
    return dim > kDenseStorageMaxDim ? Storage::Sparse : Storage::Dense;
}

/// A complex matrix held either densely or in compressed-column form.
///
/// Mixed-storage arithmetic yields a sparse result; otherwise storage is kept.
class ComplexMatrix {
public:
    ComplexMatrix() : data_(DenseMatrix()) {}
    explicit ComplexMatrix(DenseMatrix m) : data_(std::move(m)) {}
    explicit ComplexMatrix(SparseMatrix m) : data_(std::move(m)) {}

    static ComplexMatrix identity(Index dim, Storage storage);
    static ComplexMatrix zero(Index rows, Index cols, Storage storage);

    Index rows() const;
    Index cols() const;
    Storage storage() const { return is_sparse() ? Storage::Sparse : Storage::Dense; }
    bool is_sparse() const { return std::holds_alternative<SparseMatrix>(data_); }

    DenseMatrix to_dense() const;
    SparseMatrix to_sparse() const;
    ComplexMatrix with_storage(Storage storage) const;

    const DenseMatrix& dense() const { return std::get<DenseMatrix>(data_); }
    const SparseMatrix& sparse() const { return std::get<SparseMatrix>(data_); }

    Complex coeff(Index row, Index col) const;
    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conjugate() const;
    double max_abs() const;

    friend ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
    friend ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
    friend ComplexMatrix operator*(Complex s, const ComplexMatrix& a);

private:
    std::variant<DenseMatrix, SparseMatrix> data_;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Largest elementwise |a - b|; throws LayoutError on shape mismatch.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_hermitian(const ComplexMatrix& m, double tol);

/// Tensor-product structure [emitter, sensor_1, ..., sensor_N].
///
/// Slot 0 is the most significant digit of a composite basis index, matching
/// the Kronecker product order emitter (x) sensor_1 (x) ... (x) sensor_N.
class SpaceLayout {
public:
    explicit SpaceLayout(std::vector<Index> dims);

    const std::vector<Index>& dims() const { return dims_; }
    Index slots() const { return static_cast<Index>(dims_.size()); }
    Index dim(Index slot) const;
    Index total_dim() const { return total_; }

    /// Local occupation of `slot` in composite basis state `state`.
    Index local_index(Index state, Index slot) const;

    friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

private:
    std::vector<Index> dims_;
    std::vector<Index> strides_;
    Index total_ = 1;
};

/// Truncated lowering operator: entries sqrt(m) at (m-1, m).
ComplexMatrix annihilation_op(Index dim);

/// identity (x) ... (x) op (x) ... (x) identity, with op in `slot`.
ComplexMatrix lift(const ComplexMatrix& op, Index slot, const SpaceLayout& layout);

struct Dissipator {
    double rate = 0.0;
    ComplexMatrix collapse;
};

/// Matrix element (i, j) of rho lives at vector index j * total_dim + i.
enum class Vectorization { ColumnStacking };

/// Generator of d(rho)/dt = i[rho, H] + sum_k (rate_k / 2)(2 c rho c^+ - c^+ c rho - rho c^+ c).
struct Liouvillian {
    SparseMatrix generator;
    SpaceLayout layout;
    Vectorization vectorization = Vectorization::ColumnStacking;

    Index dim() const { return generator.rows(); }
};

/// Assemble the generator. `assembly` picks the Kronecker path; both give the
/// same matrix to rounding and the result is always stored sparse.
Liouvillian build_liouvillian(const ComplexMatrix& hamiltonian,
                              std::span<const Dissipator> dissipators,
                              const SpaceLayout& layout,
                              Storage assembly);

Liouvillian build_liouvillian(const ComplexMatrix& hamiltonian,
                              std::span<const Dissipator> dissipators,
                              const SpaceLayout& layout);

inline constexpr double kHermiticityTolerance = 1e-12;

ComplexVector vectorize(const DenseMatrix& rho);
DenseMatrix unvectorize(const ComplexVector& v, Index dim);

/// Row vector vec(I)^T, i.e. the trace functional in column-stacking order.
ComplexVector trace_functional(Index dim);

}  // namespace mollow
