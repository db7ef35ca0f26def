// SPDX-License-Identifier: Apache-2.0
//
// isac-clutter: subspace clutter removal and OFDM radar simulation
// Copyright (C) 2026 The isac-clutter authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Complex dense kernels shared by the rest of the library: a Gram-route thin
// SVD, unnormalised DFTs, Hermitian least-squares projections and the
// vectorisation convention used for CSI frames.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when a computation cannot produce a trustworthy result
/// (non-finite input, eigensolver failure, singular system).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thin SVD `C = U diag(sigma) Vh`.
///
/// `left_vectors` is K x r, `singular_values` has r entries in descending
/// order and `right_vectors_h` holds the first `right_vectors_h.rows()` right
/// singular vectors as conjugated rows. With r = min(K, Q).
struct SvdResult {
    ComplexMatrix left_vectors;
    RealVector singular_values;
    ComplexMatrix right_vectors_h;

    Index rank() const { return singular_values.size(); }
};

namespace detail {

// Two passes of modified Gram-Schmidt over the columns of `v`. Columns that
// collapse (numerically dependent on their predecessors) are replaced by the
// next canonical basis vector that survives orthogonalisation.
inline void orthonormalize_columns(ComplexMatrix& v)
{
    const Index rows = v.rows();
    Index next_unit = 0;
    for (Index j = 0; j < v.cols(); ++j) {
        ComplexVector col = v.col(j);
        double original = col.norm();
        auto sweep = [&](ComplexVector& x) {
            for (int pass = 0; pass < 2; ++pass) {
                for (Index i = 0; i < j; ++i) {
                    x -= v.col(i) * v.col(i).dot(x);
                }
            }
        };
        sweep(col);
        double remaining = col.norm();
        while (!(original > 0.0) || remaining <= 1e-10 * original) {
            if (next_unit >= rows) {
                throw NumericError("orthonormalize_columns: cannot complete basis");
            }
            col = ComplexVector::Unit(rows, next_unit++);
            original = 1.0;
            sweep(col);
            remaining = col.norm();
        }
        v.col(j) = col / remaining;
    }
}

inline void require_finite(const ComplexMatrix& m, const char* what)
{
    if (!m.allFinite()) {
        throw NumericError(std::string(what) + ": input contains NaN or Inf");
    }
}

// Eigen-decomposition of a Hermitian matrix with eigenvalues returned in
// descending order (and matching eigenvector columns).
inline std::pair<RealVector, ComplexMatrix> hermitian_eig_descending(const ComplexMatrix& gram)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(gram);
    if (solver.info() != Eigen::Success) {
        throw NumericError("hermitian eigensolver did not converge");
    }
    RealVector values = solver.eigenvalues().reverse();
    ComplexMatrix vectors = solver.eigenvectors().rowwise().reverse();
    return {values, vectors};
}

// Given `w` whose columns are B^H u_i (so that ||w_i|| is the singular value),
// normalise, restore descending order and orthonormalise.
inline RealVector normalise_partner_vectors(ComplexMatrix& w, ComplexMatrix& partner)
{
    const Index n = w.cols();
    RealVector sigma(n);
    for (Index i = 0; i < n; ++i) {
        sigma(i) = w.col(i).norm();
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sigma(a) > sigma(b); });
    ComplexMatrix w_sorted(w.rows(), n);
    ComplexMatrix p_sorted(partner.rows(), partner.cols());
    RealVector s_sorted(n);
    for (Index i = 0; i < n; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        s_sorted(i) = sigma(src);
        w_sorted.col(i) = sigma(src) > 0.0 ? ComplexVector(w.col(src) / sigma(src)) : ComplexVector::Zero(w.rows());
        p_sorted.col(i) = partner.col(src);
    }
    // Columns of the partner beyond n keep their place.
    for (Index i = n; i < partner.cols(); ++i) {
        p_sorted.col(i) = partner.col(i);
    }
    orthonormalize_columns(w_sorted);
    w = std::move(w_sorted);
    partner = std::move(p_sorted);
    return s_sorted;
}

} // namespace detail

/// Thin SVD computed through the smaller Gram matrix.
///
/// For K <= Q the K x K matrix C C^H is eigen-decomposed and the right vectors
/// are recovered as C^H u_i / sigma_i, so the cost is O(K^2 Q + K^3). For K > Q
/// the roles are swapped. `right_vectors` limits how many right singular
/// vectors are formed (negative means all); singular values are always complete.
inline SvdResult svd_thin(const ComplexMatrix& c, Index right_vectors = -1)
{
    if (c.rows() < 1 || c.cols() < 1) {
        throw std::invalid_argument("svd_thin: empty matrix");
    }
    detail::require_finite(c, "svd_thin");

    const Index k = c.rows();
    const Index q = c.cols();
    SvdResult out;

    if (k <= q) {
        ComplexMatrix gram = ComplexMatrix::Zero(k, k);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(c);
        gram.triangularView<Eigen::StrictlyUpper>() = gram.adjoint();
        auto [lambda, u] = detail::hermitian_eig_descending(gram);

        const Index nv = right_vectors < 0 ? k : std::min(right_vectors, k);
        ComplexMatrix w = c.adjoint() * u.leftCols(nv);
        RealVector sigma_head = detail::normalise_partner_vectors(w, u);

        out.singular_values.resize(k);
        out.singular_values.head(nv) = sigma_head;
        for (Index i = nv; i < k; ++i) {
            out.singular_values(i) = std::sqrt(std::max(lambda(i), 0.0));
        }
        out.left_vectors = std::move(u);
        out.right_vectors_h = w.adjoint();
    } else {
        ComplexMatrix gram = ComplexMatrix::Zero(q, q);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(c.adjoint());
        gram.triangularView<Eigen::StrictlyUpper>() = gram.adjoint();
        auto [lambda, v] = detail::hermitian_eig_descending(gram);

        ComplexMatrix w = c * v;
        RealVector sigma = detail::normalise_partner_vectors(w, v);
        const Index nv = right_vectors < 0 ? q : std::min(right_vectors, q);
        out.singular_values = sigma;
        out.left_vectors = std::move(w);
        out.right_vectors_h = v.leftCols(nv).adjoint();
    }

    if (!out.right_vectors_h.allFinite() || !out.singular_values.allFinite()) {
        throw NumericError("svd_thin: produced non-finite values");
    }
    return out;
}

enum class DftDirection { Forward, Inverse };

/// Smallest power of two that is >= n (n >= 1).
constexpr std::size_t pad_pow2(std::size_t n)
{
    return n <= 1 ? 1 : std::bit_ceil(n);
}

/// Reusable unnormalised 1-D transform engine; caches twiddle factors per
/// length. Not safe to share between threads.
class Dft {
public:
    Dft() { fft_.SetFlag(Eigen::FFT<double>::Unscaled); }

    /// Forward computes sum_l x_l exp(-j 2 pi l m / P'), inverse uses the
    /// positive exponent. Neither direction applies a 1/P' factor.
    ComplexVector operator()(const Eigen::Ref<const ComplexVector>& x, DftDirection direction, std::size_t padded_length)
    {
        if (padded_length < static_cast<std::size_t>(x.size())) {
            throw std::invalid_argument("dft_1d: padded_length shorter than input");
        }
        if (padded_length == 0) {
            return ComplexVector();
        }
        in_.assign(padded_length, cplx{0.0, 0.0});
        std::copy(x.data(), x.data() + x.size(), in_.begin());
        if (direction == DftDirection::Forward) {
            fft_.fwd(out_, in_);
        } else {
            fft_.inv(out_, in_);
        }
        return Eigen::Map<ComplexVector>(out_.data(), static_cast<Index>(out_.size()));
    }

private:
    Eigen::FFT<double> fft_;
    std::vector<cplx> in_;
    std::vector<cplx> out_;
};

/// Zero-padded, unnormalised DFT of `x` to `padded_length` points.
inline ComplexVector dft_1d(const Eigen::Ref<const ComplexVector>& x, DftDirection direction, std::size_t padded_length)
{
    Dft dft;
    return dft(x, direction, padded_length);
}

/// Column-major vectorisation: entry (n, m) of an N x M matrix lands at
/// index m * N + n.
inline ComplexVector vectorize(const ComplexMatrix& h)
{
    return Eigen::Map<const ComplexVector>(h.data(), h.size());
}

/// Exact inverse of `vectorize`.
inline ComplexMatrix reshape(const Eigen::Ref<const ComplexVector>& v, Index rows, Index cols)
{
    if (rows < 0 || cols < 0 || v.size() != rows * cols) {
        throw std::invalid_argument("reshape: length does not match rows * cols");
    }
    return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

/// Which space of a basis block a projection targets.
///   Row:    basis is K x M, right-hand sides are rows (R x M).
///   Column: basis is N x K, right-hand sides are columns (N x R).
enum class ProjectionSpace { Row, Column };

struct ProjectionSolution {
    ComplexMatrix coefficients;
    bool regularized = false;
};

/// Orthogonal projection onto the row or column space of a basis block.
///
/// The Gram matrix of the basis is factorised once (Cholesky) and reused for
/// every right-hand side. When its smallest eigenvalue drops below
/// 1e-12 * trace / K the Gram matrix is diagonally loaded by that amount and
/// the projector reports itself as regularized.
class SubspaceProjector {
public:
    SubspaceProjector() = default;

    SubspaceProjector(ComplexMatrix basis, ProjectionSpace space)
        : basis_(std::move(basis)), space_(space)
    {
        if (basis_.size() == 0) {
            throw std::invalid_argument("SubspaceProjector: empty basis");
        }
        detail::require_finite(basis_, "SubspaceProjector");
        ComplexMatrix gram = space_ == ProjectionSpace::Row ? ComplexMatrix(basis_ * basis_.adjoint())
                                                            : ComplexMatrix(basis_.adjoint() * basis_);
        const Index k = gram.rows();
        const double loading = 1e-12 * gram.trace().real() / static_cast<double>(k);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(gram, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success) {
            throw NumericError("SubspaceProjector: eigenvalue check failed");
        }
        if (eig.eigenvalues().minCoeff() < loading) {
            gram.diagonal().array() += loading;
            regularized_ = true;
        }
        llt_.compute(gram);
        if (llt_.info() != Eigen::Success || !(loading > 0.0)) {
            throw NumericError("SubspaceProjector: Gram matrix is singular");
        }
    }

    bool regularized() const { return regularized_; }
    ProjectionSpace space() const { return space_; }
    const ComplexMatrix& basis() const { return basis_; }

    /// Coefficients `a` such that the projection is a * basis (row space)
    /// or basis * a (column space).
    ComplexMatrix coefficients(const ComplexMatrix& rhs) const
    {
        if (space_ == ProjectionSpace::Row) {
            check_cols(rhs.cols(), basis_.cols());
            return llt_.solve(basis_ * rhs.adjoint()).adjoint();
        }
        check_cols(rhs.rows(), basis_.rows());
        return llt_.solve(basis_.adjoint() * rhs);
    }

    ComplexMatrix projection(const ComplexMatrix& rhs) const
    {
        const ComplexMatrix a = coefficients(rhs);
        return space_ == ProjectionSpace::Row ? ComplexMatrix(a * basis_) : ComplexMatrix(basis_ * a);
    }

    /// rhs minus its projection.
    ComplexMatrix residual(const ComplexMatrix& rhs) const { return rhs - projection(rhs); }

private:
    static void check_cols(Index got, Index want)
    {
        if (got != want) {
            throw std::invalid_argument("SubspaceProjector: right-hand side dimension mismatch");
        }
    }

    ComplexMatrix basis_;
    ProjectionSpace space_ = ProjectionSpace::Row;
    Eigen::LLT<ComplexMatrix> llt_;
    bool regularized_ = false;
};

/// One-shot projection coefficients of `rhs` onto the requested space of
/// `basis`. See SubspaceProjector.
inline ProjectionSolution solve_ls_projection(const ComplexMatrix& basis, const ComplexMatrix& rhs, ProjectionSpace space)
{
    SubspaceProjector projector(basis, space);
    return {projector.coefficients(rhs), projector.regularized()};
}

} // namespace isac
