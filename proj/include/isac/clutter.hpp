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

// Clutter subspace calibration and removal.
//
// Offline, K clutter-only acquisitions are vectorised into the rows of
// C (K x Q). The L strongest right singular vectors of C span the clutter
// subspace; they are stored as basis_h (L x Q) together with the projection
// factor P' = C_hat (C_hat^H C_hat)^-1 (Q x L). At runtime the residual
// h - P' (basis_h h) costs O(QL).
//
// Per-subcarrier (ECA-C) and per-symbol (ECA-S) cancellers that project on
// the raw snapshots are provided as baselines.

#include "isac/numerics.hpp"
#include "isac/scene.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace isac {

/// Tag for the vectorisation order stored in files: q = m * N + n.
inline constexpr std::uint8_t kColumnMajor = 0;

using Sha256 = std::array<std::uint8_t, 32>;

/// K vectorised acquisitions stacked as rows of `c` (K x Q, Q = N * M).
struct ClutterSnapshots {
    Index n_rows = 0; ///< N subcarriers
    Index n_cols = 0; ///< M symbols
    ComplexMatrix c;

    Index count() const { return c.rows(); }
    Index dimension() const { return c.cols(); }

    /// Snapshot k as an N x M frame.
    ComplexMatrix frame(Index k) const { return reshape(c.row(k).transpose(), n_rows, n_cols); }
};

inline ClutterSnapshots stack_snapshots(std::span<const ComplexMatrix> frames)
{
    if (frames.empty()) {
        throw std::invalid_argument("stack_snapshots: need at least one frame");
    }
    ClutterSnapshots out;
    out.n_rows = frames.front().rows();
    out.n_cols = frames.front().cols();
    out.c.resize(static_cast<Index>(frames.size()), out.n_rows * out.n_cols);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        if (frames[k].rows() != out.n_rows || frames[k].cols() != out.n_cols) {
            throw std::invalid_argument("stack_snapshots: frames differ in dimensions");
        }
        out.c.row(static_cast<Index>(k)) = vectorize(frames[k]).transpose();
    }
    return out;
}

inline ClutterSnapshots stack_snapshots(std::span<const CsiFrame> frames)
{
    std::vector<ComplexMatrix> mats;
    mats.reserve(frames.size());
    for (const auto& f : frames) {
        mats.push_back(f.h);
    }
    return stack_snapshots(std::span<const ComplexMatrix>(mats));
}

/// SHA-256 over the snapshot payload in file order: snapshot-major, each
/// snapshot column-major, every entry as little-endian (re, im) float64.
inline Sha256 snapshot_hash(const ClutterSnapshots& snaps)
{
    static_assert(std::endian::native == std::endian::little, "hash assumes a little-endian host");
    Sha256 digest{};
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("snapshot_hash: cannot initialise SHA-256");
    }
    std::vector<cplx> row(static_cast<std::size_t>(snaps.dimension()));
    for (Index k = 0; k < snaps.count(); ++k) {
        Eigen::Map<ComplexVector>(row.data(), snaps.dimension()) = snaps.c.row(k).transpose();
        EVP_DigestUpdate(ctx, row.data(), row.size() * sizeof(cplx));
    }
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest.data(), &len);
    EVP_MD_CTX_free(ctx);
    return digest;
}

struct MdlEstimate {
    Index order = 0;
    bool pure_noise = false; ///< eigenvalues indistinguishable: no signal subspace
    RealVector scores;       ///< criterion value for every candidate order
};

/// Model order by the Wax-Kailath minimum description length criterion.
///
/// Eigenvalues are lambda_i = sigma_i^2 / Q, with Q acting as the sample count
/// and K as the number of variables:
///   MDL(k) = -Q (K - k) log(g_k / a_k) + k (2K - k) log(Q) / 2,
/// where g_k and a_k are the geometric and arithmetic means of lambda_{k..K-1}.
inline MdlEstimate estimate_order_mdl(const RealVector& singular_values, Index k_snapshots, Index q_samples)
{
    if (k_snapshots < 2 || q_samples < 1) {
        throw std::invalid_argument("estimate_order_mdl: need K >= 2 and Q >= 1");
    }
    if (singular_values.size() > k_snapshots || (singular_values.array() < 0.0).any()) {
        throw std::invalid_argument("estimate_order_mdl: expected at most K non-negative singular values");
    }
    const Index k = k_snapshots;
    const double q = static_cast<double>(q_samples);
    RealVector lambda = RealVector::Zero(k);
    lambda.head(singular_values.size()) = singular_values.array().square() / q;

    MdlEstimate out;
    const double top = lambda.maxCoeff();
    if (top <= 0.0 || (top - lambda.minCoeff()) <= 1e-12 * top) {
        out.pure_noise = true;
        out.scores = RealVector::Zero(k);
        return out;
    }

    out.scores.resize(k);
    for (Index order = 0; order < k; ++order) {
        const Index tail = k - order;
        const auto values = lambda.tail(tail);
        const double arith = values.mean();
        double log_ratio = 0.0;
        if (arith > 0.0) {
            if ((values.array() <= 0.0).any()) {
                log_ratio = -std::numeric_limits<double>::infinity();
            } else {
                log_ratio = values.array().log().mean() - std::log(arith);
            }
        }
        const double penalty = 0.5 * static_cast<double>(order) * static_cast<double>(2 * k - order) * std::log(q);
        out.scores(order) = -q * static_cast<double>(tail) * log_ratio + penalty;
    }
    out.scores.minCoeff(&out.order);
    out.pure_noise = out.order == 0;
    return out;
}

/// Requested clutter order: a fixed L, or estimated by MDL when empty.
struct OrderSpec {
    std::optional<Index> fixed;

    static OrderSpec automatic() { return {}; }
    static OrderSpec explicit_order(Index l) { return {l}; }
};

struct CalibrationReport {
    bool order_from_mdl = false;
    bool pure_noise = false;
    bool truncated = false; ///< requested L exceeded the numerical rank
    Index requested_order = 0;
    Index numerical_rank = 0;
};

/// Persistable result of the offline clutter acquisition.
struct ClutterCalibration {
    Index n_rows = 0;
    Index n_cols = 0;
    Index n_snapshots = 0;
    std::uint8_t convention = kColumnMajor;
    RealVector singular_values;     ///< all min(K, Q) values, descending
    ComplexMatrix basis_h;          ///< L x Q, C_hat^H; row i is conj(row i of V^H)
    ComplexMatrix projection_factor; ///< Q x L
    Sha256 snapshot_hash{};
    CalibrationReport report;

    Index order() const { return basis_h.rows(); }
    Index dimension() const { return n_rows * n_cols; }
};

/// Singular values at or below this fraction of the largest are treated as
/// zero. The Gram route resolves sigma only to about sqrt(eps) * sigma_max.
inline constexpr double kRankTolerance = 1e-7;

struct CalibrateOptions {
    OrderSpec order = OrderSpec::automatic();
    bool compute_hash = false;
};

inline ClutterCalibration calibrate(const ClutterSnapshots& snaps, const CalibrateOptions& options = {})
{
    const Index k = snaps.count();
    const Index q = snaps.dimension();
    if (k < 1 || q < 1 || snaps.n_rows * snaps.n_cols != q) {
        throw std::invalid_argument("calibrate: inconsistent snapshot dimensions");
    }
    CalibrationReport report;
    if (options.order.fixed) {
        const Index l = *options.order.fixed;
        if (l < 1 || l > k) {
            throw std::invalid_argument("calibrate: explicit order must satisfy 1 <= L <= K");
        }
        report.requested_order = l;
    }

    // Right vectors are only formed for the components that will be kept, so
    // an explicit order is known up front; MDL needs the spectrum first.
    RealVector sigma;
    std::optional<SvdResult> svd;
    if (!options.order.fixed) {
        // Eigenvalues of the Gram matrix are enough for the order estimate.
        svd = svd_thin(snaps.c, 0);
        sigma = svd->singular_values;
        if (k >= 2) {
            const MdlEstimate mdl = estimate_order_mdl(sigma.head(std::min(k, sigma.size())), k, q);
            report.requested_order = mdl.order;
            report.pure_noise = mdl.pure_noise;
        } else {
            report.requested_order = 1;
        }
        report.order_from_mdl = true;
    }

    if (report.requested_order > 0) {
        svd = svd_thin(snaps.c, report.requested_order);
        sigma = svd->singular_values;
    }

    const double top = sigma.size() > 0 ? sigma(0) : 0.0;
    report.numerical_rank = top > 0.0 ? (sigma.array() > kRankTolerance * top).count() : 0;
    Index order = report.requested_order;
    if (order > report.numerical_rank) {
        report.truncated = true;
        order = report.numerical_rank;
    }

    ClutterCalibration cal;
    cal.n_rows = snaps.n_rows;
    cal.n_cols = snaps.n_cols;
    cal.n_snapshots = k;
    cal.singular_values = sigma;
    cal.report = report;
    if (order > 0) {
        // The rows of C are vec(H_k)^T, so the clutter frames themselves lie in
        // the span of the conjugated right singular vectors: C_hat holds the
        // rows of V^H as its columns, and C_hat^H is their element-wise
        // conjugate.
        cal.basis_h = svd->right_vectors_h.topRows(order).conjugate();
        // P' = C_hat (C_hat^H C_hat)^-1, kept in this general form even though
        // the rows of basis_h are orthonormal.
        const ComplexMatrix gram = cal.basis_h * cal.basis_h.adjoint();
        Eigen::LLT<ComplexMatrix> llt(gram);
        if (llt.info() != Eigen::Success) {
            throw NumericError("calibrate: clutter basis Gram matrix is not positive definite");
        }
        cal.projection_factor = llt.solve(cal.basis_h).adjoint();
    } else {
        cal.basis_h.resize(0, q);
        cal.projection_factor.resize(q, 0);
    }
    if (options.compute_hash) {
        cal.snapshot_hash = snapshot_hash(snaps);
    }
    return cal;
}

inline ClutterCalibration calibrate(const ClutterSnapshots& snaps, OrderSpec order)
{
    return calibrate(snaps, CalibrateOptions{order, false});
}

/// h_hat = h - P' (basis_h h), reshaped back to N x M.
inline ComplexMatrix crap_remove(const ClutterCalibration& cal, const ComplexMatrix& h)
{
    if (cal.convention != kColumnMajor) {
        throw std::invalid_argument("crap_remove: unsupported vectorisation convention");
    }
    if (h.rows() != cal.n_rows || h.cols() != cal.n_cols) {
        throw std::invalid_argument("crap_remove: frame dimensions do not match calibration");
    }
    ComplexMatrix out = h;
    if (cal.order() == 0) {
        return out;
    }
    Eigen::Map<ComplexVector> v(out.data(), out.size());
    const ComplexVector coeffs = cal.basis_h * v;
    v.noalias() -= cal.projection_factor * coeffs;
    return out;
}

inline CsiFrame crap_remove(const ClutterCalibration& cal, const CsiFrame& frame)
{
    return {frame.config, crap_remove(cal, frame.h), frame.truth};
}

/// Baseline cancellers that project on the raw snapshots one subcarrier
/// (ECA-C, time domain) or one symbol (ECA-S, frequency domain) at a time.
/// The per-row / per-column Gram factorisations are built once in the
/// constructor and reused for every frame.
class EcaCanceller {
public:
    enum class Domain { Subcarrier, Symbol };

    EcaCanceller(const ClutterSnapshots& snaps, Domain domain)
        : n_rows_(snaps.n_rows), n_cols_(snaps.n_cols), domain_(domain)
    {
        const Index k = snaps.count();
        if (domain_ == Domain::Subcarrier) {
            projectors_.reserve(static_cast<std::size_t>(n_rows_));
            for (Index n = 0; n < n_rows_; ++n) {
                // C_{c,n}: K x M, row k is subcarrier n of snapshot k.
                ComplexMatrix block(k, n_cols_);
                for (Index m = 0; m < n_cols_; ++m) {
                    block.col(m) = snaps.c.col(m * n_rows_ + n);
                }
                projectors_.emplace_back(std::move(block), ProjectionSpace::Row);
                regularized_ = regularized_ || projectors_.back().regularized();
            }
        } else {
            projectors_.reserve(static_cast<std::size_t>(n_cols_));
            for (Index m = 0; m < n_cols_; ++m) {
                // C_{s,m}: N x K, column k is symbol m of snapshot k.
                ComplexMatrix block = snaps.c.middleCols(m * n_rows_, n_rows_).transpose();
                projectors_.emplace_back(std::move(block), ProjectionSpace::Column);
                regularized_ = regularized_ || projectors_.back().regularized();
            }
        }
    }

    Domain domain() const { return domain_; }
    /// True if any Gram matrix needed diagonal loading.
    bool regularized() const { return regularized_; }

    ComplexMatrix remove(const ComplexMatrix& h) const
    {
        if (h.rows() != n_rows_ || h.cols() != n_cols_) {
            throw std::invalid_argument("EcaCanceller: frame dimensions do not match snapshots");
        }
        ComplexMatrix out(n_rows_, n_cols_);
        if (domain_ == Domain::Subcarrier) {
            for (Index n = 0; n < n_rows_; ++n) {
                out.row(n) = projectors_[static_cast<std::size_t>(n)].residual(h.row(n));
            }
        } else {
            for (Index m = 0; m < n_cols_; ++m) {
                out.col(m) = projectors_[static_cast<std::size_t>(m)].residual(h.col(m));
            }
        }
        return out;
    }

    CsiFrame remove(const CsiFrame& frame) const { return {frame.config, remove(frame.h), frame.truth}; }

private:
    Index n_rows_;
    Index n_cols_;
    Domain domain_;
    std::vector<SubspaceProjector> projectors_;
    bool regularized_ = false;
};

inline ComplexMatrix eca_c_remove(const ClutterSnapshots& snaps, const ComplexMatrix& h)
{
    return EcaCanceller(snaps, EcaCanceller::Domain::Subcarrier).remove(h);
}

inline ComplexMatrix eca_s_remove(const ClutterSnapshots& snaps, const ComplexMatrix& h)
{
    return EcaCanceller(snaps, EcaCanceller::Domain::Symbol).remove(h);
}

} // namespace isac
