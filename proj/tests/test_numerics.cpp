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

#include <catch2/catch_amalgamated.hpp>

#include "isac/numerics.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace isac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ComplexMatrix random_matrix(Index rows, Index cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) {
        m.data()[i] = cplx{g(rng), g(rng)};
    }
    return m;
}

// Projector onto the span of the first r right singular vectors.
ComplexMatrix right_projector(const SvdResult& s, Index r)
{
    const ComplexMatrix vh = s.right_vectors_h.topRows(r);
    return vh.adjoint() * vh;
}

// Fixed 4 x 7 complex instance used for the frozen singular values.
ComplexMatrix fixed_4x7()
{
    Eigen::MatrixXd re(4, 7), im(4, 7);
    re << 1, -2, 0, 3, 1, 0, 2, 0, 1, 4, -1, 2, 1, -3, 2, 0, 1, 1, -1, 3, 0, -1, 2, 2, 0, 1, -2, 1;
    im << 0, 1, -1, 2, 0, 1, 1, 1, 0, 2, 0, -2, 1, 0, -1, 1, 0, 3, 1, 0, 2, 2, -1, 1, 0, 0, 1, -1;
    ComplexMatrix c(4, 7);
    c.real() = re;
    c.imag() = im;
    return c;
}

} // namespace

TEST_CASE("svd_thin - identity")
{
    const SvdResult s = svd_thin(ComplexMatrix::Identity(2, 2));
    REQUIRE(s.singular_values.size() == 2);
    CHECK_THAT(s.singular_values(0), WithinAbs(1.0, 1e-14));
    CHECK_THAT(s.singular_values(1), WithinAbs(1.0, 1e-14));
    CHECK((right_projector(s, 2) - ComplexMatrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("svd_thin - rank one")
{
    ComplexVector a = random_matrix(5, 1, 1).col(0).normalized();
    ComplexVector b = random_matrix(9, 1, 2).col(0).normalized();
    const SvdResult s = svd_thin(a * b.adjoint());
    CHECK_THAT(s.singular_values(0), WithinAbs(1.0, 1e-12));
    for (Index i = 1; i < s.singular_values.size(); ++i) {
        CHECK(s.singular_values(i) < 1e-7);
    }
    // First right singular vector equals b up to a unit phase.
    const ComplexVector v1 = s.right_vectors_h.row(0).adjoint();
    CHECK_THAT(std::abs(v1.dot(b)), WithinAbs(1.0, 1e-12));
}

TEST_CASE("svd_thin - fixed 4x7 against reference singular values")
{
    // Reference values from an independent LAPACK SVD of the same matrix.
    const double expected[] = {8.284881368552263, 5.191802231876162, 4.707484414091677, 2.499103996472584};
    const ComplexMatrix c = fixed_4x7();
    const SvdResult s = svd_thin(c);
    for (int i = 0; i < 4; ++i) {
        CHECK_THAT(s.singular_values(i), WithinRel(expected[i], 1e-12));
    }
    // Projector against the eigenvectors of the explicit 7 x 7 Gram matrix C^H C.
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(c.adjoint() * c);
    const ComplexMatrix v = eig.eigenvectors().rightCols(4);
    const ComplexMatrix oracle = v * v.adjoint();
    CHECK((right_projector(s, 4) - oracle).norm() < 1e-10);
    for (Index r = 1; r <= 4; ++r) {
        const ComplexMatrix vr = eig.eigenvectors().rightCols(r);
        CHECK((right_projector(s, r) - vr * vr.adjoint()).norm() < 1e-10);
    }
}

TEST_CASE("svd_thin - invariants on random matrices")
{
    const std::pair<Index, Index> shapes[] = {{3, 3}, {6, 40}, {20, 300}, {100, 5000}, {9, 4}};
    std::uint64_t seed = 10;
    for (const auto& [k, q] : shapes) {
        const ComplexMatrix c = random_matrix(k, q, seed++);
        const SvdResult s = svd_thin(c);
        const Index r = std::min(k, q);
        REQUIRE(s.rank() == r);
        for (Index i = 0; i < r; ++i) {
            CHECK(s.singular_values(i) >= 0.0);
            if (i > 0) CHECK(s.singular_values(i) <= s.singular_values(i - 1));
        }
        const ComplexMatrix orth = s.right_vectors_h * s.right_vectors_h.adjoint();
        CHECK((orth - ComplexMatrix::Identity(r, r)).norm() < 1e-10 * std::sqrt(double(r)));
        const ComplexMatrix recon = s.left_vectors * s.singular_values.asDiagonal() * s.right_vectors_h;
        CHECK((recon - c).norm() <= 1e-8 * c.norm());
    }
}

TEST_CASE("svd_thin - projector matches full SVD oracle")
{
    const ComplexMatrix c = random_matrix(12, 60, 77);
    const SvdResult s = svd_thin(c);
    Eigen::JacobiSVD<ComplexMatrix> full(c, Eigen::ComputeThinV);
    for (Index l : {1, 3, 7, 12}) {
        const ComplexMatrix v = full.matrixV().leftCols(l);
        CHECK((right_projector(s, l) - v * v.adjoint()).norm() < 1e-9);
    }
}

TEST_CASE("svd_thin - rank deficient input keeps an orthonormal basis")
{
    const ComplexMatrix base = random_matrix(2, 30, 5);
    ComplexMatrix c(5, 30);
    c << base, base.row(0) * cplx(0.0, 2.0), base.row(1) * cplx(-1.0, 0.0), base.row(0) + base.row(1);
    const SvdResult s = svd_thin(c);
    CHECK(s.singular_values(2) < 1e-6 * s.singular_values(0));
    const ComplexMatrix orth = s.right_vectors_h * s.right_vectors_h.adjoint();
    CHECK((orth - ComplexMatrix::Identity(5, 5)).norm() < 1e-10);
}

TEST_CASE("svd_thin - partial right vectors")
{
    const ComplexMatrix c = random_matrix(8, 50, 9);
    const SvdResult all = svd_thin(c);
    const SvdResult head = svd_thin(c, 3);
    REQUIRE(head.right_vectors_h.rows() == 3);
    CHECK((head.singular_values - all.singular_values).norm() < 1e-10);
    CHECK((right_projector(head, 3) - right_projector(all, 3)).norm() < 1e-10);
    CHECK(svd_thin(c, 0).right_vectors_h.rows() == 0);
}

TEST_CASE("svd_thin - rejects bad input")
{
    CHECK_THROWS_AS(svd_thin(ComplexMatrix(0, 3)), std::invalid_argument);
    ComplexMatrix c = random_matrix(3, 4, 1);
    c(1, 2) = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(svd_thin(c), NumericError);
    c(1, 2) = cplx(std::numeric_limits<double>::infinity(), 0.0);
    CHECK_THROWS_AS(svd_thin(c), NumericError);
}

TEST_CASE("dft_1d - closed form instances")
{
    ComplexVector delta = ComplexVector::Zero(4);
    delta(0) = 1.0;
    const ComplexVector d = dft_1d(delta, DftDirection::Forward, 4);
    for (Index i = 0; i < 4; ++i) CHECK(std::abs(d(i) - cplx(1.0, 0.0)) < 1e-15);

    const ComplexVector ones = ComplexVector::Ones(8);
    const ComplexVector o = dft_1d(ones, DftDirection::Forward, 8);
    CHECK(std::abs(o(0) - cplx(8.0, 0.0)) < 1e-12);
    for (Index i = 1; i < 8; ++i) CHECK(std::abs(o(i)) < 1e-12);

    ComplexVector tone(8);
    for (Index l = 0; l < 8; ++l) tone(l) = std::polar(1.0, -2.0 * std::numbers::pi * 3.0 * double(l) / 8.0);
    // Direct summation oracle: the sign convention puts this tone at bin 5.
    const ComplexVector t = dft_1d(tone, DftDirection::Forward, 8);
    for (Index m = 0; m < 8; ++m) {
        cplx sum{0.0, 0.0};
        for (Index l = 0; l < 8; ++l) sum += tone(l) * std::polar(1.0, -2.0 * std::numbers::pi * double(l * m) / 8.0);
        CHECK(std::abs(t(m) - sum) < 1e-12);
    }
    // e^{-j 2 pi 3 l / 8} is the conjugate tone; the inverse transform concentrates it at index 3.
    const ComplexVector ti = dft_1d(tone, DftDirection::Inverse, 8);
    CHECK_THAT(std::abs(ti(3)), WithinAbs(8.0, 1e-12));
    for (Index m = 0; m < 8; ++m) {
        if (m != 3) CHECK(std::abs(ti(m)) < 1e-12);
    }
    CHECK_THAT(std::abs(t(5)), WithinAbs(8.0, 1e-12));
}

TEST_CASE("dft_1d - round trip and Parseval with padding")
{
    const ComplexVector x = random_matrix(37, 1, 3).col(0);
    const std::size_t p = pad_pow2(37);
    REQUIRE(p == 64);
    const ComplexVector f = dft_1d(x, DftDirection::Forward, p);
    const ComplexVector back = dft_1d(f, DftDirection::Inverse, p) / double(p);
    ComplexVector padded = ComplexVector::Zero(64);
    padded.head(37) = x;
    CHECK((back - padded).norm() < 1e-10);
    CHECK_THAT(x.squaredNorm(), WithinRel(f.squaredNorm() / double(p), 1e-8));
    CHECK_THROWS_AS(dft_1d(x, DftDirection::Forward, 16), std::invalid_argument);
}

TEST_CASE("pad_pow2 - values")
{
    STATIC_CHECK(pad_pow2(1584) == 2048);
    STATIC_CHECK(pad_pow2(1120) == 2048);
    STATIC_CHECK(pad_pow2(8) == 8);
    STATIC_CHECK(pad_pow2(1) == 1);
    STATIC_CHECK(pad_pow2(9) == 16);
}

TEST_CASE("vectorize - column-major convention")
{
    ComplexMatrix h(2, 2);
    h << 1.0, 2.0, 3.0, 4.0;
    const ComplexVector v = vectorize(h);
    CHECK(v(0) == cplx(1.0));
    CHECK(v(1) == cplx(3.0));
    CHECK(v(2) == cplx(2.0));
    CHECK(v(3) == cplx(4.0));

    const ComplexMatrix r = random_matrix(5, 7, 4);
    CHECK(reshape(vectorize(r), 5, 7) == r);
    CHECK_THROWS_AS(reshape(vectorize(r), 6, 7), std::invalid_argument);
    CHECK(1584 * 1120 == 1774080);
}

TEST_CASE("solve_ls_projection - in-space and orthogonal right-hand sides")
{
    const ComplexMatrix basis = random_matrix(3, 16, 21);
    const ComplexMatrix in_space = cplx(0.5, -1.0) * basis.row(0) + cplx(2.0, 0.0) * basis.row(2);
    SubspaceProjector proj(basis, ProjectionSpace::Row);
    CHECK(proj.residual(in_space).norm() <= 1e-10 * in_space.norm());

    // Remove the span from a random vector to build an orthogonal one.
    const ComplexMatrix orth = proj.residual(random_matrix(1, 16, 22));
    const ProjectionSolution sol = solve_ls_projection(basis, orth, ProjectionSpace::Row);
    CHECK(sol.coefficients.norm() < 1e-10);
    CHECK((proj.residual(orth) - orth).norm() < 1e-10);
}

TEST_CASE("solve_ls_projection - dense pseudo-inverse oracle")
{
    const ComplexMatrix c = random_matrix(3, 16, 31);
    const ComplexMatrix rhs = random_matrix(1, 16, 32);
    // Row space: projector on row vectors is C^H (C C^H)^-1 C applied from the right.
    const ComplexMatrix p_row = c.adjoint() * (c * c.adjoint()).inverse() * c;
    SubspaceProjector row(c, ProjectionSpace::Row);
    CHECK((row.projection(rhs) - (p_row.transpose() * rhs.transpose()).transpose()).norm() < 1e-10);

    // Column space with an N x K block.
    const ComplexMatrix b = c.transpose();
    const ComplexMatrix col_rhs = rhs.transpose();
    const ComplexMatrix p_col = b * (b.adjoint() * b).inverse() * b.adjoint();
    SubspaceProjector col(b, ProjectionSpace::Column);
    CHECK((col.projection(col_rhs) - p_col * col_rhs).norm() < 1e-10);
    CHECK_FALSE(col.regularized());
}

TEST_CASE("solve_ls_projection - collinear basis is regularized")
{
    const ComplexMatrix base = random_matrix(1, 10, 41);
    ComplexMatrix c(2, 10);
    c << base, base * cplx(0.0, 3.0);
    const ProjectionSolution sol = solve_ls_projection(c, base, ProjectionSpace::Row);
    CHECK(sol.regularized);
    CHECK(sol.coefficients.allFinite());
    SubspaceProjector proj(c, ProjectionSpace::Row);
    CHECK(proj.residual(base).norm() < 1e-6 * base.norm());
    CHECK_THROWS_AS(SubspaceProjector(ComplexMatrix::Zero(2, 4), ProjectionSpace::Row), NumericError);
    CHECK_THROWS_AS(proj.coefficients(random_matrix(1, 9, 1)), std::invalid_argument);
}
