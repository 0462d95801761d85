#include <algorithm>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "gqcm/models.hpp"
#include "gqcm/rng.hpp"
#include "gqcm/spectra.hpp"

using namespace gqcm;

TEST_CASE("closed-form 2x2 upper-triangular decomposition") {
    Mat h(2, 2);
    h << 1, 1, 0, 2;
    BiorthogonalSystem sys = diagonalize_nonhermitian(h);
    REQUIRE(sys.diagonalizable);
    CHECK(std::abs(sys.eigenvalues[0] - 1.0) < 1e-12);
    CHECK(std::abs(sys.eigenvalues[1] - 2.0) < 1e-12);
    // right vectors: (1, 0) and (1, 1)/sqrt(2)
    CHECK(std::abs(sys.right(1, 0)) < 1e-14);
    CHECK(std::abs(sys.right(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(sys.right(0, 1) - 1.0 / std::sqrt(2.0)) < 1e-14);
    CHECK(std::abs(sys.right(1, 1) - 1.0 / std::sqrt(2.0)) < 1e-14);
    // left vectors are the inverse-adjoint columns: (1, -1) and (0, sqrt(2))
    CHECK(std::abs(sys.left(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(sys.left(1, 0) + 1.0) < 1e-14);
    CHECK(std::abs(sys.left(0, 1)) < 1e-14);
    CHECK(std::abs(sys.left(1, 1) - std::sqrt(2.0)) < 1e-14);
    CHECK(sys.biorthogonality_error() < 1e-14);
    CHECK(sys.reconstruction_error(h) < 1e-14);
}

TEST_CASE("eigenvalues sort by (Re, Im) ascending") {
    Mat h = Mat::Zero(4, 4);
    h(0, 0) = cxd(2, -1);
    h(1, 1) = cxd(-1, 3);
    h(2, 2) = cxd(2, 1);
    h(3, 3) = cxd(0, 0);
    BiorthogonalSystem sys = diagonalize_nonhermitian(h);
    REQUIRE(sys.diagonalizable);
    CHECK(sys.eigenvalues[0] == cxd(-1, 3));
    CHECK(sys.eigenvalues[1] == cxd(0, 0));
    CHECK(sys.eigenvalues[2] == cxd(2, -1));
    CHECK(sys.eigenvalues[3] == cxd(2, 1));
}

TEST_CASE("Hermitian input: left equals right, all eigenvalues real") {
    std::mt19937_64 g(3);
    Mat a(8, 8);
    for (long i = 0; i < 8; ++i)
        for (long j = 0; j < 8; ++j) {
            const auto [x, y] = rng::gaussian_pair(g);
            a(i, j) = cxd(x, y);
        }
    Mat h = a + a.adjoint().eval();
    BiorthogonalSystem sys = diagonalize_nonhermitian(h);
    REQUIRE(sys.diagonalizable);
    CHECK((sys.left - sys.right).cwiseAbs().maxCoeff() < 1e-10);
    for (long k = 0; k < 8; ++k) CHECK(std::abs(sys.eigenvalues[k].imag()) < 1e-12);
    CHECK(sys.condition_number < 1e3);
    CHECK(real_eigenvalue_indices(sys).size() == 8);
}

TEST_CASE("cross-check against Eigen's ComplexEigenSolver") {
    std::mt19937_64 g(11);
    Mat h(6, 6);
    for (long i = 0; i < 6; ++i)
        for (long j = 0; j < 6; ++j) {
            const auto [x, y] = rng::gaussian_pair(g);
            h(i, j) = cxd(x, y);
        }
    BiorthogonalSystem sys = diagonalize_nonhermitian(h);
    REQUIRE(sys.diagonalizable);

    Eigen::ComplexEigenSolver<Mat> es(h);
    std::vector<cxd> ours(sys.eigenvalues.data(), sys.eigenvalues.data() + 6);
    std::vector<cxd> ref(es.eigenvalues().data(), es.eigenvalues().data() + 6);
    auto lt = [](cxd a, cxd b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(ref.begin(), ref.end(), lt);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(ours[static_cast<std::size_t>(k)] -
                                               ref[static_cast<std::size_t>(k)]) < 1e-10);
}

TEST_CASE("eigen-residuals, completeness, and the adjoint role swap") {
    LeeYangParams p{4, 0.5, 0.5};
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    OperatorBasis cat = spin_basis_catalog(b);
    Mat h = Mat(realize(cat, lee_yang_coefficients(p, cat)));
    BiorthogonalSystem sys = diagonalize_nonhermitian(h, b);
    REQUIRE(sys.diagonalizable);

    const double scale = h.norm();
    for (long k = 0; k < sys.dimension(); ++k) {
        const Vec r = sys.right.col(k), l = sys.left.col(k);
        CHECK((h * r - sys.eigenvalues[k] * r).norm() < 1e-10 * scale);
        // the left vector is a right eigenvector of the adjoint at conj(eps)
        CHECK((h.adjoint() * l - std::conj(sys.eigenvalues[k]) * l).norm() < 1e-10 * scale);
    }
    // completeness: sum_k |R_k><L_k| = identity
    CHECK((sys.right * sys.left.adjoint() - Mat::Identity(16, 16)).cwiseAbs().maxCoeff() <
          1e-8);
    CHECK(sys.biorthogonality_error() < 1e-8);
    CHECK(sys.reconstruction_error(h) < 1e-8);

    // pair() hands back normalized pairs with the matching energy
    BiorthogonalPair pr = sys.pair(3);
    CHECK(std::abs(inner(pr.left, pr.right) - cxd(1, 0)) < 1e-12);
    REQUIRE(pr.energy.has_value());
    CHECK(*pr.energy == sys.eigenvalues[3]);

    // the adjoint spectrum is the conjugate multiset
    BiorthogonalSystem adj = diagonalize_nonhermitian(Mat(h.adjoint()), b);
    Vec conj_sorted = sys.eigenvalues.conjugate();
    std::sort(conj_sorted.data(), conj_sorted.data() + conj_sorted.size(),
              [](cxd a, cxd b) {
                  return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
              });
    CHECK((adj.eigenvalues - conj_sorted).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("sparse and dense inputs agree") {
    LeeYangParams p{3, 0.5, 0.3};
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 3);
    OperatorBasis cat = spin_basis_catalog(b);
    SpMat hs = realize(cat, lee_yang_coefficients(p, cat));
    BiorthogonalSystem a = diagonalize_nonhermitian(hs, b);
    BiorthogonalSystem d = diagonalize_nonhermitian(Mat(hs), b);
    CHECK((a.eigenvalues - d.eigenvalues).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.right - d.right).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("defective and ill-conditioned matrices are rejected") {
    Mat jordan(2, 2);
    jordan << 0, 1, 0, 0;
    BiorthogonalSystem sys = diagonalize_nonhermitian(jordan);
    CHECK_FALSE(sys.diagonalizable);
    CHECK_THROWS_AS(sys.pair(0), NotDiagonalizableError);

    // a perfectly fine matrix fails an absurdly tight condition limit
    Mat ok(2, 2);
    ok << 1, 0, 0, 2;
    CHECK_FALSE(diagonalize_nonhermitian(ok, nullptr, 0.5).diagonalizable);
    CHECK(diagonalize_nonhermitian(ok).diagonalizable);
}

TEST_CASE("pair() without a sector basis is refused") {
    Mat h(2, 2);
    h << 1, 0, 0, 2;
    BiorthogonalSystem sys = diagonalize_nonhermitian(h);
    REQUIRE(sys.diagonalizable);
    CHECK_THROWS_AS(sys.pair(0), std::invalid_argument);
    CHECK_THROWS_AS(diagonalize_nonhermitian(h, make_basis(SectorKind::SpinHalfChain, 2)).pair(5),
                    std::invalid_argument);
}

TEST_CASE("real_eigenvalue_indices splits the spectrum at the tolerance") {
    LeeYangParams p{4, 0.5, 0.7};
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    OperatorBasis cat = spin_basis_catalog(b);
    BiorthogonalSystem sys =
        diagonalize_nonhermitian(Mat(realize(cat, lee_yang_coefficients(p, cat))), b);
    REQUIRE(sys.diagonalizable);
    const std::vector<long> real_k = real_eigenvalue_indices(sys, 1e-9);
    CHECK(!real_k.empty());
    std::vector<bool> flagged(static_cast<std::size_t>(sys.dimension()), false);
    for (long k : real_k) {
        CHECK(std::abs(sys.eigenvalues[k].imag()) <= 1e-9);
        flagged[static_cast<std::size_t>(k)] = true;
    }
    for (long k = 0; k < sys.dimension(); ++k)
        if (!flagged[static_cast<std::size_t>(k)])
            CHECK(std::abs(sys.eigenvalues[k].imag()) > 1e-9);
}

TEST_CASE("diagonalize_hermitian: closed form, order, orthonormality") {
    Mat c(2, 2);
    c << 2, cxd(0, 1), cxd(0, -1), 2;
    HermitianSpectrum s = diagonalize_hermitian(c);
    CHECK(s.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(s.eigenvalues[1] == doctest::Approx(3.0));
    CHECK((s.vectors.adjoint() * s.vectors - Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK((c * s.vectors.col(0) - s.eigenvalues[0] * s.vectors.col(0)).norm() < 1e-14);

    // visibly non-Hermitian input is rejected, not silently averaged
    Mat bad(2, 2);
    bad << 0, 1, 0, 0;
    CHECK_THROWS_AS(diagonalize_hermitian(bad), std::invalid_argument);
    // rounding-level asymmetry is symmetrized away
    Mat nearly = c;
    nearly(0, 1) += cxd(1e-15, 0);
    CHECK_NOTHROW(diagonalize_hermitian(nearly));
}
