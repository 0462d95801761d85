#include <bit>
#include <complex>
#include <vector>

#include "doctest.h"
#include "gqcm/operators.hpp"

using namespace gqcm;

namespace {

// Independent dense oracle, built with nothing but Kronecker products.
// Site s lives on bit s (least significant), so in a Kronecker chain the
// site-0 factor comes LAST.
Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Mat pauli2(char axis) {
    Mat m(2, 2);
    const cxd I(0, 1);
    switch (axis) {
        case 'x': m << 0, 1, 1, 0; break;
        case 'y': m << 0, -I, I, 0; break;
        case 'z': m << 1, 0, 0, -1; break;  // bit clear = up = +1
        default: m.setIdentity();
    }
    return m;
}

// Dense Pauli string on the full 2^n register: factors[site] = axis or 0.
Mat pauli_oracle(int n, const std::vector<std::pair<int, char>>& factors) {
    std::vector<char> by_site(static_cast<std::size_t>(n), 0);
    for (const auto& [site, axis] : factors) by_site[static_cast<std::size_t>(site)] = axis;
    Mat m = pauli2(by_site[static_cast<std::size_t>(n - 1)]);
    for (int s = n - 2; s >= 0; --s) m = kron(m, pauli2(by_site[static_cast<std::size_t>(s)]));
    return m;
}

// Fock-space annihilation operator with the Jordan-Wigner string below the
// site: A_s = I x ... x a x Z x ... x Z (site order n-1 .. 0).
Mat jw_annihilate(int n, int s) {
    Mat a(2, 2), z(2, 2), id(2, 2);
    a << 0, 1, 0, 0;    // basis order (empty, occupied)
    z << 1, 0, 0, -1;   // (-1)^occupation
    id.setIdentity();
    Mat m = (n - 1 == s) ? a : id;
    for (int k = n - 2; k >= 0; --k) m = kron(m, k == s ? a : (k < s ? z : id));
    return m;
}

// Restrict a full-Fock matrix to a fixed-particle-number sector.
Mat project_to_sector(const Mat& fock, const SectorBasis& basis) {
    const long d = basis.dimension();
    Mat out(d, d);
    for (long r = 0; r < d; ++r)
        for (long c = 0; c < d; ++c) out(r, c) = fock(basis.config_of(r), basis.config_of(c));
    return out;
}

}  // namespace

TEST_CASE("pauli_string matches the Kronecker oracle site by site") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    for (int site = 0; site < 4; ++site) {
        for (char axis : {'x', 'y', 'z'}) {
            LocalOperator op = pauli_string(b, {{site, axis}});
            CHECK(Mat(op.matrix).isApprox(pauli_oracle(4, {{site, axis}}), 1e-15));
            CHECK(op.hermitian);
        }
    }
}

TEST_CASE("multi-site pauli strings multiply out correctly") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    const std::vector<std::vector<std::pair<int, char>>> cases = {
        {{0, 'x'}, {1, 'z'}}, {{1, 'y'}, {2, 'y'}}, {{3, 'z'}, {0, 'y'}},
        {{0, 'x'}, {1, 'y'}, {2, 'z'}, {3, 'x'}}};
    for (const auto& factors : cases) {
        LocalOperator op = pauli_string(b, factors);
        CHECK(Mat(op.matrix).isApprox(pauli_oracle(4, factors), 1e-15));
    }
    // empty factor list is the identity
    LocalOperator id = pauli_string(b, {});
    CHECK(Mat(id.matrix).isApprox(Mat::Identity(16, 16), 1e-15));
    CHECK(id.label == "id");
}

TEST_CASE("pauli_string validates its inputs") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 3);
    BasisPtr f = make_basis(SectorKind::FermionFixedNumber, 3, 1);
    CHECK_THROWS_AS(pauli_string(b, {{0, 'w'}}), std::invalid_argument);
    CHECK_THROWS_AS(pauli_string(b, {{0, 'x'}, {0, 'y'}}), std::invalid_argument);
    CHECK_THROWS_AS(pauli_string(b, {{3, 'x'}}), std::invalid_argument);
    CHECK_THROWS_AS(pauli_string(b, {{-1, 'x'}}), std::invalid_argument);
    CHECK_THROWS_AS(pauli_string(f, {{0, 'x'}}), std::invalid_argument);
}

TEST_CASE("pauli_string_sum equals the explicit shifted sum with wrap") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    LocalOperator zz = pauli_string_sum(b, {{0, 'z'}, {1, 'z'}});
    Mat expect = Mat::Zero(16, 16);
    for (int i = 0; i < 4; ++i)
        expect += pauli_oracle(4, {{i, 'z'}, {(i + 1) % 4, 'z'}});
    CHECK(Mat(zz.matrix).isApprox(expect, 1e-15));
    CHECK(zz.hermitian);
    CHECK_THROWS_AS(pauli_string_sum(b, {}), std::invalid_argument);
}

TEST_CASE("fermion terms match the Jordan-Wigner oracle, wrap bond included") {
    for (const auto& [n, p] : std::vector<std::pair<int, int>>{{4, 2}, {5, 2}, {5, 3}}) {
        BasisPtr b = make_basis(SectorKind::FermionFixedNumber, n, p);
        for (int i = 0; i < n; ++i) {
            const int j = (i + 1) % n;
            const Mat ai = jw_annihilate(n, i), aj = jw_annihilate(n, j);
            const Mat num = project_to_sector(ai.adjoint() * ai, *b);
            const Mat fwd = project_to_sector(ai.adjoint() * aj, *b);
            const Mat bwd = project_to_sector(aj.adjoint() * ai, *b);
            const Mat dens =
                project_to_sector(ai.adjoint() * ai * aj.adjoint() * aj, *b);
            CHECK(Mat(fermion_term(b, FermionTermKind::Number, i, i).matrix)
                      .isApprox(num, 1e-15));
            CHECK(Mat(fermion_term(b, FermionTermKind::Hop, i, j).matrix)
                      .isApprox(fwd, 1e-15));
            CHECK(Mat(fermion_term(b, FermionTermKind::Hop, j, i).matrix)
                      .isApprox(bwd, 1e-15));
            CHECK(Mat(fermion_term(b, FermionTermKind::DensityDensity, i, j).matrix)
                      .isApprox(dens, 1e-15));
        }
    }
}

TEST_CASE("forward and backward hops are exact adjoints") {
    BasisPtr b = make_basis(SectorKind::FermionFixedNumber, 6, 3);
    for (int i = 0; i < 6; ++i) {
        const int j = (i + 1) % 6;
        Mat fwd = Mat(fermion_term(b, FermionTermKind::Hop, i, j).matrix);
        Mat bwd = Mat(fermion_term(b, FermionTermKind::Hop, j, i).matrix);
        CHECK((fwd.adjoint() - bwd).norm() == 0.0);
    }
    CHECK_THROWS_AS(fermion_term(b, FermionTermKind::Hop, 2, 2), std::invalid_argument);
}

TEST_CASE("site-resolved spin catalog: order, labels, size") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    OperatorBasis cat = spin_basis_catalog(b);
    CHECK(cat.kind == BasisKind::SpinSiteResolved);
    CHECK(cat.size() == 3 * 4 + 9 * 4);
    const char axes[3] = {'x', 'y', 'z'};
    // on-site block: entry 3i+p is axis p at site i
    for (int i = 0; i < 4; ++i)
        for (int p = 0; p < 3; ++p)
            CHECK(Mat(cat[3 * i + p].matrix).isApprox(pauli_oracle(4, {{i, axes[p]}}), 1e-15));
    // bond block: entry 12 + 9i + 3p + q couples sites (i, i+1 mod 4)
    for (int i = 0; i < 4; ++i)
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q)
                CHECK(Mat(cat[12 + 9 * i + 3 * p + q].matrix)
                          .isApprox(pauli_oracle(4, {{i, axes[p]}, {(i + 1) % 4, axes[q]}}),
                                    1e-15));
    // labels unique
    for (int i = 0; i < cat.size(); ++i) CHECK(cat.index_of_label(cat[i].label) == i);
    CHECK(cat.index_of_label("no-such-op") == -1);
}

TEST_CASE("open-boundary catalogs drop the wrap bond") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    CHECK(spin_basis_catalog(b, false, true).size() == 3 * 4 + 9 * 3);
    BasisPtr f = make_basis(SectorKind::FermionFixedNumber, 4, 2);
    CHECK(fermion_basis_catalog(f).size() == 4 * 4);
    CHECK(fermion_basis_catalog(f, true).size() == 4 + 3 * 3);
}

TEST_CASE("translation-invariant catalog sums every shifted pattern") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 4);
    OperatorBasis ti = spin_basis_catalog(b, true);
    CHECK(ti.kind == BasisKind::SpinTranslationInvariant);
    CHECK(ti.size() == 12);
    const char axes[3] = {'x', 'y', 'z'};
    for (int p = 0; p < 3; ++p) {
        Mat expect = Mat::Zero(16, 16);
        for (int i = 0; i < 4; ++i) expect += pauli_oracle(4, {{i, axes[p]}});
        CHECK(Mat(ti[p].matrix).isApprox(expect, 1e-14));
    }
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            Mat expect = Mat::Zero(16, 16);
            for (int i = 0; i < 4; ++i)
                expect += pauli_oracle(4, {{i, axes[p]}, {(i + 1) % 4, axes[q]}});
            CHECK(Mat(ti[3 + 3 * p + q].matrix).isApprox(expect, 1e-14));
        }
    // translation-invariant sums require the wrap bond
    CHECK_THROWS_AS(spin_basis_catalog(b, true, true), std::invalid_argument);
}

TEST_CASE("catalog constructors reject the wrong sector kind") {
    BasisPtr s = make_basis(SectorKind::SpinHalfChain, 4);
    BasisPtr f = make_basis(SectorKind::FermionFixedNumber, 4, 2);
    CHECK_THROWS_AS(spin_basis_catalog(f), std::invalid_argument);
    CHECK_THROWS_AS(fermion_basis_catalog(s), std::invalid_argument);
}

TEST_CASE("custom_basis enforces unique labels and one shared sector") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 3);
    BasisPtr b4 = make_basis(SectorKind::SpinHalfChain, 4);
    std::vector<LocalOperator> ops = {pauli_string(b, {{0, 'x'}}, "a"),
                                      pauli_string(b, {{1, 'x'}}, "a")};
    CHECK_THROWS_AS(custom_basis(b, ops), std::invalid_argument);
    ops[1] = pauli_string(b4, {{1, 'x'}}, "b");
    CHECK_THROWS_AS(custom_basis(b, std::move(ops)), std::invalid_argument);
    OperatorBasis ok = custom_basis(
        b, {pauli_string(b, {{0, 'x'}}, "a"), pauli_string(b, {{1, 'x'}}, "b")});
    CHECK(ok.kind == BasisKind::Custom);
    CHECK(ok.size() == 2);
}

TEST_CASE("realize sums the catalog with the given coefficients") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 3);
    OperatorBasis cat = spin_basis_catalog(b);
    Vec coeffs = Vec::Zero(cat.size());
    coeffs[0] = cxd(2, 0);       // sx at site 0
    coeffs[5] = cxd(0, -1.5);    // sz at site 1
    coeffs[9] = cxd(0.25, 0.5);  // sx0 sx1
    Mat expect = 2.0 * pauli_oracle(3, {{0, 'x'}}) +
                 cxd(0, -1.5) * pauli_oracle(3, {{1, 'z'}}) +
                 cxd(0.25, 0.5) * pauli_oracle(3, {{0, 'x'}, {1, 'x'}});
    CHECK(Mat(realize(cat, coeffs)).isApprox(expect, 1e-15));
    CHECK(realize_dense(cat, coeffs).isApprox(expect, 1e-15));
    CHECK_THROWS_AS(realize(cat, Vec::Ones(3)), std::invalid_argument);
}

TEST_CASE("apply multiplies the state by the operator matrix") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 2);
    LocalOperator op = pauli_string(b, {{0, 'x'}, {1, 'y'}});
    Vec amp(4);
    amp << cxd(1, 0), cxd(0, 1), cxd(-1, 2), cxd(0.5, 0);
    Ket k = make_ket(b, amp);
    Ket out = apply(op, k);
    CHECK((out.amp - Mat(op.matrix) * amp).norm() < 1e-15);

    BasisPtr b3 = make_basis(SectorKind::SpinHalfChain, 3);
    CHECK_THROWS_AS(apply(op, make_ket(b3, Vec::Ones(8))), std::invalid_argument);
}

TEST_CASE("sigma_z convention: bit clear means spin up") {
    BasisPtr b = make_basis(SectorKind::SpinHalfChain, 2);
    LocalOperator z0 = pauli_string(b, {{0, 'z'}});
    // state 0b00 has both spins up: eigenvalue +1 for every sigma_z
    Vec up = Vec::Zero(4);
    up[0] = 1;
    CHECK((Mat(z0.matrix) * up - up).norm() == 0.0);
    // state 0b01 has site 0 flipped down
    Vec down0 = Vec::Zero(4);
    down0[1] = 1;
    CHECK((Mat(z0.matrix) * down0 + down0).norm() == 0.0);
}
