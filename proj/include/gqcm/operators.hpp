#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gqcm/lattice.hpp"
#include "gqcm/types.hpp"

namespace gqcm {

enum class BasisKind { SpinSiteResolved, SpinTranslationInvariant, FermionSiteResolved, Custom };

enum class FermionTermKind { Number, Hop, DensityDensity };

// One labeled operator realized as a sparse matrix on a sector.
// The descriptor fields (tag/sites/axes) carry enough information to rebuild
// the matrix, which is what gets serialized instead of matrix entries.
struct LocalOperator {
    std::string label;
    BasisPtr basis;
    SpMat matrix;
    std::vector<int> support;  // sites the operator acts on
    bool hermitian = false;

    std::string tag;         // "pauli" | "pauli_sum" | "number" | "hop" | "density_density"
    std::vector<int> sites;  // pauli: sites of the factors; fermion: {i} or {i,j}
    std::string axes;        // pauli only, one of x/y/z per site
};

// Product of single-site Pauli factors; an empty factor list gives the
// identity. Spin sectors only; duplicate sites rejected.
LocalOperator pauli_string(const BasisPtr& basis,
                           const std::vector<std::pair<int, char>>& factors,
                           std::string label = "");

// Translation-invariant sum: sum over i of the factor pattern shifted by i
// (sites wrap periodically).
LocalOperator pauli_string_sum(const BasisPtr& basis,
                               const std::vector<std::pair<int, char>>& pattern,
                               std::string label = "");

// Number / hopping / density-density terms on a fixed-particle-number sector.
//  Number:          c_i^dag c_i          (j ignored, pass j = i)
//  Hop:             c_i^dag c_j, i != j; Jordan-Wigner sign is
//                   (-1)^(#occupied strictly between i and j), evaluated on the
//                   source configuration; the same rule covers the periodic
//                   wrap bond, which keeps forward and backward hops exact
//                   adjoints of each other.
//  DensityDensity:  n_i n_j
LocalOperator fermion_term(const BasisPtr& basis, FermionTermKind kind, int i, int j,
                           std::string label = "");

struct OperatorBasis {
    BasisKind kind = BasisKind::Custom;
    BasisPtr basis;
    std::vector<LocalOperator> ops;

    int size() const { return static_cast<int>(ops.size()); }
    const LocalOperator& operator[](int i) const { return ops.at(static_cast<std::size_t>(i)); }
    int index_of_label(const std::string& label) const;  // -1 if absent
};

// Site-resolved catalog: {sigma_i^p} (3N terms) then {sigma_i^p sigma_{i+1}^q}
// (9N terms), i ascending, p and q in x,y,z order; bonds wrap unless
// open_boundary. The translation-invariant variant sums each pattern over all
// sites (12 operators).
OperatorBasis spin_basis_catalog(const BasisPtr& basis, bool translation_invariant = false,
                                 bool open_boundary = false);

// Fermion catalog: {n_i}, {c_i^dag c_{i+1}}, {c_{i+1}^dag c_i}, {n_i n_{i+1}},
// four blocks of N each (N-1 for bond blocks when open_boundary).
OperatorBasis fermion_basis_catalog(const BasisPtr& basis, bool open_boundary = false);

OperatorBasis custom_basis(BasisPtr basis, std::vector<LocalOperator> ops);

// sum_i coeffs[i] * O_i
SpMat realize(const OperatorBasis& catalog, const Vec& coeffs);
Mat realize_dense(const OperatorBasis& catalog, const Vec& coeffs);

Ket apply(const LocalOperator& op, const Ket& k);

}  // namespace gqcm
