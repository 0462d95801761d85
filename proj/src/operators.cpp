#include "gqcm/operators.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gqcm {

namespace {

bool is_numerically_hermitian(const SpMat& m) {
    SpMat diff = SpMat(m.adjoint()) - m;
    double scale = std::max(1.0, m.norm());
    return diff.norm() <= 1e-14 * scale;
}

void require_spin(const BasisPtr& basis, const char* who) {
    if (!basis) throw std::invalid_argument(std::string(who) + ": null basis");
    if (basis->kind() != SectorKind::SpinHalfChain)
        throw std::invalid_argument(std::string(who) + ": spin-1/2 sector required");
}

void require_fermion(const BasisPtr& basis, const char* who) {
    if (!basis) throw std::invalid_argument(std::string(who) + ": null basis");
    if (basis->kind() != SectorKind::FermionFixedNumber)
        throw std::invalid_argument(std::string(who) + ": fermion sector required");
}

void check_site(const BasisPtr& basis, int site, const char* who) {
    if (site < 0 || site >= basis->num_sites())
        throw std::invalid_argument(std::string(who) + ": site " + std::to_string(site) +
                                    " outside [0, " + std::to_string(basis->num_sites()) + ")");
}

std::string default_pauli_label(const std::vector<std::pair<int, char>>& factors) {
    if (factors.empty()) return "id";
    std::ostringstream os;
    for (const auto& [site, axis] : factors) os << 's' << axis << site;
    return os.str();
}

}  // namespace

int OperatorBasis::index_of_label(const std::string& label) const {
    for (std::size_t i = 0; i < ops.size(); ++i)
        if (ops[i].label == label) return static_cast<int>(i);
    return -1;
}

LocalOperator pauli_string(const BasisPtr& basis, const std::vector<std::pair<int, char>>& factors,
                           std::string label) {
    require_spin(basis, "pauli_string");
    std::set<int> seen;
    for (const auto& [site, axis] : factors) {
        check_site(basis, site, "pauli_string");
        if (axis != 'x' && axis != 'y' && axis != 'z')
            throw std::invalid_argument("pauli_string: axis must be one of x, y, z");
        if (!seen.insert(site).second)
            throw std::invalid_argument("pauli_string: duplicate site " + std::to_string(site));
    }

    const long dim = basis->dimension();
    std::vector<Eigen::Triplet<cxd>> triplets;
    triplets.reserve(static_cast<std::size_t>(dim));
    for (long s = 0; s < dim; ++s) {
        const std::uint32_t src = basis->config_of(s);
        std::uint32_t dst = src;
        cxd amp = 1.0;
        for (const auto& [site, axis] : factors) {
            const bool down = (src >> site) & 1u;  // bit set = spin down
            switch (axis) {
                case 'x':
                    dst ^= (1u << site);
                    break;
                case 'y':
                    amp *= down ? cxd(0.0, -1.0) : cxd(0.0, 1.0);
                    dst ^= (1u << site);
                    break;
                case 'z':
                    amp *= down ? -1.0 : 1.0;
                    break;
            }
        }
        triplets.emplace_back(basis->index_of(dst), s, amp);
    }

    LocalOperator op;
    op.label = label.empty() ? default_pauli_label(factors) : std::move(label);
    op.basis = basis;
    op.matrix.resize(dim, dim);
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    for (const auto& [site, axis] : factors) {
        op.support.push_back(site);
        op.sites.push_back(site);
        op.axes.push_back(axis);
    }
    std::sort(op.support.begin(), op.support.end());
    op.hermitian = true;  // products of Paulis on distinct sites are Hermitian
    op.tag = "pauli";
    return op;
}

LocalOperator pauli_string_sum(const BasisPtr& basis,
                               const std::vector<std::pair<int, char>>& pattern,
                               std::string label) {
    require_spin(basis, "pauli_string_sum");
    if (pattern.empty()) throw std::invalid_argument("pauli_string_sum: empty pattern");
    const int n = basis->num_sites();

    LocalOperator op;
    op.basis = basis;
    op.matrix.resize(basis->dimension(), basis->dimension());
    for (int shift = 0; shift < n; ++shift) {
        std::vector<std::pair<int, char>> shifted;
        shifted.reserve(pattern.size());
        for (const auto& [site, axis] : pattern) shifted.emplace_back((site + shift) % n, axis);
        op.matrix = op.matrix + pauli_string(basis, shifted).matrix;
    }

    std::ostringstream fallback;
    fallback << "sum_";
    for (const auto& [site, axis] : pattern) {
        fallback << 's' << axis;
        op.sites.push_back(site);
        op.axes.push_back(axis);
    }
    op.label = label.empty() ? fallback.str() : std::move(label);
    for (int s = 0; s < n; ++s) op.support.push_back(s);
    op.hermitian = true;
    op.tag = "pauli_sum";
    return op;
}

LocalOperator fermion_term(const BasisPtr& basis, FermionTermKind kind, int i, int j,
                           std::string label) {
    require_fermion(basis, "fermion_term");
    check_site(basis, i, "fermion_term");
    if (kind != FermionTermKind::Number) {
        check_site(basis, j, "fermion_term");
        if (i == j) throw std::invalid_argument("fermion_term: i == j needs the Number kind");
    }

    const long dim = basis->dimension();
    std::vector<Eigen::Triplet<cxd>> triplets;
    for (long s = 0; s < dim; ++s) {
        const std::uint32_t src = basis->config_of(s);
        switch (kind) {
            case FermionTermKind::Number:
                if ((src >> i) & 1u) triplets.emplace_back(s, s, 1.0);
                break;
            case FermionTermKind::DensityDensity:
                if (((src >> i) & 1u) && ((src >> j) & 1u)) triplets.emplace_back(s, s, 1.0);
                break;
            case FermionTermKind::Hop: {
                // c_i^dag c_j: source must have j occupied and i empty.
                if (!((src >> j) & 1u) || ((src >> i) & 1u)) break;
                const int lo = std::min(i, j);
                const int hi = std::max(i, j);
                const std::uint32_t between =
                    hi - lo > 1 ? ((1u << hi) - 1u) & ~((1u << (lo + 1)) - 1u) : 0u;
                const int crossings = std::popcount(src & between);
                const double sign = (crossings % 2 == 0) ? 1.0 : -1.0;
                const std::uint32_t dst = (src & ~(1u << j)) | (1u << i);
                triplets.emplace_back(basis->index_of(dst), s, sign);
                break;
            }
        }
    }

    LocalOperator op;
    op.basis = basis;
    op.matrix.resize(dim, dim);
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    std::ostringstream fallback;
    switch (kind) {
        case FermionTermKind::Number:
            fallback << 'n' << i;
            op.support = {i};
            op.sites = {i};
            op.tag = "number";
            op.hermitian = true;
            break;
        case FermionTermKind::Hop:
            fallback << "cdc(" << i << ',' << j << ')';
            op.support = {std::min(i, j), std::max(i, j)};
            op.sites = {i, j};
            op.tag = "hop";
            op.hermitian = false;
            break;
        case FermionTermKind::DensityDensity:
            fallback << "nn(" << i << ',' << j << ')';
            op.support = {std::min(i, j), std::max(i, j)};
            op.sites = {i, j};
            op.tag = "density_density";
            op.hermitian = true;
            break;
    }
    op.label = label.empty() ? fallback.str() : std::move(label);
    return op;
}

OperatorBasis spin_basis_catalog(const BasisPtr& basis, bool translation_invariant,
                                 bool open_boundary) {
    require_spin(basis, "spin_basis_catalog");
    if (translation_invariant && open_boundary)
        throw std::invalid_argument(
            "spin_basis_catalog: translation-invariant sums need periodic bonds");
    const int n = basis->num_sites();
    constexpr char axes[3] = {'x', 'y', 'z'};

    OperatorBasis catalog;
    catalog.basis = basis;
    if (translation_invariant) {
        catalog.kind = BasisKind::SpinTranslationInvariant;
        for (char p : axes) catalog.ops.push_back(pauli_string_sum(basis, {{0, p}}));
        for (char p : axes)
            for (char q : axes) catalog.ops.push_back(pauli_string_sum(basis, {{0, p}, {1, q}}));
    } else {
        catalog.kind = BasisKind::SpinSiteResolved;
        for (int i = 0; i < n; ++i)
            for (char p : axes) catalog.ops.push_back(pauli_string(basis, {{i, p}}));
        const int last_bond = open_boundary ? n - 1 : n;
        for (int i = 0; i < last_bond; ++i)
            for (char p : axes)
                for (char q : axes)
                    catalog.ops.push_back(pauli_string(basis, {{i, p}, {(i + 1) % n, q}}));
    }
    return catalog;
}

OperatorBasis fermion_basis_catalog(const BasisPtr& basis, bool open_boundary) {
    require_fermion(basis, "fermion_basis_catalog");
    const int n = basis->num_sites();
    const int bonds = open_boundary ? n - 1 : n;

    OperatorBasis catalog;
    catalog.kind = BasisKind::FermionSiteResolved;
    catalog.basis = basis;
    for (int i = 0; i < n; ++i)
        catalog.ops.push_back(fermion_term(basis, FermionTermKind::Number, i, i));
    for (int i = 0; i < bonds; ++i)
        catalog.ops.push_back(fermion_term(basis, FermionTermKind::Hop, i, (i + 1) % n));
    for (int i = 0; i < bonds; ++i)
        catalog.ops.push_back(fermion_term(basis, FermionTermKind::Hop, (i + 1) % n, i));
    for (int i = 0; i < bonds; ++i)
        catalog.ops.push_back(fermion_term(basis, FermionTermKind::DensityDensity, i, (i + 1) % n));
    return catalog;
}

OperatorBasis custom_basis(BasisPtr basis, std::vector<LocalOperator> ops) {
    if (!basis) throw std::invalid_argument("custom_basis: null basis");
    std::set<std::string> labels;
    for (const auto& op : ops) {
        if (!op.basis || !op.basis->same_sector(*basis))
            throw std::invalid_argument("custom_basis: operator '" + op.label +
                                        "' lives on a different sector");
        if (op.matrix.rows() != basis->dimension() || op.matrix.cols() != basis->dimension())
            throw std::invalid_argument("custom_basis: operator '" + op.label +
                                        "' has wrong matrix dimensions");
        if (!labels.insert(op.label).second)
            throw std::invalid_argument("custom_basis: duplicate label '" + op.label + "'");
        if (op.hermitian && !is_numerically_hermitian(op.matrix))
            throw std::invalid_argument("custom_basis: operator '" + op.label +
                                        "' is flagged Hermitian but is not");
    }
    OperatorBasis catalog;
    catalog.kind = BasisKind::Custom;
    catalog.basis = std::move(basis);
    catalog.ops = std::move(ops);
    return catalog;
}

SpMat realize(const OperatorBasis& catalog, const Vec& coeffs) {
    if (coeffs.size() != catalog.size())
        throw std::invalid_argument("realize: got " + std::to_string(coeffs.size()) +
                                    " coefficients for " + std::to_string(catalog.size()) +
                                    " operators");
    const long dim = catalog.basis->dimension();
    SpMat acc(dim, dim);
    for (int i = 0; i < catalog.size(); ++i) {
        if (coeffs(i) == cxd(0.0)) continue;
        acc = acc + SpMat(coeffs(i) * catalog[i].matrix);
    }
    return acc;
}

Mat realize_dense(const OperatorBasis& catalog, const Vec& coeffs) {
    return Mat(realize(catalog, coeffs));
}

Ket apply(const LocalOperator& op, const Ket& k) {
    if (!op.basis || !k.basis || !op.basis->same_sector(*k.basis))
        throw std::invalid_argument("apply: operator and state live on different sectors");
    return Ket{k.basis, op.matrix * k.amp};
}

}  // namespace gqcm
