#include "gqcm/lattice.hpp"

#include <bit>
#include <cmath>
#include <sstream>

namespace gqcm {

std::uint32_t SectorBasis::config_of(long index) const {
    if (index < 0 || index >= dim_) throw std::invalid_argument("basis index out of range");
    if (kind_ == SectorKind::SpinHalfChain) return static_cast<std::uint32_t>(index);
    return configs_[static_cast<std::size_t>(index)];
}

long SectorBasis::index_of(std::uint32_t config) const {
    if (config >= (1u << num_sites_)) return -1;
    if (kind_ == SectorKind::SpinHalfChain) return static_cast<long>(config);
    return rank_[config];
}

BasisPtr make_basis(SectorKind kind, int num_sites, int num_particles) {
    if (num_sites < 2 || num_sites > SectorBasis::kMaxSites) {
        std::ostringstream os;
        os << "num_sites must be in [2, " << SectorBasis::kMaxSites << "], got " << num_sites;
        throw std::invalid_argument(os.str());
    }
    auto b = std::shared_ptr<SectorBasis>(new SectorBasis());
    b->kind_ = kind;
    b->num_sites_ = num_sites;
    if (kind == SectorKind::SpinHalfChain) {
        if (num_particles != -1)
            throw std::invalid_argument("num_particles is only meaningful for fermion sectors");
        b->num_particles_ = -1;
        b->dim_ = 1L << num_sites;
    } else {
        if (num_particles < 0 || num_particles > num_sites)
            throw std::invalid_argument("num_particles must be in [0, num_sites]");
        b->num_particles_ = num_particles;
        b->rank_.assign(1u << num_sites, -1);
        for (std::uint32_t c = 0; c < (1u << num_sites); ++c) {
            if (std::popcount(c) == num_particles) {
                b->rank_[c] = static_cast<long>(b->configs_.size());
                b->configs_.push_back(c);
            }
        }
        b->dim_ = static_cast<long>(b->configs_.size());
    }
    return b;
}

Ket make_ket(BasisPtr basis, Vec amplitudes) {
    if (!basis) throw std::invalid_argument("ket requires a basis");
    if (amplitudes.size() != basis->dimension())
        throw std::invalid_argument("amplitude vector length does not match basis dimension");
    if (amplitudes.norm() == 0.0) throw std::invalid_argument("zero amplitude vector");
    return Ket{std::move(basis), std::move(amplitudes)};
}

cxd inner(const Ket& bra, const Ket& ket) {
    if (!bra.basis || !ket.basis || !bra.basis->same_sector(*ket.basis))
        throw std::invalid_argument("inner product requires matching sectors");
    return bra.amp.dot(ket.amp);  // Eigen dot conjugates the left argument
}

double norm(const Ket& k) { return k.amp.norm(); }

BiorthogonalPair normalize_pair(Ket left, Ket right, std::optional<cxd> energy,
                                double overlap_floor) {
    cxd ov = inner(left, right);
    if (std::abs(ov) < overlap_floor) {
        std::ostringstream os;
        os << "self-orthogonal pair: |<L|R>| = " << std::abs(ov) << " < " << overlap_floor;
        throw SelfOrthogonalError(os.str());
    }
    right.amp /= ov;
    return BiorthogonalPair{std::move(left), std::move(right), energy};
}

}  // namespace gqcm
