#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "gqcm/types.hpp"

namespace gqcm {

enum class SectorKind { SpinHalfChain, FermionFixedNumber };

// A concrete many-body sector with an explicit basis-state enumeration.
//
// Conventions (fixed, relied on throughout):
//  * site s maps to bit s of a configuration word (site 0 = least significant
//    bit);
//  * spin chains: bit clear = up (sigma^z eigenvalue +1), bit set = down; the
//    basis index IS the configuration word, so states are lexicographic;
//  * fermion sectors: bit set = occupied; configurations with the requested
//    particle number are enumerated in increasing word order.
class SectorBasis {
  public:
    static constexpr int kMaxSites = 16;

    SectorKind kind() const { return kind_; }
    int num_sites() const { return num_sites_; }
    // -1 for spin chains (no particle-number constraint).
    int num_particles() const { return num_particles_; }
    long dimension() const { return dim_; }

    // basis index -> configuration word
    std::uint32_t config_of(long index) const;
    // configuration word -> basis index, or -1 if outside the sector
    long index_of(std::uint32_t config) const;

    bool same_sector(const SectorBasis& other) const {
        return kind_ == other.kind_ && num_sites_ == other.num_sites_ &&
               num_particles_ == other.num_particles_;
    }

  private:
    friend std::shared_ptr<const SectorBasis> make_basis(SectorKind, int, int);
    SectorBasis() = default;

    SectorKind kind_ = SectorKind::SpinHalfChain;
    int num_sites_ = 0;
    int num_particles_ = -1;
    long dim_ = 0;
    std::vector<std::uint32_t> configs_;  // fermion sectors only
    std::vector<long> rank_;              // config word -> index (fermion), -1 elsewhere
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

// num_particles is required (and only allowed) for FermionFixedNumber.
// Rejects num_sites < 2 or > SectorBasis::kMaxSites.
BasisPtr make_basis(SectorKind kind, int num_sites, int num_particles = -1);

// A state vector over a sector basis. Amplitudes need not be normalized.
struct Ket {
    BasisPtr basis;
    Vec amp;
};

Ket make_ket(BasisPtr basis, Vec amplitudes);

// <bra|ket>; conjugates the bra amplitudes. Bases must describe the same sector.
cxd inner(const Ket& bra, const Ket& ket);

double norm(const Ket& k);

// A matched left/right eigenvector pair with <L|R> = 1.
struct BiorthogonalPair {
    Ket left;
    Ket right;
    std::optional<cxd> energy;
};

// Rescales the right vector by 1/<L|R> so that <L|R> = 1 exactly.
// Throws SelfOrthogonalError if |<L|R>| < overlap_floor (the pair is
// (numerically) self-orthogonal and admits no biorthogonal normalization).
BiorthogonalPair normalize_pair(Ket left, Ket right,
                                std::optional<cxd> energy = std::nullopt,
                                double overlap_floor = 1e-12);

}  // namespace gqcm
