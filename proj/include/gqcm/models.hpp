#pragma once

#include <cstdint>
#include <vector>

#include "gqcm/operators.hpp"
#include "gqcm/types.hpp"

namespace gqcm {

// PT-symmetric Ising chain with an imaginary longitudinal field:
//   H = -sum_i ( sigma_i^x + lambda sigma_i^z sigma_{i+1}^z
//                + i hz sigma_i^z ),   periodic bonds.
struct LeeYangParams {
    int num_sites = 10;
    double lambda = 0.5;
    double hz = 0.5;
};

enum class PotentialKind { Zero, Staggered, Biased, Random };

// Asymmetric-hopping interacting fermion ring:
//   H = sum_i ( -J e^{+g} c_i^dag c_{i+1} - J e^{-g} c_{i+1}^dag c_i
//               + U n_i n_{i+1} + h_i n_i ),
// with the on-site potential h_i selected by `potential`:
//   Zero       h_i = 0
//   Staggered  h_i = -h, +h, -h, ...      (site 0 gets -h)
//   Biased     h_i = (i + 1) h            (linear ramp)
//   Random     h_i uniform in [-h, h], seeded
struct FermionParams {
    int num_sites = 10;
    double J = 1.0;
    double g = 0.15;
    double U = 2.0;
    PotentialKind potential = PotentialKind::Zero;
    double h = 0.5;
    std::uint64_t seed = 1;
};

std::vector<double> potential_profile(const FermionParams& params);

// Coefficient vector of the model Hamiltonian in the given catalog, so that
// realize(catalog, coeffs) reproduces H exactly. Accepts the site-resolved
// (12N) or translation-invariant (12) periodic spin catalog.
Vec lee_yang_coefficients(const LeeYangParams& params, const OperatorBasis& catalog);

// Same for the fermion model over the periodic 4N fermion catalog.
Vec fermion_coefficients(const FermionParams& params, const OperatorBasis& catalog);

// Seeded random coefficients for round-trip exercises: one draw per catalog
// entry, uniform over the unit disk (or over [-1, 1] when real_only).
Vec random_local_coefficients(const OperatorBasis& catalog, std::uint64_t seed,
                              bool real_only = false);

}  // namespace gqcm
