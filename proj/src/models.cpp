#include "gqcm/models.hpp"

#include <random>
#include <stdexcept>

#include "gqcm/rng.hpp"

namespace gqcm {

std::vector<double> potential_profile(const FermionParams& params) {
    std::vector<double> h(static_cast<std::size_t>(params.num_sites), 0.0);
    switch (params.potential) {
        case PotentialKind::Zero:
            break;
        case PotentialKind::Staggered:
            for (int s = 0; s < params.num_sites; ++s) h[s] = (s % 2 == 0) ? -params.h : params.h;
            break;
        case PotentialKind::Biased:
            for (int s = 0; s < params.num_sites; ++s) h[s] = (s + 1) * params.h;
            break;
        case PotentialKind::Random: {
            std::mt19937_64 gen(params.seed);
            for (int s = 0; s < params.num_sites; ++s) h[s] = params.h * rng::uniform_pm1(gen);
            break;
        }
    }
    return h;
}

Vec lee_yang_coefficients(const LeeYangParams& params, const OperatorBasis& catalog) {
    const int n = params.num_sites;
    if (!catalog.basis || catalog.basis->num_sites() != n)
        throw std::invalid_argument("lee_yang_coefficients: catalog sites != model sites");

    Vec w = Vec::Zero(catalog.size());
    // Axis order inside the catalogs is x, y, z; bonds run p (left site) then
    // q (right site).
    constexpr int kX = 0, kZ = 2;
    if (catalog.kind == BasisKind::SpinTranslationInvariant) {
        if (catalog.size() != 12)
            throw std::invalid_argument("lee_yang_coefficients: expected the 12-term catalog");
        w(kX) = -1.0;
        w(kZ) = cxd(0.0, -params.hz);
        w(3 + 3 * kZ + kZ) = -params.lambda;
    } else if (catalog.kind == BasisKind::SpinSiteResolved) {
        if (catalog.size() != 12 * n)
            throw std::invalid_argument(
                "lee_yang_coefficients: expected the periodic 12N-term catalog");
        for (int i = 0; i < n; ++i) {
            w(3 * i + kX) = -1.0;
            w(3 * i + kZ) = cxd(0.0, -params.hz);
            w(3 * n + 9 * i + 3 * kZ + kZ) = -params.lambda;
        }
    } else {
        throw std::invalid_argument("lee_yang_coefficients: spin catalog required");
    }
    return w;
}

Vec fermion_coefficients(const FermionParams& params, const OperatorBasis& catalog) {
    const int n = params.num_sites;
    if (catalog.kind != BasisKind::FermionSiteResolved)
        throw std::invalid_argument("fermion_coefficients: fermion catalog required");
    if (!catalog.basis || catalog.basis->num_sites() != n)
        throw std::invalid_argument("fermion_coefficients: catalog sites != model sites");
    if (catalog.size() != 4 * n)
        throw std::invalid_argument("fermion_coefficients: expected the periodic 4N-term catalog");

    const std::vector<double> h = potential_profile(params);
    Vec w = Vec::Zero(4 * n);
    for (int i = 0; i < n; ++i) {
        w(i) = h[i];                                     // n_i
        w(n + i) = -params.J * std::exp(params.g);       // c_i^dag c_{i+1}
        w(2 * n + i) = -params.J * std::exp(-params.g);  // c_{i+1}^dag c_i
        w(3 * n + i) = params.U;                         // n_i n_{i+1}
    }
    return w;
}

Vec random_local_coefficients(const OperatorBasis& catalog, std::uint64_t seed, bool real_only) {
    std::mt19937_64 gen(seed);
    Vec w(catalog.size());
    for (int i = 0; i < catalog.size(); ++i)
        w(i) = real_only ? cxd(rng::uniform_pm1(gen)) : rng::unit_disk(gen);
    return w;
}

}  // namespace gqcm
