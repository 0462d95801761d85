#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace gqcm::rng {

// All randomness in the library flows through these helpers on top of
// std::mt19937_64, whose output sequence is fixed by the standard. The
// explicit 53-bit mapping keeps the double streams identical across
// platforms and standard libraries (std::uniform_real_distribution makes no
// such promise).

inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;  // [0, 1)
}

inline double uniform_pm1(std::mt19937_64& g) { return 2.0 * uniform01(g) - 1.0; }

// Uniform over the closed unit disk, by rejection from the square.
inline std::complex<double> unit_disk(std::mt19937_64& g) {
    while (true) {
        const double x = uniform_pm1(g);
        const double y = uniform_pm1(g);
        if (x * x + y * y <= 1.0) return {x, y};
    }
}

// Two independent standard normals (Box-Muller). u1 is reflected into (0, 1]
// so the log never sees zero.
inline std::pair<double, double> gaussian_pair(std::mt19937_64& g) {
    const double u1 = 1.0 - uniform01(g);
    const double u2 = uniform01(g);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace gqcm::rng
