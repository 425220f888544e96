// SPDX-License-Identifier: Apache-2.0
#include "ccm/rng.hpp"

#include <cmath>
#include <numbers>

namespace ccm::rng {

namespace {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint64_t to_u64(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// [0,1) with 53 random bits.
inline double unit_open(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// (0,1]; safe under log().
inline double unit_closed(std::uint64_t u) {
    return static_cast<double>((u >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

Block philox(std::uint64_t seed, std::uint32_t stream, std::uint32_t block,
             std::uint32_t elem, std::uint32_t sub) {
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    std::uint32_t c0 = elem;
    std::uint32_t c1 = sub;
    std::uint32_t c2 = block;
    std::uint32_t c3 = stream;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c0, hi0, lo0);
        mulhilo(kMul1, c2, hi1, lo1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return Block{{c0, c1, c2, c3}};
}

double uniform(std::uint64_t seed, Stream stream, std::uint32_t block,
               std::uint32_t elem, std::uint32_t sub) {
    const Block b = philox(seed, static_cast<std::uint32_t>(stream), block, elem, sub);
    return unit_open(to_u64(b.x[0], b.x[1]));
}

std::pair<double, double> normal_pair(std::uint64_t seed, Stream stream,
                                      std::uint32_t block, std::uint32_t elem,
                                      std::uint32_t sub) {
    const Block b = philox(seed, static_cast<std::uint32_t>(stream), block, elem, sub);
    const double u1 = unit_closed(to_u64(b.x[0], b.x[1]));
    const double u2 = unit_open(to_u64(b.x[2], b.x[3]));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace ccm::rng
