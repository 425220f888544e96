// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>

namespace ccm::rng {

/// Generator identity recorded in run manifests. Draws are pure functions of
/// (seed, stream, block, elem, sub), so any batch can be produced in parallel,
/// in any order, on any thread count, with identical bits.
inline constexpr const char* kGeneratorName = "philox4x32-10/v1";

/// Independent draw streams. Consumption on one stream never shifts another,
/// which is what makes optional subsystems (GAN, calibration) leave the
/// training trajectory untouched.
enum class Stream : std::uint32_t {
    Data = 1,
    Noise = 2,
    Time = 3,
    Init = 4,
    DiscInit = 5,
    CalibData = 6,
    CalibNoise = 7,
    SampleNoise = 8,
    Renoise = 9,
    Projection = 10,
    Subsample = 11,
    ProfileData = 12,
    ProfileNoise = 13,
    Test = 100,
};

struct Block {
    std::uint32_t x[4];
};

/// Philox4x32-10 block function (Salmon et al. constants).
Block philox(std::uint64_t seed, std::uint32_t stream, std::uint32_t block,
             std::uint32_t elem, std::uint32_t sub);

/// One uniform double in [0, 1).
double uniform(std::uint64_t seed, Stream stream, std::uint32_t block,
               std::uint32_t elem, std::uint32_t sub = 0);

/// Two standard normals via Box-Muller from one counter block.
std::pair<double, double> normal_pair(std::uint64_t seed, Stream stream,
                                      std::uint32_t block, std::uint32_t elem,
                                      std::uint32_t sub = 0);

/// Sequential convenience view over a (seed, stream, block) lane.
class Sequence {
  public:
    Sequence(std::uint64_t seed, Stream stream, std::uint32_t block = 0)
        : seed_(seed), stream_(stream), block_(block) {}

    double next_uniform() { return uniform(seed_, stream_, block_, elem_++); }

    // One normal per counter element; the Box-Muller twin is discarded.
    double next_normal() { return normal_pair(seed_, stream_, block_, elem_++).first; }

  private:
    std::uint64_t seed_;
    Stream stream_;
    std::uint32_t block_;
    std::uint32_t elem_ = 0;
};

}  // namespace ccm::rng
