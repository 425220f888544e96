// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ccm/common.hpp"
#include "ccm/rng.hpp"

namespace ccm::synth {

enum class Kind { EightGaussians, TwoMoons, Checkerboard, SingleGaussian };

std::string kind_to_string(Kind k);
Kind kind_from_string(const std::string& s);

/// A 2-D toy distribution. `scale` stretches everything uniformly; the
/// remaining fields only apply to their kind.
struct DistributionSpec {
    Kind kind = Kind::EightGaussians;
    double scale = 1.0;
    // single-gaussian: N(mean, (scale*std_factor)^2 I)
    double mean_x = 0.0;
    double mean_y = 0.0;
    double std_factor = 1.0;
    // two-moons jitter std as a fraction of scale
    double moon_noise = 0.1;

    void validate() const;

    /// Hard support bound: every emitted coordinate lies in [-bound, bound].
    /// Gaussian tails are clamped at 10 sigma, far outside anything a finite
    /// sample reaches.
    double bound() const;
};

enum class Source { Data, Noise, Generated };

struct Batch {
    Matrix data;
    std::uint64_t seed = 0;
    Source source = Source::Data;
};

/// Draw n points from the distribution. Deterministic per
/// (spec, n, seed, block, stream); points are pure functions of their index,
/// so generation is parallel and thread-count independent.
Batch sample_data(const DistributionSpec& spec, std::size_t n,
                  std::uint64_t seed, std::uint32_t block = 0,
                  rng::Stream stream = rng::Stream::Data);

/// n x d standard normal entries, deterministic per (n, d, seed, block).
Batch sample_noise(std::size_t n, std::size_t d, std::uint64_t seed,
                   std::uint32_t block = 0,
                   rng::Stream stream = rng::Stream::Noise);

/// CSV with header `x0,x1,...`, one row per point, shortest round-trip text.
void write_csv(std::ostream& os, const Matrix& m);
Matrix read_csv(std::istream& is);

}  // namespace ccm::synth
