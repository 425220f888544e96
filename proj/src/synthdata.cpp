// SPDX-License-Identifier: Apache-2.0
#include "ccm/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ccm::synth {

std::string kind_to_string(Kind k) {
    switch (k) {
        case Kind::EightGaussians: return "eight-gaussians";
        case Kind::TwoMoons: return "two-moons";
        case Kind::Checkerboard: return "checkerboard";
        case Kind::SingleGaussian: return "single-gaussian";
    }
    throw ConfigError("bad distribution kind");
}

Kind kind_from_string(const std::string& s) {
    if (s == "eight-gaussians") return Kind::EightGaussians;
    if (s == "two-moons") return Kind::TwoMoons;
    if (s == "checkerboard") return Kind::Checkerboard;
    if (s == "single-gaussian") return Kind::SingleGaussian;
    throw ConfigError("unknown distribution kind: '" + s + "'");
}

void DistributionSpec::validate() const {
    if (!(scale > 0.0)) throw ConfigError("data.scale must be positive");
    if (!(std_factor > 0.0)) throw ConfigError("data.std_factor must be positive");
    if (moon_noise < 0.0) throw ConfigError("data.moon_noise must be >= 0");
}

double DistributionSpec::bound() const {
    switch (kind) {
        case Kind::EightGaussians:
            // mode circle radius 2*scale, mode std 0.1*scale, 10-sigma margin
            return scale * 3.0;
        case Kind::TwoMoons:
            return scale * (1.5 + 10.0 * moon_noise);
        case Kind::Checkerboard:
            return scale * 2.0;
        case Kind::SingleGaussian:
            return std::max(std::abs(mean_x), std::abs(mean_y)) +
                   10.0 * scale * std_factor;
    }
    throw ConfigError("bad distribution kind");
}

namespace {

inline double clamp_to(double x, double b) { return std::clamp(x, -b, b); }

inline void eight_gaussians_point(const DistributionSpec& spec, double u_mode,
                                  double z0, double z1, double* out) {
    const int mode = std::min(7, static_cast<int>(u_mode * 8.0));
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(mode) / 8.0;
    out[0] = 2.0 * spec.scale * std::cos(ang) + 0.1 * spec.scale * z0;
    out[1] = 2.0 * spec.scale * std::sin(ang) + 0.1 * spec.scale * z1;
}

inline void two_moons_point(const DistributionSpec& spec, double u_moon,
                            double u_ang, double z0, double z1, double* out) {
    const double phi = std::numbers::pi * u_ang;
    double x, y;
    if (u_moon < 0.5) {
        x = std::cos(phi) - 0.5;
        y = std::sin(phi) - 0.25;
    } else {
        x = 0.5 - std::cos(phi);
        y = 0.25 - std::sin(phi);
    }
    out[0] = spec.scale * (x + spec.moon_noise * z0);
    out[1] = spec.scale * (y + spec.moon_noise * z1);
}

// 4x4 board on [-2,2]^2; the 8 cells with even (i+j) carry mass 1/8 each.
inline void checkerboard_point(const DistributionSpec& spec, double u_i,
                               double u_j, double u_x, double u_y, double* out) {
    const int i = std::min(3, static_cast<int>(u_i * 4.0));
    const int pick = u_j < 0.5 ? 0 : 1;
    const int j = 2 * pick + (i % 2);
    out[0] = spec.scale * (-2.0 + i + u_x);
    out[1] = spec.scale * (-2.0 + j + u_y);
}

}  // namespace

Batch sample_data(const DistributionSpec& spec, std::size_t n,
                  std::uint64_t seed, std::uint32_t block, rng::Stream stream) {
    spec.validate();
    if (n < 1) throw ConfigError("sample_data: n must be >= 1");
    Batch out;
    out.seed = seed;
    out.source = Source::Data;
    out.data = Matrix(n, 2);
    const double b = spec.bound();
    const std::int64_t count = static_cast<std::int64_t>(n);
    Matrix& m = out.data;
    switch (spec.kind) {
        case Kind::EightGaussians: {
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < count; ++i) {
                const auto e = static_cast<std::uint32_t>(i);
                const double u = rng::uniform(seed, stream, block, e, 0);
                const auto [z0, z1] =
                    rng::normal_pair(seed, stream, block, e, 1);
                eight_gaussians_point(spec, u, z0, z1, m.row(i));
                m.row(i)[0] = clamp_to(m.row(i)[0], b);
                m.row(i)[1] = clamp_to(m.row(i)[1], b);
            }
            break;
        }
        case Kind::TwoMoons: {
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < count; ++i) {
                const auto e = static_cast<std::uint32_t>(i);
                const rng::Block blk =
                    rng::philox(seed, static_cast<std::uint32_t>(stream),
                                block, e, 0);
                const double u_moon =
                    static_cast<double>((static_cast<std::uint64_t>(blk.x[0]) << 32 | blk.x[1]) >> 11) * 0x1.0p-53;
                const double u_ang =
                    static_cast<double>((static_cast<std::uint64_t>(blk.x[2]) << 32 | blk.x[3]) >> 11) * 0x1.0p-53;
                const auto [z0, z1] =
                    rng::normal_pair(seed, stream, block, e, 1);
                two_moons_point(spec, u_moon, u_ang, z0, z1, m.row(i));
                m.row(i)[0] = clamp_to(m.row(i)[0], b);
                m.row(i)[1] = clamp_to(m.row(i)[1], b);
            }
            break;
        }
        case Kind::Checkerboard: {
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < count; ++i) {
                const auto e = static_cast<std::uint32_t>(i);
                const rng::Block b0 =
                    rng::philox(seed, static_cast<std::uint32_t>(stream),
                                block, e, 0);
                const rng::Block b1 =
                    rng::philox(seed, static_cast<std::uint32_t>(stream),
                                block, e, 1);
                const auto to_u = [](std::uint32_t hi, std::uint32_t lo) {
                    return static_cast<double>(
                               (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11) *
                           0x1.0p-53;
                };
                checkerboard_point(spec, to_u(b0.x[0], b0.x[1]),
                                   to_u(b0.x[2], b0.x[3]), to_u(b1.x[0], b1.x[1]),
                                   to_u(b1.x[2], b1.x[3]), m.row(i));
            }
            break;
        }
        case Kind::SingleGaussian: {
            const double s = spec.scale * spec.std_factor;
#pragma omp parallel for schedule(static)
            for (std::int64_t i = 0; i < count; ++i) {
                const auto e = static_cast<std::uint32_t>(i);
                const auto [z0, z1] =
                    rng::normal_pair(seed, stream, block, e, 0);
                m.row(i)[0] = clamp_to(spec.mean_x + s * z0, b);
                m.row(i)[1] = clamp_to(spec.mean_y + s * z1, b);
            }
            break;
        }
    }
    return out;
}

Batch sample_noise(std::size_t n, std::size_t d, std::uint64_t seed,
                   std::uint32_t block, rng::Stream stream) {
    if (n < 1) throw ConfigError("sample_noise: n must be >= 1");
    if (d < 1) throw ConfigError("sample_noise: d must be >= 1");
    Batch out;
    out.seed = seed;
    out.source = Source::Noise;
    out.data = Matrix(n, d);
    Matrix& m = out.data;
    const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
        double* row = m.row(i);
        const auto e = static_cast<std::uint32_t>(i);
        for (std::size_t c = 0; c < d; c += 2) {
            const auto [z0, z1] = rng::normal_pair(
                seed, stream, block, e, static_cast<std::uint32_t>(c / 2));
            row[c] = z0;
            if (c + 1 < d) row[c + 1] = z1;
        }
    }
    return out;
}

void write_csv(std::ostream& os, const Matrix& m) {
    for (std::size_t c = 0; c < m.cols; ++c) {
        if (c) os << ',';
        os << 'x' << c;
    }
    os << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) {
            if (c) os << ',';
            os << format_double(row[c]);
        }
        os << '\n';
    }
}

Matrix read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("csv: empty file");
    std::size_t cols = 1;
    for (char ch : line)
        if (ch == ',') ++cols;
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t got = 0;
        while (std::getline(ss, cell, ',')) {
            values.push_back(parse_double(cell));
            ++got;
        }
        if (got != cols) throw IoError("csv: ragged row");
        ++rows;
    }
    Matrix m(rows, cols);
    m.v = std::move(values);
    return m;
}

}  // namespace ccm::synth
