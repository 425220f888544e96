// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccm {

/// Bad configuration values or malformed config documents. CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape/topology mismatches between tensors or networks.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite values encountered during training. CLI exit code 4.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// ODE solver state became non-finite. CLI exit code 4.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File system / serialization failures. CLI exit code 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. Rows are sample points, columns
/// coordinates. All numeric state in the project lives in these.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

    double* row(std::size_t r) { return v.data() + r * cols; }
    const double* row(std::size_t r) const { return v.data() + r * cols; }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    }
};

/// Mean squared error over all entries. Fixed accumulation order (row by
/// row, column by column) so the value is reproducible bit-for-bit.
double mse(const Matrix& a, const Matrix& b);

/// FNV-1a 64-bit hash; used for config hashes and checkpoint integrity.
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t h = 0xcbf29ce484222325ull);

/// Shortest round-trip decimal text for a double (std::to_chars).
std::string format_double(double x);

/// Strict parse of a double from a full string; throws ConfigError.
double parse_double(const std::string& s);

}  // namespace ccm
