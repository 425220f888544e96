// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-row / per-slice arithmetic shared verbatim by the OpenMP kernels and
// the serial reference. Both paths must round identically, so the actual
// floating-point expressions live here and only the loop orchestration
// differs between ccm::kernels and ccm::reference.
//
// Every accumulation runs in a fixed order (ascending input index, ascending
// batch row), which makes results independent of the thread count.

#include <cmath>
#include <cstddef>

#include "ccm/activation.hpp"

namespace ccm::detail {

// y[o] = b[o] + sum_i x[i] * w[i*out_dim + o]   (weights stored input-major)
inline void affine_row(const double* x, const double* w, const double* b,
                       double* y, std::size_t in_dim, std::size_t out_dim) {
    for (std::size_t o = 0; o < out_dim; ++o) y[o] = b[o];
    for (std::size_t i = 0; i < in_dim; ++i) {
        const double xi = x[i];
        const double* wrow = w + i * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o) y[o] += xi * wrow[o];
    }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void act_row(const double* z, double* a, std::size_t n,
                    nnet::Activation kind) {
    if (kind == nnet::Activation::Tanh) {
        for (std::size_t i = 0; i < n; ++i) a[i] = std::tanh(z[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) a[i] = z[i] * sigmoid(z[i]);
    }
}

// dz[i] = da[i] * act'(z[i])
inline void act_grad_row(const double* z, const double* da, double* dz,
                         std::size_t n, nnet::Activation kind) {
    if (kind == nnet::Activation::Tanh) {
        for (std::size_t i = 0; i < n; ++i) {
            const double th = std::tanh(z[i]);
            dz[i] = da[i] * (1.0 - th * th);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double s = sigmoid(z[i]);
            dz[i] = da[i] * (s * (1.0 + z[i] * (1.0 - s)));
        }
    }
}

// dx[i] = sum_o dy[o] * w[i*out_dim + o]
inline void backprop_input_row(const double* dy, const double* w, double* dx,
                               std::size_t in_dim, std::size_t out_dim) {
    for (std::size_t i = 0; i < in_dim; ++i) {
        const double* wrow = w + i * out_dim;
        double acc = 0.0;
        for (std::size_t o = 0; o < out_dim; ++o) acc += dy[o] * wrow[o];
        dx[i] = acc;
    }
}

// gw[i][o] = sum_n x[n][i] * dy[n][o], one input slice i at a time.
inline void weight_grad_slice(std::size_t i, const double* x, const double* dy,
                              double* gw_row, std::size_t rows,
                              std::size_t in_dim, std::size_t out_dim) {
    for (std::size_t o = 0; o < out_dim; ++o) gw_row[o] = 0.0;
    for (std::size_t n = 0; n < rows; ++n) {
        const double xi = x[n * in_dim + i];
        const double* dyn = dy + n * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o) gw_row[o] += xi * dyn[o];
    }
}

// gb[o] = sum_n dy[n][o]
inline void bias_grad(const double* dy, double* gb, std::size_t rows,
                      std::size_t out_dim) {
    for (std::size_t o = 0; o < out_dim; ++o) gb[o] = 0.0;
    for (std::size_t n = 0; n < rows; ++n) {
        const double* dyn = dy + n * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o) gb[o] += dyn[o];
    }
}

// sum_j ||a_i - b_j||_2 for one fixed i.
inline double distance_row_sum(const double* ai, const double* b,
                               std::size_t m, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double* bj = b + j * dim;
        double sq = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            const double diff = ai[d] - bj[d];
            sq += diff * diff;
        }
        acc += std::sqrt(sq);
    }
    return acc;
}

}  // namespace ccm::detail
