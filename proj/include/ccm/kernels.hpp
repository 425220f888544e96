// SPDX-License-Identifier: Apache-2.0
#pragma once

// Batched compute kernels, OpenMP-parallel over independent rows/slices.
// ccm::reference holds the serial mirrors; tests assert bitwise equality
// between the two and the bench tool compares their throughput.

#include <cstddef>
#include <span>

#include "ccm/activation.hpp"
#include "ccm/common.hpp"

namespace ccm::kernels {

/// Y = X * W + b with W stored input-major (in x out). Parallel over rows.
void affine_forward(const Matrix& x, std::span<const double> w,
                    std::span<const double> b, Matrix& y);

/// A = act(Z), elementwise.
void activation_forward(const Matrix& z, nnet::Activation kind, Matrix& a);

/// dZ = dA .* act'(Z)
void activation_backward(const Matrix& z, const Matrix& da,
                         nnet::Activation kind, Matrix& dz);

/// dX = dY * W^T. Parallel over rows.
void affine_backward_input(const Matrix& dy, std::span<const double> w,
                           std::size_t in_dim, Matrix& dx);

/// gw[i][o] = sum_n X[n][i] dY[n][o]; gb[o] = sum_n dY[n][o].
/// Parallel over input slices; batch accumulation order is fixed.
void affine_param_grads(const Matrix& x, const Matrix& dy,
                        std::span<double> gw, std::span<double> gb);

/// mean over all (i, j) of ||a_i - b_j||. Parallel over i with per-row
/// partials combined in ascending order.
double mean_pairwise_distance(const Matrix& a, const Matrix& b);

/// out[n] = <x_n, dir>
void project(const Matrix& x, std::span<const double> dir,
             std::span<double> out);

}  // namespace ccm::kernels
