// SPDX-License-Identifier: Apache-2.0
#pragma once

// Serial mirrors of the ccm::kernels entry points. Plain loops, no OpenMP.
// Kept for bitwise-parity tests against the parallel kernels and as the
// baseline side of the bench tool.

#include <cstddef>
#include <span>

#include "ccm/activation.hpp"
#include "ccm/common.hpp"

namespace ccm::reference {

void affine_forward(const Matrix& x, std::span<const double> w,
                    std::span<const double> b, Matrix& y);
void activation_forward(const Matrix& z, nnet::Activation kind, Matrix& a);
void activation_backward(const Matrix& z, const Matrix& da,
                         nnet::Activation kind, Matrix& dz);
void affine_backward_input(const Matrix& dy, std::span<const double> w,
                           std::size_t in_dim, Matrix& dx);
void affine_param_grads(const Matrix& x, const Matrix& dy,
                        std::span<double> gw, std::span<double> gb);
double mean_pairwise_distance(const Matrix& a, const Matrix& b);
void project(const Matrix& x, std::span<const double> dir,
             std::span<double> out);

}  // namespace ccm::reference
