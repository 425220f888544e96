// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ccm/common.hpp"
#include "ccm/nnet.hpp"

namespace ccm::flow {

/// Time convention everywhere: t = 0 is noise, t = 1 is data; the solver
/// always integrates forward in t.
using Field = std::function<Matrix(const Matrix&, double)>;

/// x_t = (1-t) x0 + t x1. The endpoints are returned directly so the
/// boundary is bit-exact.
Matrix ot_path(const Matrix& x0, const Matrix& x1, double t);

/// Per-row t; used by teacher pretraining where each sample carries its own time.
Matrix ot_path_rows(const Matrix& x0, const Matrix& x1, std::span<const double> t);

/// Velocity of the displacement path: x1 - x0, constant in t.
Matrix cfm_target(const Matrix& x0, const Matrix& x1);

struct CfmLossResult {
    double loss = 0.0;
    nnet::Gradients grads;
};

/// Mean squared error between v_model(x_t, t) and (x1 - x0), averaged over
/// batch and coordinates, with exact gradients for the model.
CfmLossResult cfm_loss(const nnet::MlpParams& model, const Matrix& x0,
                       const Matrix& x1, std::span<const double> t);

/// Forward Euler from t_from to t_to with step size `step`; the last step is
/// shortened so the final time is exactly t_to. t_from == t_to is a no-op.
Matrix euler_solve(const Field& field, Matrix x, double t_from, double t_to,
                   double step);

/// Adapt a network into a Field (broadcast scalar t).
Field field_of(const nnet::MlpParams& model);

struct SigmaSchedule {
    std::size_t n = 0;
    double eps = 0.0;
    double max = 0.0;
    double rho = 0.0;
    std::vector<double> sigma;  // sigma[0] = eps .. sigma[n-1] = max, increasing
};

/// sigma_i = (eps^(1/rho) + (i-1)/(N-1) (T^(1/rho) - eps^(1/rho)))^rho.
SigmaSchedule karras_sigma_schedule(std::size_t n, double eps, double max,
                                    double rho);

/// sigma = (1-t)/t and t = 1/(sigma+1); mutual inverses for t in (0,1].
double sigma_to_t(double sigma);
double t_to_sigma(double t);

}  // namespace ccm::flow
