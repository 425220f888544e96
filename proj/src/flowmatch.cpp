// SPDX-License-Identifier: Apache-2.0
#include "ccm/flowmatch.hpp"

#include <cmath>

namespace ccm::flow {

Matrix ot_path(const Matrix& x0, const Matrix& x1, double t) {
    if (!x0.same_shape(x1)) throw StructuralError("ot_path: shape mismatch");
    if (t < 0.0 || t > 1.0) throw ConfigError("ot_path: t outside [0,1]");
    if (t == 0.0) return x0;
    if (t == 1.0) return x1;
    Matrix out(x0.rows, x0.cols);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = (1.0 - t) * x0.v[i] + t * x1.v[i];
    return out;
}

Matrix ot_path_rows(const Matrix& x0, const Matrix& x1, std::span<const double> t) {
    if (!x0.same_shape(x1)) throw StructuralError("ot_path_rows: shape mismatch");
    if (t.size() != x0.rows) throw StructuralError("ot_path_rows: t size mismatch");
    Matrix out(x0.rows, x0.cols);
    for (std::size_t r = 0; r < x0.rows; ++r) {
        const double tr = t[r];
        if (tr < 0.0 || tr > 1.0) throw ConfigError("ot_path_rows: t outside [0,1]");
        const double* p0 = x0.row(r);
        const double* p1 = x1.row(r);
        double* po = out.row(r);
        for (std::size_t c = 0; c < x0.cols; ++c)
            po[c] = tr == 0.0 ? p0[c] : (tr == 1.0 ? p1[c] : (1.0 - tr) * p0[c] + tr * p1[c]);
    }
    return out;
}

Matrix cfm_target(const Matrix& x0, const Matrix& x1) {
    if (!x0.same_shape(x1)) throw StructuralError("cfm_target: shape mismatch");
    Matrix out(x0.rows, x0.cols);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = x1.v[i] - x0.v[i];
    return out;
}

CfmLossResult cfm_loss(const nnet::MlpParams& model, const Matrix& x0,
                       const Matrix& x1, std::span<const double> t) {
    const Matrix x_t = ot_path_rows(x0, x1, t);
    const Matrix target = cfm_target(x0, x1);
    nnet::ForwardCache cache;
    const Matrix pred = nnet::forward_cached(model, x_t, t, cache);
    if (!pred.all_finite()) throw TrainingError("cfm_loss: non-finite prediction");
    const double inv = 1.0 / static_cast<double>(pred.v.size());
    double loss = 0.0;
    Matrix upstream(pred.rows, pred.cols);
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
        const double d = pred.v[i] - target.v[i];
        loss += d * d;
        upstream.v[i] = 2.0 * d * inv;
    }
    loss *= inv;
    CfmLossResult res;
    res.loss = loss;
    res.grads = nnet::zero_gradients(model);
    nnet::backward(model, cache, upstream, res.grads);
    return res;
}

Matrix euler_solve(const Field& field, Matrix x, double t_from, double t_to,
                   double step) {
    if (!(step > 0.0)) throw ConfigError("euler_solve: step must be positive");
    if (t_from < 0.0 || t_to > 1.0 || t_from > t_to)
        throw ConfigError("euler_solve: need 0 <= t_from <= t_to <= 1");
    double t = t_from;
    while (t < t_to) {
        const double remaining = t_to - t;
        const double h = remaining <= step ? remaining : step;
        const Matrix v = field(x, t);
        if (!v.same_shape(x)) throw StructuralError("euler_solve: field shape mismatch");
        for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += h * v.v[i];
        if (!x.all_finite()) throw SolverError("euler_solve: state diverged");
        t = remaining <= step ? t_to : t + step;
    }
    return x;
}

Field field_of(const nnet::MlpParams& model) {
    return [&model](const Matrix& x, double t) { return nnet::forward(model, x, t); };
}

SigmaSchedule karras_sigma_schedule(std::size_t n, double eps, double max,
                                    double rho) {
    if (n < 2) throw ConfigError("sigma schedule: N must be >= 2");
    if (!(eps > 0.0) || !(eps < max)) throw ConfigError("sigma schedule: need 0 < eps < T");
    if (!(rho > 0.0)) throw ConfigError("sigma schedule: rho must be positive");
    SigmaSchedule s;
    s.n = n;
    s.eps = eps;
    s.max = max;
    s.rho = rho;
    s.sigma.resize(n);
    const double lo = std::pow(eps, 1.0 / rho);
    const double hi = std::pow(max, 1.0 / rho);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
        s.sigma[i] = std::pow(lo + frac * (hi - lo), rho);
    }
    // Endpoints exact regardless of pow() rounding.
    s.sigma.front() = eps;
    s.sigma.back() = max;
    return s;
}

double sigma_to_t(double sigma) {
    if (sigma < 0.0) throw ConfigError("sigma_to_t: sigma must be >= 0");
    return 1.0 / (sigma + 1.0);
}

double t_to_sigma(double t) {
    if (!(t > 0.0) || t > 1.0) throw ConfigError("t_to_sigma: t must be in (0,1]");
    return (1.0 - t) / t;
}

}  // namespace ccm::flow
