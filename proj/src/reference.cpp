// SPDX-License-Identifier: Apache-2.0
#include "ccm/reference.hpp"

#include "ccm/kernels_detail.hpp"

namespace ccm::reference {

void affine_forward(const Matrix& x, std::span<const double> w,
                    std::span<const double> b, Matrix& y) {
    const std::size_t in_dim = x.cols;
    const std::size_t out_dim = b.size();
    if (w.size() != in_dim * out_dim)
        throw StructuralError("affine_forward: weight size mismatch");
    y.rows = x.rows;
    y.cols = out_dim;
    y.v.resize(y.rows * y.cols);
    for (std::size_t r = 0; r < x.rows; ++r)
        detail::affine_row(x.row(r), w.data(), b.data(), y.row(r), in_dim, out_dim);
}

void activation_forward(const Matrix& z, nnet::Activation kind, Matrix& a) {
    a.rows = z.rows;
    a.cols = z.cols;
    a.v.resize(z.v.size());
    for (std::size_t r = 0; r < z.rows; ++r)
        detail::act_row(z.row(r), a.row(r), z.cols, kind);
}

void activation_backward(const Matrix& z, const Matrix& da,
                         nnet::Activation kind, Matrix& dz) {
    if (!z.same_shape(da))
        throw StructuralError("activation_backward: shape mismatch");
    dz.rows = z.rows;
    dz.cols = z.cols;
    dz.v.resize(z.v.size());
    for (std::size_t r = 0; r < z.rows; ++r)
        detail::act_grad_row(z.row(r), da.row(r), dz.row(r), z.cols, kind);
}

void affine_backward_input(const Matrix& dy, std::span<const double> w,
                           std::size_t in_dim, Matrix& dx) {
    const std::size_t out_dim = dy.cols;
    if (w.size() != in_dim * out_dim)
        throw StructuralError("affine_backward_input: weight size mismatch");
    dx.rows = dy.rows;
    dx.cols = in_dim;
    dx.v.resize(dx.rows * dx.cols);
    for (std::size_t r = 0; r < dy.rows; ++r)
        detail::backprop_input_row(dy.row(r), w.data(), dx.row(r), in_dim, out_dim);
}

void affine_param_grads(const Matrix& x, const Matrix& dy,
                        std::span<double> gw, std::span<double> gb) {
    const std::size_t in_dim = x.cols;
    const std::size_t out_dim = dy.cols;
    if (x.rows != dy.rows)
        throw StructuralError("affine_param_grads: row mismatch");
    if (gw.size() != in_dim * out_dim || gb.size() != out_dim)
        throw StructuralError("affine_param_grads: gradient size mismatch");
    for (std::size_t i = 0; i < in_dim; ++i)
        detail::weight_grad_slice(i, x.v.data(), dy.v.data(),
                                  gw.data() + i * out_dim, x.rows, in_dim,
                                  out_dim);
    detail::bias_grad(dy.v.data(), gb.data(), dy.rows, out_dim);
}

double mean_pairwise_distance(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw StructuralError("mean_pairwise_distance: dim mismatch");
    if (a.rows == 0 || b.rows == 0)
        throw StructuralError("mean_pairwise_distance: empty batch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        acc += detail::distance_row_sum(a.row(i), b.v.data(), b.rows, a.cols);
    return acc / (static_cast<double>(a.rows) * static_cast<double>(b.rows));
}

void project(const Matrix& x, std::span<const double> dir,
             std::span<double> out) {
    if (dir.size() != x.cols || out.size() != x.rows)
        throw StructuralError("project: size mismatch");
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double* px = x.row(r);
        double acc = 0.0;
        for (std::size_t d = 0; d < x.cols; ++d) acc += px[d] * dir[d];
        out[r] = acc;
    }
}

}  // namespace ccm::reference
