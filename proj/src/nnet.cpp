// SPDX-License-Identifier: Apache-2.0
#include "ccm/nnet.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ccm/kernels.hpp"

namespace ccm::nnet {

void TimeEmbedding::fill(double t, double* out) const {
    for (std::size_t k = 0; k < width / 2; ++k) {
        const double f = std::numbers::pi * std::ldexp(1.0, static_cast<int>(k));
        out[2 * k] = std::sin(f * t);
        out[2 * k + 1] = std::cos(f * t);
    }
}

std::size_t MlpParams::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

void MlpParams::validate() const {
    if (layers.empty()) throw StructuralError("mlp: no layers");
    if (embed.width % 2 != 0) throw StructuralError("mlp: embed width must be even");
    if (layers.front().in <= embed.width)
        throw StructuralError("mlp: input dim must exceed embed width");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        if (l.w.size() != l.in * l.out || l.b.size() != l.out)
            throw StructuralError("mlp: layer " + std::to_string(i) + " shape mismatch");
        if (i + 1 < layers.size() && l.out != layers[i + 1].in)
            throw StructuralError("mlp: dim chain broken at layer " + std::to_string(i));
        for (double x : l.w)
            if (!std::isfinite(x)) throw StructuralError("mlp: non-finite weight");
        for (double x : l.b)
            if (!std::isfinite(x)) throw StructuralError("mlp: non-finite bias");
    }
}

MlpParams make_mlp(std::size_t data_dim, std::size_t out_dim, const NetSpec& spec,
                   std::uint64_t seed, rng::Stream stream) {
    MlpParams p;
    p.act = spec.act;
    p.embed.width = spec.embed_width;
    std::vector<std::size_t> dims;
    dims.push_back(data_dim + spec.embed_width);
    for (std::size_t i = 0; i < spec.hidden_layers; ++i)
        dims.push_back(spec.hidden_width);
    dims.push_back(out_dim);
    rng::Sequence seq(seed, stream);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.w.resize(layer.in * layer.out);
        layer.b.assign(layer.out, 0.0);
        const double s = 1.0 / std::sqrt(static_cast<double>(layer.in));
        // Draw in (out, in) order so the stream matches the serialized layout.
        for (std::size_t o = 0; o < layer.out; ++o)
            for (std::size_t i = 0; i < layer.in; ++i)
                layer.w[i * layer.out + o] = s * (2.0 * seq.next_uniform() - 1.0);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

namespace {

Matrix assemble_input(const MlpParams& p, const Matrix& x,
                      std::span<const double> t) {
    const std::size_t d = x.cols;
    const std::size_t e = p.embed.width;
    if (x.cols + e != p.in_dim())
        throw StructuralError("forward: input dim mismatch");
    if (t.size() != 1 && t.size() != x.rows)
        throw StructuralError("forward: t size must be 1 or N");
    Matrix in(x.rows, d + e);
    const bool broadcast = t.size() == 1;
    std::vector<double> shared(e);
    if (broadcast) p.embed.fill(t[0], shared.data());
    const auto n = static_cast<std::int64_t>(x.rows);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < n; ++r) {
        double* row = in.row(r);
        const double* px = x.row(r);
        for (std::size_t c = 0; c < d; ++c) row[c] = px[c];
        if (broadcast) {
            for (std::size_t c = 0; c < e; ++c) row[d + c] = shared[c];
        } else {
            p.embed.fill(t[r], row + d);
        }
    }
    return in;
}

}  // namespace

Matrix forward_cached(const MlpParams& p, const Matrix& x,
                      std::span<const double> t, ForwardCache& cache) {
    p.validate();
    if (!x.all_finite()) throw StructuralError("forward: non-finite input");
    cache.input = assemble_input(p, x, t);
    const std::size_t n_layers = p.layers.size();
    cache.z.assign(n_layers, Matrix{});
    cache.a.assign(n_layers, Matrix{});
    const Matrix* cur = &cache.input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        kernels::affine_forward(*cur, p.layers[l].w, p.layers[l].b, cache.z[l]);
        if (l + 1 < n_layers) {
            kernels::activation_forward(cache.z[l], p.act, cache.a[l]);
            cur = &cache.a[l];
        }
    }
    return cache.z.back();
}

Matrix forward(const MlpParams& p, const Matrix& x, std::span<const double> t) {
    ForwardCache cache;
    return forward_cached(p, x, t, cache);
}

Matrix forward(const MlpParams& p, const Matrix& x, double t) {
    const double tv[1] = {t};
    return forward(p, x, std::span<const double>(tv, 1));
}

Gradients zero_gradients(const MlpParams& p) {
    Gradients g;
    for (const auto& l : p.layers) {
        Layer gl;
        gl.in = l.in;
        gl.out = l.out;
        gl.w.assign(l.w.size(), 0.0);
        gl.b.assign(l.b.size(), 0.0);
        g.layers.push_back(std::move(gl));
    }
    return g;
}

void Gradients::add_scaled(const Gradients& o, double s) {
    if (layers.size() != o.layers.size())
        throw StructuralError("gradients: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].w.size(); ++i)
            layers[l].w[i] += s * o.layers[l].w[i];
        for (std::size_t i = 0; i < layers[l].b.size(); ++i)
            layers[l].b[i] += s * o.layers[l].b[i];
    }
}

bool Gradients::all_finite() const {
    for (const auto& l : layers) {
        for (double x : l.w)
            if (!std::isfinite(x)) return false;
        for (double x : l.b)
            if (!std::isfinite(x)) return false;
    }
    return true;
}

Matrix backward(const MlpParams& p, const ForwardCache& cache,
                const Matrix& upstream, Gradients& grads) {
    const std::size_t n_layers = p.layers.size();
    if (grads.layers.size() != n_layers)
        throw StructuralError("backward: gradient shape mismatch");
    if (upstream.rows != cache.input.rows || upstream.cols != p.out_dim())
        throw StructuralError("backward: upstream shape mismatch");
    Matrix delta = upstream;  // dLoss/dz for the layer being processed
    Matrix da;
    for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix& layer_in = (l == 0) ? cache.input : cache.a[l - 1];
        kernels::affine_param_grads(layer_in, delta, grads.layers[l].w,
                                    grads.layers[l].b);
        if (l == 0) break;
        kernels::affine_backward_input(delta, p.layers[l].w, p.layers[l].in, da);
        kernels::activation_backward(cache.z[l - 1], da, p.act, delta);
    }
    // dLoss/dx: through the first layer, x occupies the leading D columns.
    kernels::affine_backward_input(delta, p.layers[0].w, p.layers[0].in, da);
    const std::size_t d = p.data_dim();
    Matrix dx(da.rows, d);
    for (std::size_t r = 0; r < da.rows; ++r)
        for (std::size_t c = 0; c < d; ++c) dx(r, c) = da(r, c);
    return dx;
}

AdamState make_adam(const MlpParams& p, double lr, double beta1, double beta2,
                    double eps) {
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    auto zeros = zero_gradients(p);
    s.m = zeros.layers;
    s.v = std::move(zeros.layers);
    return s;
}

void opt_step(AdamState& state, MlpParams& params, const Gradients& grads) {
    if (!grads.all_finite())
        throw TrainingError("opt_step: non-finite gradient at step " +
                            std::to_string(state.step + 1));
    if (state.m.size() != params.layers.size())
        throw StructuralError("opt_step: state/param mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto update = [&](std::vector<double>& p, std::vector<double>& m,
                          std::vector<double>& v, const std::vector<double>& g) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
                v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
            }
        };
        update(params.layers[l].w, state.m[l].w, state.v[l].w, grads.layers[l].w);
        update(params.layers[l].b, state.m[l].b, state.v[l].b, grads.layers[l].b);
    }
}

void ema_update(MlpParams& target, const MlpParams& student, double mu) {
    if (mu < 0.0 || mu > 1.0) throw ConfigError("ema_update: mu must be in [0,1]");
    if (target.layers.size() != student.layers.size())
        throw StructuralError("ema_update: layer count mismatch");
    if (mu == 1.0) return;
    if (mu == 0.0) {
        target = student;
        return;
    }
    for (std::size_t l = 0; l < target.layers.size(); ++l) {
        Layer& t = target.layers[l];
        const Layer& s = student.layers[l];
        if (t.w.size() != s.w.size() || t.b.size() != s.b.size())
            throw StructuralError("ema_update: layer shape mismatch");
        for (std::size_t i = 0; i < t.w.size(); ++i)
            t.w[i] = mu * t.w[i] + (1.0 - mu) * s.w[i];
        for (std::size_t i = 0; i < t.b.size(); ++i)
            t.b[i] = mu * t.b[i] + (1.0 - mu) * s.b[i];
    }
}

}  // namespace ccm::nnet
