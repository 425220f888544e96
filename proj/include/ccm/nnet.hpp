// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccm/activation.hpp"
#include "ccm/common.hpp"
#include "ccm/rng.hpp"

namespace ccm::nnet {

/// Sinusoidal features of t in [0,1]: pairs (sin(f_k t), cos(f_k t)) with
/// f_k = pi * 2^k. The k=0 cosine is strictly monotone on [0,1], so the map
/// is injective there; the feature norm is exactly sqrt(width/2).
struct TimeEmbedding {
    std::size_t width = 16;  // must be even

    void fill(double t, double* out) const;
};

/// One affine layer. Weights are stored input-major (in x out) so the hot
/// loops stream contiguously; serialization transposes to the row-major
/// (out x in) order of the checkpoint contract.
struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;  // in * out, w[i*out + o]
    std::vector<double> b;  // out
};

/// Feed-forward network over [x || embed(t)]. Shared by the velocity nets
/// (out = D) and the discriminator (out = 1).
struct MlpParams {
    std::vector<Layer> layers;
    Activation act = Activation::Silu;
    TimeEmbedding embed;

    std::size_t data_dim() const { return layers.front().in - embed.width; }
    std::size_t in_dim() const { return layers.front().in; }
    std::size_t out_dim() const { return layers.back().out; }
    std::size_t param_count() const;

    /// Checks the dim chain and that all entries are finite.
    void validate() const;
};

struct NetSpec {
    std::size_t hidden_width = 64;
    std::size_t hidden_layers = 3;
    std::size_t embed_width = 16;
    Activation act = Activation::Silu;
};

/// Fan-in-scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases
/// start at zero. Deterministic per (seed, stream).
MlpParams make_mlp(std::size_t data_dim, std::size_t out_dim, const NetSpec& spec,
                   std::uint64_t seed, rng::Stream stream = rng::Stream::Init);

/// Layer activations retained by forward_cached for the backward pass.
struct ForwardCache {
    Matrix input;            // N x (D+E)
    std::vector<Matrix> z;   // pre-activations per layer
    std::vector<Matrix> a;   // post-activations per hidden layer
};

/// Evaluate the network. `t` holds one time per row, or a single broadcast
/// value. Output is N x out_dim.
Matrix forward(const MlpParams& p, const Matrix& x, std::span<const double> t);
Matrix forward(const MlpParams& p, const Matrix& x, double t);
Matrix forward_cached(const MlpParams& p, const Matrix& x,
                      std::span<const double> t, ForwardCache& cache);

/// Parameter gradients, same shapes as the layers.
struct Gradients {
    std::vector<Layer> layers;

    void add_scaled(const Gradients& o, double s);
    bool all_finite() const;
};

Gradients zero_gradients(const MlpParams& p);

/// Exact reverse-mode gradients of forward. `upstream` is dLoss/dOutput
/// (N x out_dim). Returns dLoss/dx (N x D, the x part of the input only;
/// t is not a differentiable input anywhere in this project).
Matrix backward(const MlpParams& p, const ForwardCache& cache,
                const Matrix& upstream, Gradients& grads);

/// Adam with bias correction.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<Layer> m;
    std::vector<Layer> v;
};

AdamState make_adam(const MlpParams& p, double lr, double beta1 = 0.9,
                    double beta2 = 0.999, double eps = 1e-8);

/// One optimizer step. Throws TrainingError on non-finite gradients.
void opt_step(AdamState& state, MlpParams& params, const Gradients& grads);

/// target <- mu * target + (1 - mu) * student, elementwise. No gradient
/// bookkeeping exists here by construction; callers treat the result as a
/// constant. mu in [0,1].
void ema_update(MlpParams& target, const MlpParams& student, double mu);

}  // namespace ccm::nnet
