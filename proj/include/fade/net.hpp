#pragma once

// Minimal fully-connected network with explicit forward/backward passes. The
// head activation is always identity so a decay-adapted rule can own the
// final layer while a standard optimizer trains the hidden layers. The
// forward pass caches per-layer inputs and pre-activations; the cache is only
// valid for the most recent input.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fade/errors.hpp"
#include "fade/rng.hpp"

namespace fade {

enum class Activation { identity, relu, leaky_relu };

constexpr double kLeakySlope = 0.01;

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::leaky_relu: return z > 0.0 ? z : kLeakySlope * z;
        default: return z;
    }
}

inline double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return z > 0.0 ? 1.0 : kLeakySlope;
        default: return 1.0;
    }
}

struct Layer {
    Eigen::MatrixXd W; // rows = out, cols = in
    Eigen::VectorXd b;
    Activation act = Activation::identity;
    double init_bound = 0.0; // 1/sqrt(fan_in), kept for weight clipping
};

struct MlpNet {
    std::vector<Layer> layers;

    // Forward cache.
    std::vector<Eigen::VectorXd> inputs;   // input seen by each layer
    std::vector<Eigen::VectorXd> preacts;  // W * input + b
    Eigen::VectorXd output;

    Layer& head() { return layers.back(); }
    const Layer& head() const { return layers.back(); }

    // Activation of the last hidden layer: the features the head sees.
    const Eigen::VectorXd& head_features() const { return inputs.back(); }

    int in_dim() const { return static_cast<int>(layers.front().W.cols()); }
    int out_dim() const { return static_cast<int>(layers.back().W.rows()); }
};

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
    std::vector<Eigen::VectorXd> dz; // scratch
};

// Weights and biases ~ Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), drawn
// row-major per layer, weights then bias. Hidden layers use `hidden_act`;
// the head is identity.
inline MlpNet mlp_init(const std::vector<int>& shape, Activation hidden_act, std::uint64_t seed) {
    if (shape.size() < 2) throw config_error("mlp_init: shape needs at least input and output");
    Rng rng(seed);
    MlpNet net;
    const std::size_t n_layers = shape.size() - 1;
    net.layers.resize(n_layers);
    net.inputs.resize(n_layers);
    net.preacts.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        Layer& layer = net.layers[l];
        const int fan_in = shape[l];
        const int fan_out = shape[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        layer.W.resize(fan_out, fan_in);
        layer.b.resize(fan_out);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) layer.W(r, c) = rng.uniform(-bound, bound);
        for (int r = 0; r < fan_out; ++r) layer.b(r) = rng.uniform(-bound, bound);
        layer.act = (l + 1 == n_layers) ? Activation::identity : hidden_act;
        layer.init_bound = bound;
        net.inputs[l].resize(fan_in);
        net.preacts[l].resize(fan_out);
    }
    net.output.resize(shape.back());
    return net;
}

inline const Eigen::VectorXd& mlp_forward(MlpNet& net, const Eigen::VectorXd& x) {
    if (x.size() != net.in_dim()) throw config_error("mlp_forward: input size mismatch");
    const Eigen::VectorXd* cur = &x;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        Layer& layer = net.layers[l];
        net.inputs[l] = *cur;
        net.preacts[l].noalias() = layer.W * net.inputs[l] + layer.b;
        if (l + 1 == net.layers.size()) {
            net.output = net.preacts[l]; // identity head
        } else {
            Eigen::VectorXd& z = net.preacts[l];
            Eigen::VectorXd& a = net.inputs[l + 1];
            a.resize(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = activate(layer.act, z[i]);
            cur = &a;
        }
    }
    return net.output;
}

// Backward sweep that only materializes the per-layer pre-activation
// gradients dz (grads.dz); dW and db are left untouched. Learners that apply
// in-place rank-1 updates use this to skip writing out full gradient
// matrices.
inline void mlp_backward_dz(const MlpNet& net, const Eigen::VectorXd& loss_grad_at_output,
                            Gradients& grads) {
    const std::size_t n = net.layers.size();
    grads.dz[n - 1] = loss_grad_at_output; // identity head
    for (std::size_t l = n; l-- > 1;) {
        Eigen::VectorXd& dz_prev = grads.dz[l - 1];
        dz_prev.noalias() = net.layers[l].W.transpose() * grads.dz[l];
        const Eigen::VectorXd& z_prev = net.preacts[l - 1];
        for (Eigen::Index i = 0; i < dz_prev.size(); ++i)
            dz_prev[i] *= activate_grad(net.layers[l - 1].act, z_prev[i]);
    }
}

inline void resize_gradients(Gradients& g, const MlpNet& net) {
    const std::size_t n = net.layers.size();
    g.dW.resize(n);
    g.db.resize(n);
    g.dz.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        g.dW[l].resizeLike(net.layers[l].W);
        g.db[l].resizeLike(net.layers[l].b);
        g.dz[l].resizeLike(net.layers[l].b);
    }
}

// Exact gradients for all layers given dL/d(output). Requires a valid
// forward cache. Hidden-layer gradients flow through the head weights as
// they are at call time, so callers that replace the head update must run
// this before touching the head.
inline void mlp_backward(const MlpNet& net, const Eigen::VectorXd& loss_grad_at_output,
                         Gradients& grads) {
    const std::size_t n = net.layers.size();
    if (grads.dW.size() != n) throw config_error("mlp_backward: gradients not sized for net");
    mlp_backward_dz(net, loss_grad_at_output, grads);
    for (std::size_t l = 0; l < n; ++l) {
        grads.dW[l].noalias() = grads.dz[l] * net.inputs[l].transpose();
        grads.db[l] = grads.dz[l];
    }
}

} // namespace fade
