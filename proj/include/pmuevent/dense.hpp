#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pmuevent/errors.hpp"
#include "pmuevent/matrix.hpp"
#include "pmuevent/rng.hpp"

namespace pmuevent {

enum class Activation : std::uint8_t { Linear = 0, Relu = 1, Tanh = 2, Sigmoid = 3, Softplus = 4 };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softplus: return "softplus";
    }
    return "?";
}

inline double activate(Activation a, double x) {
    switch (a) {
        case Activation::Linear: return x;
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Tanh: return std::tanh(x);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::Softplus: return x > 30.0 ? x : std::log1p(std::exp(x));
    }
    return x;
}

// Derivative expressed through the activation's own output, so forward only
// has to store post-activation values.
inline double activation_grad_from_output(Activation a, double y) {
    switch (a) {
        case Activation::Linear: return 1.0;
        case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::Tanh: return 1.0 - y * y;
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::Softplus: return 1.0 - std::exp(-y);
    }
    return 1.0;
}

struct DenseLayer {
    RealMatrix weights;        // out x in
    std::vector<double> bias;  // out
    Activation activation = Activation::Linear;

    std::size_t fan_in() const { return weights.cols; }
    std::size_t fan_out() const { return weights.rows; }
};

using DenseStack = std::vector<DenseLayer>;

// Glorot-uniform initialization: U(-sqrt(6/(fan_in+fan_out)), +...).
inline DenseLayer make_dense_layer(std::size_t fan_in, std::size_t fan_out, Activation act, Pcg32& rng) {
    DenseLayer layer;
    layer.weights = RealMatrix(fan_out, fan_in);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = act;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weights.data) w = rng.uniform(-limit, limit);
    return layer;
}

// Builds a stack input -> hidden... -> output with `hidden_act` on hidden
// layers and `out_act` on the final one.
inline DenseStack make_dense_stack(std::size_t input_dim, const std::vector<std::size_t>& widths,
                                   Activation hidden_act, Activation out_act, Pcg32& rng) {
    if (widths.empty()) throw ConfigError("dense stack needs at least one layer width");
    DenseStack stack;
    std::size_t in = input_dim;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        Activation act = (i + 1 == widths.size()) ? out_act : hidden_act;
        stack.push_back(make_dense_layer(in, widths[i], act, rng));
        in = widths[i];
    }
    return stack;
}

// Forward pass over a batch. Returns all activations: result[0] is the input,
// result[i] the output of layer i-1; backward needs every one of them.
inline std::vector<RealMatrix> forward(const DenseStack& layers, const RealMatrix& input) {
    std::vector<RealMatrix> acts;
    acts.reserve(layers.size() + 1);
    acts.push_back(input);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const DenseLayer& layer = layers[li];
        const RealMatrix& x = acts.back();
        if (x.cols != layer.fan_in())
            throw DimensionError("forward: layer " + std::to_string(li) + " expects fan-in " +
                                 std::to_string(layer.fan_in()) + ", got " + std::to_string(x.cols));
        RealMatrix y(x.rows, layer.fan_out());
        for (std::size_t r = 0; r < y.rows; ++r)
            for (std::size_t c = 0; c < y.cols; ++c) y(r, c) = layer.bias[c];
        add_matmul_bt(x, layer.weights, y);
        for (double& v : y.data) v = activate(layer.activation, v);
        acts.push_back(std::move(y));
    }
    return acts;
}

// Single-vector convenience (batch of one).
inline std::vector<double> forward_vector(const DenseStack& layers, const std::vector<double>& input) {
    RealMatrix x(1, input.size());
    x.data = input;
    auto acts = forward(layers, x);
    return acts.back().data;
}

struct LayerGrads {
    RealMatrix dweights;
    std::vector<double> dbias;
};

struct BackwardResult {
    std::vector<LayerGrads> layer_grads;  // one per layer, shaped like parameters
    RealMatrix input_grad;                // dLoss/dInput, batch-shaped
};

// Reverse pass. `activations` must come from forward() on the same layers;
// `output_grad` is dLoss/dOutput for the final activation.
inline BackwardResult backward(const DenseStack& layers, const std::vector<RealMatrix>& activations,
                               const RealMatrix& output_grad) {
    if (activations.size() != layers.size() + 1)
        throw DimensionError("backward: activation count does not match layer count");
    BackwardResult res;
    res.layer_grads.resize(layers.size());
    RealMatrix dy = output_grad;
    for (std::size_t idx = layers.size(); idx-- > 0;) {
        const DenseLayer& layer = layers[idx];
        const RealMatrix& out = activations[idx + 1];
        const RealMatrix& in = activations[idx];
        require_shape(dy, out.rows, out.cols, "backward output grad");
        // d(pre-activation) = dy * act'(out)
        RealMatrix dpre = dy;
        for (std::size_t i = 0; i < dpre.size(); ++i)
            dpre.data[i] *= activation_grad_from_output(layer.activation, out.data[i]);
        LayerGrads& g = res.layer_grads[idx];
        g.dweights = RealMatrix(layer.fan_out(), layer.fan_in());
        g.dbias.assign(layer.fan_out(), 0.0);
        add_matmul_at(dpre, in, g.dweights);
        for (std::size_t r = 0; r < dpre.rows; ++r) {
            const double* dr = dpre.row_ptr(r);
            for (std::size_t c = 0; c < dpre.cols; ++c) g.dbias[c] += dr[c];
        }
        RealMatrix dx(in.rows, in.cols);
        add_matmul(dpre, layer.weights, dx);
        dy = std::move(dx);
    }
    res.input_grad = std::move(dy);
    return res;
}

// --- flat parameter access ---------------------------------------------
// Optimizers and checkpointing treat a stack as one flat parameter vector:
// for each layer, weights (row-major) then bias.

struct ParamView {
    double* data = nullptr;
    std::size_t size = 0;
};

inline std::size_t parameter_count(const DenseStack& stack) {
    std::size_t n = 0;
    for (const auto& l : stack) n += l.weights.size() + l.bias.size();
    return n;
}

inline std::vector<ParamView> parameter_views(DenseStack& stack) {
    std::vector<ParamView> views;
    views.reserve(stack.size() * 2);
    for (auto& l : stack) {
        views.push_back({l.weights.data.data(), l.weights.size()});
        views.push_back({l.bias.data(), l.bias.size()});
    }
    return views;
}

inline std::vector<double> flatten_grads(const std::vector<LayerGrads>& grads) {
    std::vector<double> flat;
    std::size_t n = 0;
    for (const auto& g : grads) n += g.dweights.size() + g.dbias.size();
    flat.reserve(n);
    for (const auto& g : grads) {
        flat.insert(flat.end(), g.dweights.data.begin(), g.dweights.data.end());
        flat.insert(flat.end(), g.dbias.begin(), g.dbias.end());
    }
    return flat;
}

inline void accumulate_flat(std::vector<double>& into, const std::vector<LayerGrads>& grads) {
    std::size_t k = 0;
    for (const auto& g : grads) {
        for (double v : g.dweights.data) into[k++] += v;
        for (double v : g.dbias) into[k++] += v;
    }
}

}  // namespace pmuevent
