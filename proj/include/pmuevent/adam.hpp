#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pmuevent/dense.hpp"
#include "pmuevent/errors.hpp"

namespace pmuevent {

// Adam optimizer state for one flat parameter vector. beta1/beta2/epsilon
// follow the usual defaults; the training protocol only fixes the learning
// rate (2e-4), which is passed per call.
struct AdamState {
    std::vector<double> m;  // first-moment accumulator
    std::vector<double> v;  // second-moment accumulator
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update over flat parameter views. Parameters and
// state are mutated in place; the step counter advances by exactly one.
inline void adam_step(std::vector<ParamView>& params, const std::vector<double>& grads, AdamState& state,
                      double lr) {
    std::size_t total = 0;
    for (const auto& p : params) total += p.size;
    if (grads.size() != total)
        throw DimensionError("adam_step: gradient size " + std::to_string(grads.size()) +
                             " does not match parameter size " + std::to_string(total));
    if (state.m.size() != total)
        throw DimensionError("adam_step: state size does not match parameter size");
    for (double g : grads)
        if (!std::isfinite(g)) throw TrainingError("adam_step: non-finite gradient");

    state.step += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    std::size_t k = 0;
    for (auto& view : params) {
        for (std::size_t i = 0; i < view.size; ++i, ++k) {
            const double g = grads[k];
            state.m[k] = b1 * state.m[k] + (1.0 - b1) * g;
            state.v[k] = b2 * state.v[k] + (1.0 - b2) * g * g;
            const double mhat = state.m[k] / bc1;
            const double vhat = state.v[k] / bc2;
            view.data[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace pmuevent
