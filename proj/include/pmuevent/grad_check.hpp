#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pmuevent/adam.hpp"
#include "pmuevent/dense.hpp"

namespace pmuevent {

// Relative error guarded by a floor so that near-zero gradient pairs (where
// central differences only return roundoff) do not report spurious blowups.
inline double guarded_rel_error(double analytic, double numeric, double floor = 1e-6) {
    const double denom = std::max(floor, std::max(std::fabs(analytic), std::fabs(numeric)));
    return std::fabs(analytic - numeric) / denom;
}

// Central-difference gradients of an arbitrary scalar function of the
// parameters behind `views`. The closure must be deterministic.
template <typename LossFn>
std::vector<double> finite_difference_gradients(std::vector<ParamView>& views, LossFn&& loss, double h) {
    std::vector<double> grads;
    for (auto& view : views) {
        for (std::size_t i = 0; i < view.size; ++i) {
            const double saved = view.data[i];
            view.data[i] = saved + h;
            const double up = loss();
            view.data[i] = saved - h;
            const double down = loss();
            view.data[i] = saved;
            grads.push_back((up - down) / (2.0 * h));
        }
    }
    return grads;
}

// Scalar loss over a network output, with an analytic gradient.
struct QuadraticLoss {
    // 0.5 * sum((y - target)^2), batch-summed
    RealMatrix target;
    double value(const RealMatrix& y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = y.data[i] - target.data[i];
            s += 0.5 * d * d;
        }
        return s;
    }
    RealMatrix grad(const RealMatrix& y) const {
        RealMatrix g(y.rows, y.cols);
        for (std::size_t i = 0; i < y.size(); ++i) g.data[i] = y.data[i] - target.data[i];
        return g;
    }
};

// Compares every parameter's analytic gradient against central finite
// differences and reports the worst guarded relative error.
template <typename Loss>
double grad_check(DenseStack& layers, const Loss& loss, const RealMatrix& input, double h) {
    if (h <= 0.0) throw ConfigError("grad_check: h must be positive");
    auto acts = forward(layers, input);
    auto analytic = backward(layers, acts, loss.grad(acts.back()));
    const std::vector<double> flat_analytic = flatten_grads(analytic.layer_grads);
    auto views = parameter_views(layers);
    const std::vector<double> numeric = finite_difference_gradients(
        views, [&]() { return loss.value(forward(layers, input).back()); }, h);
    double worst = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i)
        worst = std::max(worst, guarded_rel_error(flat_analytic[i], numeric[i]));
    return worst;
}

}  // namespace pmuevent
