#pragma once

#include <cmath>
#include <cstdint>

#include "moss/nn.hpp"

namespace moss {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <class T>
struct AdamState {
    AdamConfig cfg;
    MlpGrads<T> m;  // first moments, parameter-shaped
    MlpGrads<T> v;  // second moments
    std::int64_t step = 0;

    static AdamState init(const Mlp<T>& net, AdamConfig cfg = {}) {
        AdamState s;
        s.cfg = cfg;
        s.m = MlpGrads<T>::zeros_like(net);
        s.v = MlpGrads<T>::zeros_like(net);
        return s;
    }
};

namespace detail {

template <class T>
void adam_apply(std::span<T> param, std::span<const T> grad, std::span<T> m, std::span<T> v,
                const AdamConfig& cfg, double bc1, double bc2) {
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = static_cast<double>(grad[i]);
        double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        const double update = cfg.lr * (mi / bc1) / (std::sqrt(vi / bc2) + cfg.eps);
        param[i] = static_cast<T>(param[i] - update);
    }
}

}  // namespace detail

/// One bias-corrected Adam step.
template <class T>
void adam_step(Mlp<T>& net, const MlpGrads<T>& grads, AdamState<T>& state) {
    if (grads.weight.size() != net.layers.size())
        throw Error(ErrorCode::Config, "adam_step: gradient shape mismatch");
    if (!grads.all_finite())
        throw Error(ErrorCode::Training, "adam_step: non-finite gradient");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        if (!layer.weight.same_shape(grads.weight[l]) || layer.bias.size() != grads.bias[l].size())
            throw Error(ErrorCode::Config, "adam_step: gradient shape mismatch");
        detail::adam_apply<T>({layer.weight.data(), layer.weight.size()},
                              {grads.weight[l].data(), grads.weight[l].size()},
                              {state.m.weight[l].data(), state.m.weight[l].size()},
                              {state.v.weight[l].data(), state.v.weight[l].size()}, state.cfg,
                              bc1, bc2);
        detail::adam_apply<T>(layer.bias, grads.bias[l], state.m.bias[l], state.v.bias[l],
                              state.cfg, bc1, bc2);
    }
}

/// Scales gradients so their global L2 norm is at most `max_norm`.
/// A non-positive `max_norm` disables clipping.
template <class T>
void clip_grad_norm(MlpGrads<T>& grads, double max_norm) {
    if (max_norm <= 0) return;
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > max_norm) grads.scale(static_cast<T>(max_norm / norm));
}

}  // namespace moss
