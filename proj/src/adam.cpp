// SPDX-License-Identifier: Apache-2.0
#include "lapepi/adam.hpp"

#include <cmath>

namespace lapepi::net {

AdamState AdamState::zeros_like(const NetworkParams& p) {
    AdamState s;
    const Gradients z = Gradients::zeros_like(p);
    s.m = z.layers;
    s.v = z.layers;
    return s;
}

namespace {

void update(std::vector<double>& x, const std::vector<double>& g, std::vector<double>& m, std::vector<double>& v,
            double lr, double b1, double b2, double c1, double c2, double eps) {
    if (g.size() != x.size() || m.size() != x.size() || v.size() != x.size())
        throw ShapeError("adam_step: gradient or moment shape mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mh = m[i] / c1;
        const double vh = v[i] / c2;
        x[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

}  // namespace

void adam_step(NetworkParams& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg,
               double lr_scale) {
    if (grads.layers.size() != params.layers.size() || state.m.size() != params.layers.size())
        throw ShapeError("adam_step: layer count mismatch");
    ++state.t;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const double lr = cfg.lr_for(params.specs[i].kind) * lr_scale;
        LayerParams& p = params.layers[i];
        const LayerParams& g = grads.layers[i];
        update(p.weight, g.weight, state.m[i].weight, state.v[i].weight, lr, cfg.beta1, cfg.beta2, c1, c2, cfg.eps);
        update(p.bias, g.bias, state.m[i].bias, state.v[i].bias, lr, cfg.beta1, cfg.beta2, c1, c2, cfg.eps);
        update(p.slope, g.slope, state.m[i].slope, state.v[i].slope, lr, cfg.beta1, cfg.beta2, c1, c2, cfg.eps);
    }
}

}  // namespace lapepi::net
