// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "lapepi/network.hpp"

namespace lapepi::net {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lr_conv = 1e-4;
    double lr_deconv = 1e-5;

    static AdamConfig pretrain() { return {}; }
    static AdamConfig finetune() {
        AdamConfig c;
        c.lr_conv = 1e-5;
        c.lr_deconv = 1e-6;
        return c;
    }
    double lr_for(LayerKind kind) const { return kind == LayerKind::Conv ? lr_conv : lr_deconv; }
};

struct AdamState {
    std::int64_t t = 0;
    std::vector<LayerParams> m;
    std::vector<LayerParams> v;

    static AdamState zeros_like(const NetworkParams& p);
};

/// One bias-corrected ADAM update. `lr_scale` multiplies both learning rates.
void adam_step(NetworkParams& params, const Gradients& grads, AdamState& state, const AdamConfig& cfg,
               double lr_scale = 1.0);

}  // namespace lapepi::net
