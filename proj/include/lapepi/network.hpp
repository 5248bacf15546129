// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lapepi/layers.hpp"
#include "lapepi/pyramid.hpp"

namespace lapepi::net {

enum class LayerKind { Conv, Deconv };

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::Conv;
    int k_a = 1, k_w = 1;
    int in_ch = 1, out_ch = 1;
    int s_a = 1, s_w = 1;
    bool has_prelu = true;

    std::size_t weight_count() const { return static_cast<std::size_t>(out_ch) * in_ch * k_a * k_w; }
    std::size_t parameter_count() const { return weight_count() + out_ch + (has_prelu ? out_ch : 0); }
};

struct LayerParams {
    std::vector<double> weight;
    std::vector<double> bias;
    std::vector<double> slope;  // empty for layers without PReLU

    std::size_t size() const { return weight.size() + bias.size() + slope.size(); }
};

/// Widths of the network. The defaults are the published configuration.
struct Widths {
    int features = 56;
    int shrink = 24;
    int mapping_layers = 4;
};

/// Layer inventory in declaration order:
///   Conv_FE1..P, Deconv_S1..P-1, Conv_PE2..P, Conv_S, Conv_M1..m, Conv_E, Deconv_A.
std::vector<LayerSpec> layer_specs(const PyramidConfig& pyramid, int alpha_a, const Widths& widths = {});

struct NetworkParams {
    PyramidConfig pyramid;
    int alpha_a = 3;
    Widths widths;
    std::vector<LayerSpec> specs;
    std::vector<LayerParams> layers;

    /// All-zero weights and biases, PReLU slopes zero.
    static NetworkParams zeros(const PyramidConfig& pyramid, int alpha_a, const Widths& widths = {});

    std::size_t parameter_count() const;
    std::size_t index_of(std::string_view name) const;
    LayerParams& layer(std::string_view name) { return layers[index_of(name)]; }
    const LayerParams& layer(std::string_view name) const { return layers[index_of(name)]; }
    FilterView filter(std::size_t i) const;
    void check_consistent() const;
};

/// Same layout as NetworkParams::layers.
struct Gradients {
    std::vector<LayerParams> layers;

    static Gradients zeros_like(const NetworkParams& p);
    void add(const Gradients& o);
    void scale(double s);
    double squared_norm() const;
};

/// Activations kept by forward() for backward().
struct ForwardCache {
    bool valid = false;
    int alpha_a = 0;
    std::vector<Tensor4> inputs;      // per branch network input
    std::vector<Tensor4> layer_in;    // input of layer i (post-activation of its producer)
    std::vector<Tensor4> layer_pre;   // pre-activation output of layer i (after width alignment)
    std::vector<int> unpadded_width;  // Deconv_S raw output width, 0 for other layers
    std::vector<int> branch_out;      // layer index whose activation ends branch p
};

/// Runs the network. alpha_a <= 0 uses params.alpha_a; any positive stride
/// reuses the trained Deconv_A kernel. Output: (alpha_a (n_a - 1) + 1) x width.
Epi forward(const LapEpiPyramid& pyr, const NetworkParams& params, ForwardCache* cache = nullptr, int alpha_a = 0);

struct BackwardResult {
    Gradients params;
    LapEpiPyramid input;  // gradient with respect to every pyramid entry
};

BackwardResult backward(const NetworkParams& params, const ForwardCache& cache, const Epi& grad_output);

/// Mean over samples of ||pred_i - label_i||_2, with its gradient in `grads`
/// (one per sample, already divided by N). A zero residual gets a zero gradient.
double l2_loss(std::span<const Epi> preds, std::span<const Epi> labels, std::vector<Epi>* grads = nullptr);
double l2_loss(const Epi& pred, const Epi& label, Epi* grad = nullptr);

}  // namespace lapepi::net
