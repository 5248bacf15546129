// SPDX-License-Identifier: Apache-2.0
#include "lapepi/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lapepi::net {

std::vector<LayerSpec> layer_specs(const PyramidConfig& pyramid, int alpha_a, const Widths& widths) {
    pyramid.validate();
    if (alpha_a < 1) throw Error("alpha_a must be >= 1");
    const int P = pyramid.levels;
    const int F = widths.features;
    std::vector<LayerSpec> specs;
    for (int p = 1; p <= P; ++p)
        specs.push_back({"Conv_FE" + std::to_string(p), LayerKind::Conv, 5, 5, p == 1 ? 1 : 2, F, 1, 1, true});
    for (int p = 1; p < P; ++p)
        specs.push_back({"Deconv_S" + std::to_string(p), LayerKind::Deconv, 5, 5, F, F, 1, int_pow(pyramid.alpha_s, P - p), true});
    for (int p = 2; p <= P; ++p)
        specs.push_back({"Conv_PE" + std::to_string(p), LayerKind::Conv, 1, pyramid.kernel_size(p), F, F, 1, 1, true});
    specs.push_back({"Conv_S", LayerKind::Conv, 1, 1, F * P, widths.shrink, 1, 1, true});
    for (int m = 1; m <= widths.mapping_layers; ++m)
        specs.push_back({"Conv_M" + std::to_string(m), LayerKind::Conv, 3, 3, widths.shrink, widths.shrink, 1, 1, true});
    specs.push_back({"Conv_E", LayerKind::Conv, 1, 1, widths.shrink, F, 1, 1, true});
    specs.push_back({"Deconv_A", LayerKind::Deconv, 9, 9, F, 1, alpha_a, 1, false});
    return specs;
}

NetworkParams NetworkParams::zeros(const PyramidConfig& pyramid, int alpha_a, const Widths& widths) {
    NetworkParams p;
    p.pyramid = pyramid;
    p.alpha_a = alpha_a;
    p.widths = widths;
    p.specs = layer_specs(pyramid, alpha_a, widths);
    for (const LayerSpec& s : p.specs) {
        LayerParams l;
        l.weight.assign(s.weight_count(), 0.0);
        l.bias.assign(static_cast<std::size_t>(s.out_ch), 0.0);
        if (s.has_prelu) l.slope.assign(static_cast<std::size_t>(s.out_ch), 0.0);
        p.layers.push_back(std::move(l));
    }
    return p;
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const LayerParams& l : layers) n += l.size();
    return n;
}

std::size_t NetworkParams::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].name == name) return i;
    throw Error("no layer named '" + std::string(name) + "'");
}

FilterView NetworkParams::filter(std::size_t i) const {
    const LayerSpec& s = specs[i];
    const LayerParams& l = layers[i];
    return {s.out_ch, s.in_ch, s.k_a, s.k_w, l.weight, l.bias};
}

void NetworkParams::check_consistent() const {
    if (specs.size() != layers.size()) throw ShapeError("parameter set does not match layer inventory");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        const LayerParams& l = layers[i];
        if (l.weight.size() != s.weight_count() || l.bias.size() != static_cast<std::size_t>(s.out_ch) ||
            l.slope.size() != (s.has_prelu ? static_cast<std::size_t>(s.out_ch) : 0u))
            throw ShapeError("parameter shapes of layer " + s.name + " do not match the layer inventory");
    }
}

Gradients Gradients::zeros_like(const NetworkParams& p) {
    Gradients g;
    for (const LayerParams& l : p.layers)
        g.layers.push_back({std::vector<double>(l.weight.size(), 0.0), std::vector<double>(l.bias.size(), 0.0),
                            std::vector<double>(l.slope.size(), 0.0)});
    return g;
}

namespace {

void axpy(std::vector<double>& dst, const std::vector<double>& src, double a = 1.0) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
}

}  // namespace

void Gradients::add(const Gradients& o) {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        axpy(layers[i].weight, o.layers[i].weight);
        axpy(layers[i].bias, o.layers[i].bias);
        axpy(layers[i].slope, o.layers[i].slope);
    }
}

void Gradients::scale(double s) {
    for (LayerParams& l : layers) {
        for (double& x : l.weight) x *= s;
        for (double& x : l.bias) x *= s;
        for (double& x : l.slope) x *= s;
    }
}

double Gradients::squared_norm() const {
    double s = 0.0;
    for (const LayerParams& l : layers) {
        for (double x : l.weight) s += x * x;
        for (double x : l.bias) s += x * x;
        for (double x : l.slope) s += x * x;
    }
    return s;
}

namespace {

struct Topology {
    std::vector<std::size_t> fe, ds, pe;  // indexed by level p (1-based; unused slots hold npos)
    std::size_t shrink = 0, expand = 0, angular = 0;
    std::vector<std::size_t> mapping;
};

constexpr std::size_t npos = static_cast<std::size_t>(-1);

Topology topology(const NetworkParams& params) {
    const int P = params.pyramid.levels;
    Topology t;
    t.fe.assign(static_cast<std::size_t>(P + 1), npos);
    t.ds.assign(static_cast<std::size_t>(P + 1), npos);
    t.pe.assign(static_cast<std::size_t>(P + 1), npos);
    for (int p = 1; p <= P; ++p) {
        t.fe[static_cast<std::size_t>(p)] = params.index_of("Conv_FE" + std::to_string(p));
        if (p < P) t.ds[static_cast<std::size_t>(p)] = params.index_of("Deconv_S" + std::to_string(p));
        if (p >= 2) t.pe[static_cast<std::size_t>(p)] = params.index_of("Conv_PE" + std::to_string(p));
    }
    t.shrink = params.index_of("Conv_S");
    for (int m = 1; m <= params.widths.mapping_layers; ++m) t.mapping.push_back(params.index_of("Conv_M" + std::to_string(m)));
    t.expand = params.index_of("Conv_E");
    t.angular = params.index_of("Deconv_A");
    return t;
}

Stride2 layer_stride(const LayerSpec& s, int alpha_a) {
    if (s.name == "Deconv_A") return {alpha_a, 1};
    return {s.s_a, s.s_w};
}

// Replicates the last column until the width reaches `width`.
Tensor4 pad_right_replicate(const Tensor4& x, int width) {
    if (x.w() == width) return x;
    Tensor4 y(x.n(), x.c(), x.h(), width);
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int h = 0; h < x.h(); ++h)
                for (int w = 0; w < width; ++w) y(n, c, h, w) = x(n, c, h, std::min(w, x.w() - 1));
    return y;
}

Tensor4 unpad_right_replicate(const Tensor4& dy, int width) {
    if (dy.w() == width) return dy;
    Tensor4 dx(dy.n(), dy.c(), dy.h(), width);
    for (int n = 0; n < dy.n(); ++n)
        for (int c = 0; c < dy.c(); ++c)
            for (int h = 0; h < dy.h(); ++h)
                for (int w = 0; w < dy.w(); ++w) dx(n, c, h, std::min(w, width - 1)) += dy(n, c, h, w);
    return dx;
}

Tensor4 epi_channels(std::initializer_list<const Epi*> planes) {
    const Epi& first = **planes.begin();
    Tensor4 t(1, static_cast<int>(planes.size()), first.n_a(), first.n_w());
    int c = 0;
    for (const Epi* e : planes) {
        if (e->n_a() != first.n_a() || e->n_w() != first.n_w()) throw ShapeError("pyramid level pair shapes differ");
        std::copy_n(e->data.data(), e->data.size(), t.sample(0) + static_cast<std::size_t>(c++) * t.plane_size());
    }
    return t;
}

Epi channel_to_epi(const Tensor4& t, int c, EpiAxis axis) {
    Epi e(t.h(), t.w(), 0.0, axis);
    std::copy_n(t.sample(0) + static_cast<std::size_t>(c) * t.plane_size(), t.plane_size(), e.data.data());
    return e;
}

struct Runner {
    const NetworkParams& params;
    ForwardCache& cache;
    int alpha_a;
    int full_width;

    Tensor4 run(std::size_t i, Tensor4 x) {
        const LayerSpec& s = params.specs[i];
        const FilterView f = params.filter(i);
        const Stride2 stride = layer_stride(s, alpha_a);
        Tensor4 pre = s.kind == LayerKind::Conv ? conv2d(x, f, stride) : deconv2d(x, f, stride);
        if (s.kind == LayerKind::Deconv && s.name != "Deconv_A") {
            cache.unpadded_width[i] = pre.w();
            pre = pad_right_replicate(pre, full_width);
        }
        Tensor4 post = s.has_prelu ? prelu(pre, params.layers[i].slope) : pre;
        cache.layer_in[i] = std::move(x);
        cache.layer_pre[i] = std::move(pre);
        return post;
    }
};

}  // namespace

Epi forward(const LapEpiPyramid& pyr, const NetworkParams& params, ForwardCache* cache_out, int alpha_a) {
    params.check_consistent();
    const PyramidConfig& cfg = params.pyramid;
    if (pyr.config.levels != cfg.levels || pyr.config.alpha_s != cfg.alpha_s ||
        static_cast<int>(pyr.residuals.size()) != cfg.levels - 1)
        throw ShapeError("pyramid configuration does not match the network");
    if (alpha_a <= 0) alpha_a = params.alpha_a;
    if (pyr.n_a() < 2) throw ShapeError("forward: EPI needs at least 2 angular samples");

    ForwardCache local;
    ForwardCache& cache = cache_out ? *cache_out : local;
    const std::size_t n_layers = params.specs.size();
    cache = ForwardCache{};
    cache.alpha_a = alpha_a;
    cache.layer_in.resize(n_layers);
    cache.layer_pre.resize(n_layers);
    cache.unpadded_width.assign(n_layers, 0);

    const Topology topo = topology(params);
    const int P = cfg.levels;
    const int width = pyr.width();
    Runner runner{params, cache, alpha_a, width};

    std::vector<Tensor4> branch(static_cast<std::size_t>(P));
    for (int p = 1; p <= P; ++p) {
        Tensor4 input = p == 1 ? epi_channels({&pyr.level1})
                               : epi_channels({&pyr.residuals[static_cast<std::size_t>(p - 2)].residual,
                                               &pyr.residuals[static_cast<std::size_t>(p - 2)].blurred});
        cache.inputs.push_back(input);
        Tensor4 h = runner.run(topo.fe[static_cast<std::size_t>(p)], std::move(input));
        if (p < P) h = runner.run(topo.ds[static_cast<std::size_t>(p)], std::move(h));
        if (p >= 2) h = runner.run(topo.pe[static_cast<std::size_t>(p)], std::move(h));
        branch[static_cast<std::size_t>(p - 1)] = std::move(h);
    }

    const int F = params.widths.features;
    Tensor4 merged(1, F * P, pyr.n_a(), width);
    for (int p = 0; p < P; ++p) {
        const Tensor4& b = branch[static_cast<std::size_t>(p)];
        if (b.c() != F || b.h() != pyr.n_a() || b.w() != width)
            throw ShapeError("mismatched shapes after branch merge: branch " + std::to_string(p + 1) + " is " +
                             std::to_string(b.h()) + "x" + std::to_string(b.w()));
        std::copy_n(b.sample(0), b.sample_size(), merged.sample(0) + static_cast<std::size_t>(p) * b.sample_size());
    }

    Tensor4 h = runner.run(topo.shrink, std::move(merged));
    for (std::size_t m : topo.mapping) h = runner.run(m, std::move(h));
    h = runner.run(topo.expand, std::move(h));
    h = runner.run(topo.angular, std::move(h));

    cache.valid = true;
    return channel_to_epi(h, 0, pyr.level1.axis);
}

BackwardResult backward(const NetworkParams& params, const ForwardCache& cache, const Epi& grad_output) {
    if (!cache.valid) throw Error("backward: forward activations are not cached");
    const Topology topo = topology(params);
    const int P = params.pyramid.levels;
    const int F = params.widths.features;
    BackwardResult result;
    result.params.layers.resize(params.layers.size());

    auto back = [&](std::size_t i, const Tensor4& dpost) {
        const LayerSpec& s = params.specs[i];
        const LayerParams& l = params.layers[i];
        LayerParams& g = result.params.layers[i];
        Tensor4 dpre;
        if (s.has_prelu) {
            PreluGrads pg = prelu_backward(cache.layer_pre[i], l.slope, dpost);
            g.slope = std::move(pg.dslope);
            dpre = std::move(pg.dx);
        } else {
            dpre = dpost;
        }
        if (cache.unpadded_width[i] > 0) dpre = unpad_right_replicate(dpre, cache.unpadded_width[i]);
        const FilterView f = params.filter(i);
        const Stride2 stride = layer_stride(s, cache.alpha_a);
        FilterGrads fg = s.kind == LayerKind::Conv ? conv2d_backward(cache.layer_in[i], f, stride, dpre)
                                                   : deconv2d_backward(cache.layer_in[i], f, stride, dpre);
        g.weight = std::move(fg.dw);
        g.bias = std::move(fg.db);
        return std::move(fg.dx);
    };

    const Tensor4& out_pre = cache.layer_pre[topo.angular];
    if (grad_output.n_a() != out_pre.h() || grad_output.n_w() != out_pre.w())
        throw ShapeError("backward: grad_output shape does not match the network output");
    Tensor4 d(1, 1, out_pre.h(), out_pre.w());
    std::copy_n(grad_output.data.data(), grad_output.data.size(), d.data());

    d = back(topo.angular, d);
    d = back(topo.expand, d);
    for (auto it = topo.mapping.rbegin(); it != topo.mapping.rend(); ++it) d = back(*it, d);
    d = back(topo.shrink, d);

    const std::size_t branch_size = d.sample_size() / static_cast<std::size_t>(P);
    LapEpiPyramid& gin = result.input;
    gin.config = params.pyramid;
    gin.residuals.resize(static_cast<std::size_t>(P - 1));
    const EpiAxis axis = EpiAxis::US;
    for (int p = 1; p <= P; ++p) {
        Tensor4 db(1, F, d.h(), d.w());
        std::copy_n(d.sample(0) + static_cast<std::size_t>(p - 1) * branch_size, branch_size, db.sample(0));
        if (p >= 2) db = back(topo.pe[static_cast<std::size_t>(p)], db);
        if (p < P) db = back(topo.ds[static_cast<std::size_t>(p)], db);
        db = back(topo.fe[static_cast<std::size_t>(p)], db);
        if (p == 1) {
            gin.level1 = channel_to_epi(db, 0, axis);
        } else {
            gin.residuals[static_cast<std::size_t>(p - 2)].residual = channel_to_epi(db, 0, axis);
            gin.residuals[static_cast<std::size_t>(p - 2)].blurred = channel_to_epi(db, 1, axis);
        }
    }
    return result;
}

double l2_loss(const Epi& pred, const Epi& label, Epi* grad) {
    if (!pred.data.same_shape(label.data)) throw ShapeError("l2_loss: prediction and label shapes differ");
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data.data()[i] - label.data.data()[i];
        ss += d * d;
    }
    const double norm = std::sqrt(ss);
    if (grad) {
        *grad = Epi(pred.n_a(), pred.n_w(), 0.0, pred.axis);
        if (norm > 0.0)
            for (std::size_t i = 0; i < pred.data.size(); ++i)
                grad->data.data()[i] = (pred.data.data()[i] - label.data.data()[i]) / norm;
    }
    return norm;
}

double l2_loss(std::span<const Epi> preds, std::span<const Epi> labels, std::vector<Epi>* grads) {
    if (preds.size() != labels.size() || preds.empty()) throw ShapeError("l2_loss: batch sizes differ or are empty");
    const double inv_n = 1.0 / static_cast<double>(preds.size());
    double total = 0.0;
    if (grads) grads->resize(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        total += l2_loss(preds[i], labels[i], grads ? &(*grads)[i] : nullptr);
        if (grads)
            for (double& g : (*grads)[i].data.values()) g *= inv_n;
    }
    return total * inv_n;
}

}  // namespace lapepi::net
