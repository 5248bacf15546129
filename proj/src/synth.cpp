// SPDX-License-Identifier: Apache-2.0
#include "lapepi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace lapepi {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double Texture::eval(double u, double v, int width, int height) const {
    double value = offset;
    for (const Wave& w : waves)
        value += w.amplitude * std::cos(kTwoPi * (w.ku * u / width + w.kv * v / std::max(height, 1)) + w.phase);
    return value;
}

double Coverage::eval(double u, int width) const {
    switch (kind) {
        case Kind::Full: return opacity;
        case Kind::Stripe: {
            double d = std::fmod(u - center, static_cast<double>(width));
            if (d < 0) d += width;
            d = std::min(d, width - d);
            return opacity / (1.0 + std::exp((d - half_width) / softness));
        }
        case Kind::Bump: {
            // cos(x) - 1 ~ -x^2 / 2 near the center, so kappa fixes the local sigma.
            const double kappa = width * width / (kTwoPi * kTwoPi * half_width * half_width);
            return opacity * std::exp(kappa * (std::cos(kTwoPi * (u - center) / width) - 1.0));
        }
    }
    return 0.0;
}

void SceneSpec::validate() const {
    if (layers.empty()) throw Error("scene needs at least one layer");
    if (n_views < 1 || n_views_t < 1 || width < 1 || height < 1) throw Error("scene extents must be >= 1");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const SceneLayer& l = layers[i];
        if (std::abs(l.disparity_px) > width / 4.0)
            throw Error("layer " + std::to_string(i) + ": |disparity| exceeds width/4");
        if (i > 0 && l.disparity_px < layers[i - 1].disparity_px)
            throw Error("layers must be ordered back to front (nondecreasing disparity)");
        if (l.texture.waves.size() > 5) throw Error("texture may hold at most five waves");
    }
}

LightField4D synth_lightfield(const SceneSpec& spec) {
    spec.validate();
    LightField4D lf(spec.n_views_t, spec.n_views, spec.height, spec.width, 1, ColorSpace::LUMA);
    for (int t = 0; t < spec.n_views_t; ++t)
        for (int s = 0; s < spec.n_views; ++s)
            for (int v = 0; v < spec.height; ++v)
                for (int u = 0; u < spec.width; ++u) {
                    double value = 0.0;
                    for (const SceneLayer& layer : spec.layers) {
                        const double su = u - s * layer.disparity_px;
                        const double sv = v - t * layer.disparity_px;
                        const double alpha = layer.coverage.eval(su, spec.width);
                        value = value * (1.0 - alpha) + alpha * layer.texture.eval(su, sv, spec.width, spec.height);
                    }
                    lf.at(t, s, v, u) = std::clamp(value, 0.0, 1.0);
                }
    return lf;
}

Epi synth_epi(const SceneSpec& spec) {
    SceneSpec flat = spec;
    flat.n_views_t = 1;
    flat.height = 1;
    return extract_epi(synth_lightfield(flat), EpiAxis::US, 0, 0, 0);
}

SceneSpec toy_epi_scene(int n_views, int width, double d_max) {
    auto point = [&](double d, double center, double brightness, double sigma, double opacity) {
        SceneLayer l;
        l.disparity_px = d;
        l.texture.offset = brightness;
        l.coverage.kind = Coverage::Kind::Bump;
        l.coverage.center = center;
        l.coverage.half_width = sigma;
        l.coverage.opacity = opacity;
        return l;
    };
    SceneSpec spec;
    spec.n_views = n_views;
    spec.width = width;
    SceneLayer background;
    background.texture.offset = 0.0;
    background.disparity_px = -0.25 * d_max;  // black, so only the ordering matters
    spec.layers.push_back(background);
    // Object B: two superimposed half-transparent lines of different slope.
    spec.layers.push_back(point(-0.25 * d_max, 0.30 * width, 0.8, 1.0, 0.5));
    spec.layers.push_back(point(0.10 * d_max, 0.15 * width, 0.7, 1.0, 0.8));  // A
    spec.layers.push_back(point(0.25 * d_max, 0.33 * width, 0.8, 1.0, 0.5));  // B, second line
    spec.layers.push_back(point(0.50 * d_max, 0.60 * width, 0.6, 1.0, 0.8));  // C
    spec.layers.push_back(point(d_max, 0.80 * width, 1.0, 1.5, 1.0));         // D
    return spec;
}

SceneSpec random_scene(std::uint64_t seed, int n_views, int n_views_t, int width, int height, double d_min,
                       double d_max, int max_layers) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto randint = [&](int lo, int hi) { return lo + static_cast<int>(unit(rng) * (hi - lo + 1) * 0.999999); };

    SceneSpec spec;
    spec.n_views = n_views;
    spec.n_views_t = n_views_t;
    spec.width = width;
    spec.height = height;

    const int n_layers = randint(1, std::max(1, max_layers));
    std::vector<double> disparities(static_cast<std::size_t>(n_layers));
    for (double& d : disparities) d = uniform(d_min, d_max);
    std::ranges::sort(disparities);

    const int max_ku = std::max(1, width / 8);
    const int max_kv = std::max(0, height / 8);
    for (int i = 0; i < n_layers; ++i) {
        SceneLayer layer;
        layer.disparity_px = disparities[static_cast<std::size_t>(i)];
        layer.texture.offset = uniform(0.3, 0.7);
        const int n_waves = randint(2, 5);
        const double budget = std::min(layer.texture.offset, 1.0 - layer.texture.offset) * 0.95;
        std::vector<double> amps(static_cast<std::size_t>(n_waves));
        double total = 0.0;
        for (double& a : amps) total += (a = uniform(0.2, 1.0));
        for (int w = 0; w < n_waves; ++w) {
            Wave wave;
            wave.ku = randint(1, max_ku);
            wave.kv = max_kv > 0 ? randint(0, max_kv) : 0;
            wave.amplitude = budget * amps[static_cast<std::size_t>(w)] / total;
            wave.phase = uniform(0.0, kTwoPi);
            layer.texture.waves.push_back(wave);
        }
        if (i > 0) {
            layer.coverage.kind = Coverage::Kind::Stripe;
            layer.coverage.center = uniform(0.0, width);
            layer.coverage.half_width = uniform(width / 10.0, width / 4.0);
            layer.coverage.softness = uniform(0.5, 1.5);
        }
        spec.layers.push_back(layer);
    }
    return spec;
}

std::vector<Array2> natural_corpus(std::uint64_t seed, int count, int height, int width) {
    std::vector<Array2> out;
    for (int i = 0; i < count; ++i) {
        const SceneSpec spec = random_scene(seed + static_cast<std::uint64_t>(i), 1, 1, width, height, 0.0, 0.0, 4);
        out.push_back(synth_lightfield(spec).view(0, 0));
    }
    return out;
}

std::vector<Array2> epi_corpus(std::uint64_t seed, int count, int n_views, int width, double d_min, double d_max) {
    std::vector<Array2> out;
    for (int i = 0; i < count; ++i)
        out.push_back(synth_epi(random_scene(seed + static_cast<std::uint64_t>(i), n_views, 1, width, 1, d_min, d_max)).data);
    return out;
}

}  // namespace lapepi
