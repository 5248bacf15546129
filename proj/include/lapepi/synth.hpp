// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "lapepi/lightfield.hpp"

namespace lapepi {

/// One plane-wave component cos(2*pi*(ku*u/width + kv*v/height) + phase).
/// Integer wave numbers keep the texture periodic over the view, so any
/// sub-pixel translation is evaluated exactly.
struct Wave {
    int ku = 1;
    int kv = 0;
    double amplitude = 0.1;
    double phase = 0.0;
};

/// Periodic luminance profile: `offset` plus at most five plane waves.
struct Texture {
    double offset = 0.5;
    std::vector<Wave> waves;

    double eval(double u, double v, int width, int height) const;
};

/// Opacity over the (unshifted) layer plane. `Full` covers everything with
/// `opacity`; `Stripe` is a soft periodic band along u of the given half
/// width; `Bump` is a narrow periodic von Mises profile whose near-center
/// standard deviation is `half_width` pixels, used for point-like EPI lines.
struct Coverage {
    enum class Kind { Full, Stripe, Bump };
    Kind kind = Kind::Full;
    double opacity = 1.0;
    double center = 0.0;
    double half_width = 8.0;
    double softness = 1.0;

    double eval(double u, int width) const;
};

struct SceneLayer {
    double disparity_px = 0.0;
    Texture texture;
    Coverage coverage;
};

/// Layers are composited in list order (back to front), so disparities must
/// be nondecreasing.
struct SceneSpec {
    std::vector<SceneLayer> layers;
    int n_views = 5;       // along s
    int n_views_t = 1;     // along t; 1 gives a 3-D light field
    int width = 64;        // n_u
    int height = 1;        // n_v

    void validate() const;
};

/// View (t, s) shows every layer translated by (s * d, t * d) with periodic wrap,
/// composited back to front. Output colorspace is LUMA.
LightField4D synth_lightfield(const SceneSpec& spec);

/// A single EPI row set rendered directly (n_views x width), identical to
/// extract_epi(synth_lightfield(spec), US, 0, 0, 0) for height == 1.
Epi synth_epi(const SceneSpec& spec);

/// Three bright Lambertian lines plus a two-line semi-transparent pair standing
/// in for a non-Lambertian object, over a dark background. The largest
/// disparity equals d_max.
SceneSpec toy_epi_scene(int n_views, int width, double d_max);

/// Random layered scene: 1..max_layers layers with band-limited textures and
/// disparities drawn uniformly from [d_min, d_max] (per view step).
SceneSpec random_scene(std::uint64_t seed, int n_views, int n_views_t, int width, int height, double d_min,
                       double d_max, int max_layers = 3);

/// Procedural stand-ins for natural photographs: single views of random
/// layered scenes with 2-D textures (n_views = 1), one per seed offset.
std::vector<Array2> natural_corpus(std::uint64_t seed, int count, int height, int width);

/// EPIs of random layered scenes; disparities are per view step of the
/// n_views-row EPI and drawn from [d_min, d_max].
std::vector<Array2> epi_corpus(std::uint64_t seed, int count, int n_views, int width, double d_min, double d_max);

}  // namespace lapepi
