// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>

#include "../oracles.hpp"
#include "lapepi/image_io.hpp"
#include "lapepi/lightfield.hpp"
#include "lapepi/pyramid.hpp"
#include "lapepi/synth.hpp"

using namespace lapepi;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("lapepi_unit_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

LightField4D random_lf(std::mt19937_64& rng, int n_t, int n_s, int n_v, int n_u, int channels) {
    LightField4D lf(n_t, n_s, n_v, n_u, channels, channels == 3 ? ColorSpace::RGB : ColorSpace::LUMA);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& v : lf.samples()) v = u(rng);
    return lf;
}

// Disparity from the phase of one DFT bin: row s is the texture shifted by s * d.
double phase_disparity(const Epi& e, int k) {
    const int n = e.n_w();
    auto coef = [&](int row) {
        std::complex<double> acc = 0.0;
        for (int u = 0; u < n; ++u) acc += e(row, u) * std::polar(1.0, -2.0 * std::numbers::pi * k * u / n);
        return acc;
    };
    // Least-squares slope of the unwrapped phase over all rows.
    const std::complex<double> c0 = coef(0);
    std::vector<double> phase;
    double prev = 0.0;
    for (int s = 0; s < e.n_a(); ++s) {
        double ph = std::arg(coef(s) / c0);
        while (ph - prev > std::numbers::pi) ph -= 2 * std::numbers::pi;
        while (ph - prev < -std::numbers::pi) ph += 2 * std::numbers::pi;
        phase.push_back(ph);
        prev = ph;
    }
    double sxy = 0, sxx = 0;
    for (int s = 0; s < e.n_a(); ++s) sxy += s * phase[static_cast<std::size_t>(s)], sxx += s * s;
    const double slope = sxy / sxx;
    return -slope * n / (2.0 * std::numbers::pi * k);
}

}  // namespace

TEST_CASE("ycbcr white and black points") {
    LightField4D lf(1, 2, 1, 1, 3, ColorSpace::RGB);
    for (int c = 0; c < 3; ++c) lf.at(0, 0, 0, 0, c) = 1.0;
    const LightField4D y = rgb_to_ycbcr(lf);
    CHECK(y.at(0, 0, 0, 0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(y.at(0, 0, 0, 0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(y.at(0, 0, 0, 0, 2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(y.at(0, 1, 0, 0, 0) == 0.0);
    CHECK(y.at(0, 1, 0, 0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(y.at(0, 1, 0, 0, 2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("ycbcr round trip over 1e5 samples") {
    std::mt19937_64 rng(11);
    const LightField4D lf = random_lf(rng, 2, 5, 50, 100, 3);
    const LightField4D back = ycbcr_to_rgb(rgb_to_ycbcr(lf));
    double err = 0.0;
    for (std::size_t i = 0; i < lf.samples().size(); ++i) err = std::max(err, std::abs(lf.samples()[i] - back.samples()[i]));
    CHECK(err <= 1e-12);
}

TEST_CASE("extract and insert are inverse on their slice") {
    std::mt19937_64 rng(3);
    LightField4D lf = random_lf(rng, 3, 4, 5, 6, 1);
    const LightField4D orig = lf;
    for (EpiAxis axis : {EpiAxis::US, EpiAxis::VT}) {
        const Epi e = extract_epi(lf, axis, 2, 1, 0);
        CHECK(e.n_a() == (axis == EpiAxis::US ? 4 : 3));
        CHECK(e.n_w() == (axis == EpiAxis::US ? 6 : 5));
        insert_epi(lf, e, axis, 2, 1, 0);
        CHECK(lf == orig);
    }
    // Zeroing one slice leaves the rest untouched.
    Epi z = extract_epi(lf, EpiAxis::US, 1, 2, 0);
    for (double& v : z.data.values()) v = 0.0;
    insert_epi(lf, z, EpiAxis::US, 1, 2, 0);
    for (int t = 0; t < 3; ++t)
        for (int s = 0; s < 4; ++s)
            for (int v = 0; v < 5; ++v)
                for (int u = 0; u < 6; ++u) {
                    if (t == 2 && v == 1) CHECK(lf.at(t, s, v, u) == 0.0);
                    else CHECK(lf.at(t, s, v, u) == orig.at(t, s, v, u));
                }
    CHECK_THROWS_AS(insert_epi(lf, Epi(4, 7), EpiAxis::US, 1, 2, 0), ShapeError);
}

TEST_CASE("constant light field gives constant EPIs") {
    LightField4D lf(2, 3, 4, 5, 1, ColorSpace::LUMA);
    for (double& v : lf.samples()) v = 0.37;
    const Epi e = extract_epi(lf, EpiAxis::VT, 3, 1, 0);
    for (double v : e.data.values()) CHECK(v == 0.37);
}

TEST_CASE("angular decimation") {
    std::mt19937_64 rng(5);
    const Epi e31 = oracle::random_epi(rng, 31, 44);
    const Epi d = angular_decimate(e31, 3);
    CHECK(d.n_a() == 11);
    for (int i = 0; i < 11; ++i)
        for (int w = 0; w < 44; ++w) CHECK(d(i, w) == e31(3 * i, w));
    CHECK(angular_decimate(e31, 1) == e31);
    CHECK(angular_decimate(oracle::random_epi(rng, 7, 4), 3).n_a() == 3);
    CHECK_THROWS_AS(angular_decimate(oracle::random_epi(rng, 8, 4), 3), Error);
}

TEST_CASE("synthetic scenes shift by their disparity") {
    SceneSpec spec;
    spec.n_views = 5;
    spec.width = 64;
    SceneLayer layer;
    layer.texture.waves = {{1, 0, 0.2, 0.3}, {3, 0, 0.1, 1.0}};
    spec.layers = {layer};
    spec.layers[0].disparity_px = 0.0;
    const LightField4D still = synth_lightfield(spec);
    for (int s = 1; s < 5; ++s) CHECK(still.view(0, s) == still.view(0, 0));

    spec.layers[0].disparity_px = 2.0;
    const LightField4D moved = synth_lightfield(spec);
    const Array2 v0 = moved.view(0, 0), v4 = moved.view(0, 4);
    for (int u = 0; u < 64; ++u) CHECK(v4(0, u) == doctest::Approx(v0(0, wrap_index(u - 8, 64))).epsilon(1e-12));

    CHECK(synth_epi(spec) == extract_epi(moved, EpiAxis::US, 0, 0, 0));
}

TEST_CASE("fitted EPI slopes equal layer disparities") {
    for (double d : {0.5, 2.0, 9.0}) {
        SceneSpec spec;
        spec.n_views = 9;
        spec.width = 128;
        SceneLayer layer;
        layer.disparity_px = d;
        layer.texture.waves = {{2, 0, 0.2, 0.7}};
        spec.layers = {layer};
        CHECK(std::abs(phase_disparity(synth_epi(spec), 2) - d) < 0.1);
    }
}

TEST_CASE("scene validation") {
    SceneSpec spec;
    CHECK_THROWS_AS(spec.validate(), Error);
    SceneLayer a, b;
    a.disparity_px = 2;
    b.disparity_px = 1;
    spec.layers = {a, b};
    CHECK_THROWS_AS(spec.validate(), Error);
    CHECK_NOTHROW(toy_epi_scene(63, 216, 9.0).validate());
}

TEST_CASE("light field directory round trip") {
    const auto dir = fresh_dir("io");
    std::mt19937_64 rng(9);
    LightField4D lf = random_lf(rng, 3, 3, 64, 64, 3);
    // Quantize so the 8-bit round trip is exact.
    for (double& v : lf.samples()) v = std::round(v * 255.0) / 255.0;
    save_lightfield(dir, lf);
    const LightField4D back = load_lightfield(dir);
    CHECK(back.n_t() == 3);
    CHECK(back.n_s() == 3);
    CHECK(back.n_v() == 64);
    CHECK(back.n_u() == 64);
    double err = 0.0;
    for (std::size_t i = 0; i < lf.samples().size(); ++i) err = std::max(err, std::abs(lf.samples()[i] - back.samples()[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("light field loading errors") {
    const auto dir = fresh_dir("io_err");
    std::mt19937_64 rng(10);
    save_lightfield(dir, random_lf(rng, 2, 2, 8, 8, 1));
    std::filesystem::remove(dir / "view_1_1.png");
    CHECK_THROWS_WITH_AS(load_lightfield(dir), doctest::Contains("missing view (1,1)"), IoError);

    const auto dir2 = fresh_dir("io_size");
    save_lightfield(dir2, random_lf(rng, 1, 5, 64, 64, 1));
    write_png(dir2 / "view_0_3.png", Array2(63, 64, 0.5));
    CHECK_THROWS_WITH_AS(load_lightfield(dir2), doctest::Contains("inconsistent spatial size"), IoError);
}

TEST_CASE("gaussian kernels") {
    CHECK(gaussian_kernel_1d(1) == std::vector<double>{1.0});
    const auto k5 = gaussian_kernel_1d(5);
    CHECK(kernel_sigma_px(5) == 0.5);
    double sum = 0.0;
    for (double v : k5) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-15);
    const auto k13 = gaussian_kernel_1d(13);
    CHECK(kernel_sigma_px(13) == 1.5);
    for (int i = 0; i < 13; ++i) CHECK(k13[static_cast<std::size_t>(i)] == k13[static_cast<std::size_t>(12 - i)]);
}

TEST_CASE("spatial resampling") {
    std::mt19937_64 rng(12);
    const Epi e = oracle::random_epi(rng, 4, 32);
    CHECK(spatial_downsample(e, 1) == e);
    CHECK(spatial_upsample(e, 1) == e);
    const Epi c(3, 32, 0.42);
    const Epi cd = spatial_downsample(c, 4), cu = spatial_upsample(c, 2);
    CHECK(cd.n_w() == 8);
    CHECK(cu.n_w() == 64);
    for (double v : cd.data.values()) CHECK(v == doctest::Approx(0.42).epsilon(1e-14));
    for (double v : cu.data.values()) CHECK(v == doctest::Approx(0.42).epsilon(1e-14));

    // Ramp: original samples are reproduced exactly.
    Epi ramp(1, 16);
    for (int w = 0; w < 16; ++w) ramp(0, w) = w / 15.0;
    const Epi up = spatial_upsample(ramp, 2);
    for (int w = 0; w < 16; ++w) CHECK(up(0, 2 * w) == ramp(0, w));
}

TEST_CASE("downsampled sinusoid is attenuated by the kernel response") {
    const int n = 128;
    Epi e(1, n);
    for (int w = 0; w < n; ++w) e(0, w) = std::cos(2 * std::numbers::pi * w / 32.0);
    const Epi d = spatial_downsample(e, 2);
    // DTFT of the symmetric 5-tap kernel at 2 pi / 32.
    const auto k = gaussian_kernel_1d(5);
    double h = 0.0;
    for (int i = -2; i <= 2; ++i) h += k[static_cast<std::size_t>(i + 2)] * std::cos(2 * std::numbers::pi * i / 32.0);
    // The mirror border is not a symmetry axis of the wave at the right edge.
    for (int w = 0; w < n / 2 - 1; ++w) CHECK(d(0, w) == doctest::Approx(h * std::cos(2 * std::numbers::pi * w / 16.0)).epsilon(1e-12));
}

TEST_CASE("pyramid shapes and constant input") {
    const PyramidConfig cfg;
    std::mt19937_64 rng(13);
    const LapEpiPyramid pyr = build_lapepi(synth_epi(random_scene(1, 11, 1, 44, 1, 0, 3)), cfg);
    CHECK(pyr.level1.n_w() == 11);
    REQUIRE(pyr.residuals.size() == 2);
    CHECK(pyr.residuals[0].residual.n_w() == 22);
    CHECK(pyr.residuals[0].blurred.n_w() == 22);
    CHECK(pyr.residuals[1].residual.n_w() == 44);
    CHECK(pyr.residuals[1].blurred.n_w() == 44);
    for (const auto& r : pyr.residuals) CHECK(r.residual.n_a() == 11);

    const LapEpiPyramid flat = build_lapepi(Epi(5, 32, 0.3), cfg);
    for (double v : flat.level1.data.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));
    for (const auto& r : flat.residuals)
        for (double v : r.residual.data.values()) CHECK(std::abs(v) < 1e-15);

    CHECK_THROWS_AS(build_lapepi(Epi(3, 30), cfg), Error);
    PyramidConfig bad;
    bad.level_kernel_sizes = {13, 5};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("collapse inverts the pyramid and is linear") {
    const PyramidConfig cfg;
    std::mt19937_64 rng(14);
    for (int i = 0; i < 10; ++i) {
        const Epi e = oracle::random_epi(rng, 8 + i, 32 + 4 * i);
        CHECK(max_abs_diff(collapse(build_lapepi(e, cfg)).data, e.data) <= 1e-12);
    }
    const Epi a = oracle::random_epi(rng, 5, 40), b = oracle::random_epi(rng, 5, 40);
    LapEpiPyramid pa = build_lapepi(a, cfg), pb = build_lapepi(b, cfg);
    LapEpiPyramid mix = pa;
    auto combine = [](Epi& dst, const Epi& x, const Epi& y) {
        for (std::size_t k = 0; k < dst.data.size(); ++k) dst.data.data()[k] = 2.0 * x.data.data()[k] - 0.5 * y.data.data()[k];
    };
    combine(mix.level1, pa.level1, pb.level1);
    for (std::size_t l = 0; l < mix.residuals.size(); ++l) combine(mix.residuals[l].residual, pa.residuals[l].residual, pb.residuals[l].residual);
    Epi expect = a;
    combine(expect, collapse(pa), collapse(pb));
    CHECK(max_abs_diff(collapse(mix).data, expect.data) <= 1e-12);

    // Zeroed residuals: iterated upsampling of level 1.
    LapEpiPyramid z = pa;
    for (auto& r : z.residuals)
        for (double& v : r.residual.data.values()) v = 0.0;
    CHECK(collapse(z) == spatial_upsample(spatial_upsample(pa.level1, 2), 2));
}

TEST_CASE("reflect padding and crop") {
    std::mt19937_64 rng(15);
    const Epi e = oracle::random_epi(rng, 3, 41);
    SpatialPadding pad;
    const Epi p = pad_spatial_reflect(e, 4, &pad);
    CHECK(p.n_w() == 44);
    CHECK(pad.left == 1);
    CHECK(pad.right == 2);
    CHECK(crop_spatial(p, pad) == e);
}
