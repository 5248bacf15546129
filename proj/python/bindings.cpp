// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lapepi/fourier.hpp"
#include "lapepi/metrics.hpp"
#include "lapepi/pyramid.hpp"
#include "lapepi/reconstruct.hpp"
#include "lapepi/synth.hpp"
#include "lapepi/train.hpp"

namespace py = pybind11;
using namespace lapepi;

namespace {

using NdArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array2 to_array2(const NdArray& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
    Array2 out(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy_n(a.data(), out.size(), out.data());
    return out;
}

NdArray to_numpy(const Array2& a) {
    NdArray out({a.rows(), a.cols()});
    std::copy_n(a.data(), a.size(), out.mutable_data());
    return out;
}

Epi to_epi(const NdArray& a) { return Epi(to_array2(a)); }

PyramidConfig pyramid_config(int levels, int alpha_s, std::vector<int> kernels) {
    PyramidConfig c;
    c.levels = levels;
    c.alpha_s = alpha_s;
    c.level_kernel_sizes = std::move(kernels);
    c.validate();
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Laplacian-pyramid EPI light-field reconstruction";
    m.attr("__version__") = LAPEPI_VERSION;

    py::register_exception<Error>(m, "LapepiError", PyExc_ValueError);

    m.def(
        "toy_epi",
        [](int n_views, int width, double d_max) { return to_numpy(synth_epi(toy_epi_scene(n_views, width, d_max)).data); },
        py::arg("n_views") = 63, py::arg("width") = 216, py::arg("d_max") = 9.0,
        "Toy EPI of three Lambertian lines and a two-line non-Lambertian pair.");
    m.def(
        "random_epi",
        [](std::uint64_t seed, int n_views, int width, double d_min, double d_max) {
            return to_numpy(synth_epi(random_scene(seed, n_views, 1, width, 1, d_min, d_max)).data);
        },
        py::arg("seed"), py::arg("n_views"), py::arg("width"), py::arg("d_min") = 0.0, py::arg("d_max") = 3.0);

    py::class_<PyramidConfig>(m, "PyramidConfig")
        .def(py::init(&pyramid_config), py::arg("levels") = 3, py::arg("alpha_s") = 2,
             py::arg("kernels") = std::vector<int>{5, 13})
        .def_readonly("levels", &PyramidConfig::levels)
        .def_readonly("alpha_s", &PyramidConfig::alpha_s)
        .def_readonly("kernels", &PyramidConfig::level_kernel_sizes);

    py::class_<LapEpiPyramid>(m, "LapEpiPyramid")
        .def_property_readonly("level1", [](const LapEpiPyramid& p) { return to_numpy(p.level1.data); })
        .def_property_readonly("residuals",
                               [](const LapEpiPyramid& p) {
                                   py::list out;
                                   for (const ResidualLevel& l : p.residuals)
                                       out.append(py::make_tuple(to_numpy(l.residual.data), to_numpy(l.blurred.data)));
                                   return out;
                               })
        .def("collapse", [](const LapEpiPyramid& p) { return to_numpy(collapse(p).data); });

    m.def(
        "build_lapepi", [](const NdArray& epi, const PyramidConfig& cfg) { return build_lapepi(to_epi(epi), cfg); },
        py::arg("epi"), py::arg("config") = PyramidConfig{});

    m.def(
        "dft2_amplitude", [](const NdArray& epi, bool hann) { return to_numpy(dft2_amplitude(to_epi(epi), hann)); },
        py::arg("epi"), py::arg("hann") = false);
    m.def(
        "alias_sweep",
        [](const NdArray& epi, std::vector<int> scales, std::vector<double> betas, int rate, double d_max) {
            py::list rows;
            for (const AliasRow& r : sweep(to_epi(epi), scales, betas, rate, d_max).rows)
                rows.append(py::make_tuple(r.scale, r.beta, r.sigma, r.kernel_size));
            return rows;
        },
        py::arg("epi"), py::arg("scales"), py::arg("betas"), py::arg("rate"), py::arg("d_max"),
        "Rows of (scale, beta, sigma, kernel_size).");

    m.def(
        "psnr",
        [](const NdArray& a, const NdArray& b) -> std::optional<double> { return psnr(to_array2(a), to_array2(b)); },
        "PSNR in dB at peak 1; None for identical inputs.");
    m.def("ssim", [](const NdArray& a, const NdArray& b) { return ssim(to_array2(a), to_array2(b)); });

    py::class_<net::NetworkParams>(m, "Network")
        .def_static(
            "init", [](std::uint64_t seed, int alpha_a) { return train::init_params(seed, {}, alpha_a); },
            py::arg("seed") = 1, py::arg("alpha_a") = 3)
        .def_static("load", &train::load_checkpoint, py::arg("path"))
        .def("save", [](const net::NetworkParams& p, const std::filesystem::path& path) { train::save_checkpoint(p, path); })
        .def_property_readonly("parameter_count", &net::NetworkParams::parameter_count)
        .def_property_readonly("layer_names",
                               [](const net::NetworkParams& p) {
                                   std::vector<std::string> names;
                                   for (const auto& s : p.specs) names.push_back(s.name);
                                   return names;
                               })
        .def(
            "reconstruct_epi",
            [](const net::NetworkParams& p, const NdArray& epi, int alpha_a) {
                ReconConfig cfg;
                cfg.alpha_a = alpha_a;
                const Epi in = to_epi(epi);
                Epi out;
                {
                    py::gil_scoped_release release;
                    out = reconstruct_epi(in, p, cfg);
                }
                return to_numpy(out.data);
            },
            py::arg("epi"), py::arg("alpha_a") = 3);

    m.def(
        "angular_interpolate",
        [](const NdArray& epi, int rate, const std::string& kind) {
            return to_numpy(angular_interpolate(to_epi(epi), rate, kind == "linear" ? AngularInterp::Linear : AngularInterp::Cubic).data);
        },
        py::arg("epi"), py::arg("rate"), py::arg("kind") = "cubic");

    m.def(
        "train_on_epis",
        [](const std::vector<NdArray>& epis, int steps, int batch, std::uint64_t seed, double lr_conv, double lr_deconv) {
            train::TrainConfig cfg = train::TrainConfig::for_stage(train::Stage::Pretrain);
            cfg.max_steps = steps;
            cfg.batch = batch;
            cfg.seed = seed;
            cfg.adam.lr_conv = lr_conv;
            cfg.adam.lr_deconv = lr_deconv;
            cfg.log_every = std::max(1, steps / 10);
            train::SampleSource src;
            src.kind = train::SampleSource::Kind::Epi;
            for (const NdArray& a : epis) src.arrays.push_back(to_array2(a));
            train::TrainResult res;
            {
                py::gil_scoped_release release;
                res = train::run_stage(train::extract_patch_pairs(src, cfg), cfg);
            }
            std::vector<std::pair<int, double>> trace;
            for (const auto& p : res.trace) trace.emplace_back(p.step, p.loss);
            return py::make_tuple(res.params, trace);
        },
        py::arg("epis"), py::arg("steps"), py::arg("batch") = 4, py::arg("seed") = 1, py::arg("lr_conv") = 1e-4,
        py::arg("lr_deconv") = 1e-5, "Trains from scratch on 31x44 windows; returns (network, [(step, loss)]).");
}
