// SPDX-License-Identifier: Apache-2.0
#include "lapepi/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "lapepi/fourier.hpp"
#include "lapepi/image_io.hpp"
#include "lapepi/metrics.hpp"
#include "lapepi/reconstruct.hpp"
#include "lapepi/synth.hpp"
#include "lapepi/train.hpp"

namespace lapepi::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    int threads = 1;
    int verbosity = 1;
};

struct SynthOpts {
    std::string kind = "scene";
    std::string out;
    int views = 3, views_t = 1, width = 64, height = 64, count = 16;
    double d_min = 0.0, d_max = 9.0;
};

struct AnalyzeOpts {
    std::string epi, out = "alias_report.csv";
    double d_max = 9.0;
    int rate = 3;
    std::vector<int> scales{1, 2, 4};
    std::vector<double> betas{10, 50, 100, 300};
    bool hann = false;
};

struct DecomposeOpts {
    std::string epi, out;
    int levels = 3, alpha_s = 2;
    std::vector<int> kernels{5, 13};
};

struct TrainOpts {
    std::string stage = "pretrain", source, init, ckpt, trace = "loss_trace.csv";
    int steps = 1000, batch = 28, log_every = 100, checkpoint_every = 0, decay_every = 0;
    double decay_factor = 0.5;
    std::optional<double> lr_conv, lr_deconv;
};

struct ReconOpts {
    std::string lf, ckpt, out, mode = "3d", policy = "luma";
    int alpha = 3;
    bool copy_inputs = false;
};

struct EvalOpts {
    std::string recon, truth, out = "report.csv", scene, ckpt;
    int rate = 0;
};

std::string default_checkpoint() {
    if (const char* dir = std::getenv("LAPEPI_CHECKPOINT_DIR")) return (fs::path(dir) / "model.bin").string();
    return "model.bin";
}

std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

// PNG files in `dir` become arrays; subdirectories holding a light field contribute
// every horizontal EPI of their luma.
std::vector<Array2> load_sources(const fs::path& dir, bool as_epis) {
    if (!fs::is_directory(dir)) throw IoError("source directory not found: " + dir.string());
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    std::vector<Array2> arrays;
    for (const fs::path& p : entries) {
        if (fs::is_directory(p) && fs::exists(p / "manifest.json")) {
            if (!as_epis) continue;
            const LightField4D lf = to_luma(load_lightfield(p));
            for (int t = 0; t < lf.n_t(); ++t)
                for (int v = 0; v < lf.n_v(); ++v) arrays.push_back(extract_epi(lf, EpiAxis::US, v, t, 0).data);
        } else if (p.extension() == ".png") {
            arrays.push_back(read_png_gray(p));
        }
    }
    if (arrays.empty()) throw IoError("no training sources in " + dir.string());
    return arrays;
}

void run_synth(const SynthOpts& o, const Globals& g, std::ostream& out) {
    if (o.kind == "toy-epi") {
        const Epi e = synth_epi(toy_epi_scene(o.views, o.width, o.d_max));
        write_png(o.out, e.data);
        out << "wrote " << o.out << " (" << e.n_a() << "x" << e.n_w() << ")\n";
    } else if (o.kind == "scene") {
        const SceneSpec spec = random_scene(g.seed, o.views, o.views_t, o.width, o.height, o.d_min, o.d_max);
        save_lightfield(o.out, synth_lightfield(spec));
        out << "wrote " << o.out << " (" << o.views_t << "x" << o.views << " views)\n";
    } else if (o.kind == "natural-corpus" || o.kind == "epi-corpus") {
        fs::create_directories(o.out);
        const auto arrays = o.kind == "natural-corpus"
                                ? natural_corpus(g.seed, o.count, o.height, o.width)
                                : epi_corpus(g.seed, o.count, o.views, o.width, o.d_min, o.d_max);
        for (std::size_t i = 0; i < arrays.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "%04zu.png", i);
            write_png(fs::path(o.out) / name, arrays[i]);
        }
        out << "wrote " << arrays.size() << " images to " << o.out << "\n";
    } else {
        throw CLI::ValidationError("--kind", "unknown kind " + o.kind);
    }
}

void run_analyze(const AnalyzeOpts& o, std::ostream& out) {
    const Epi epi(read_png_gray(o.epi));
    const AliasReport rep = sweep(epi, o.scales, o.betas, o.rate, o.d_max, o.hann);
    write_file_atomic(o.out, rep.to_csv());
    out << "wrote " << o.out << " (" << rep.rows.size() << " rows)\n";
}

void run_decompose(const DecomposeOpts& o, std::ostream& out) {
    PyramidConfig cfg{o.levels, o.alpha_s, o.kernels};
    cfg.validate();
    SpatialPadding pad;
    const Epi epi = pad_spatial_reflect(Epi(read_png_gray(o.epi)), cfg.total_factor(), &pad);
    const LapEpiPyramid pyr = build_lapepi(epi, cfg);
    fs::create_directories(o.out);
    write_png(fs::path(o.out) / "level1.png", pyr.level1.data);
    // Residuals are signed; they are stored offset by 0.5 for viewing.
    auto shifted = [](const Epi& e) {
        Array2 a = e.data;
        for (double& v : a.values()) v += 0.5;
        return a;
    };
    for (std::size_t i = 0; i < pyr.residuals.size(); ++i) {
        const std::string p = std::to_string(i + 2);
        write_png(fs::path(o.out) / ("residual" + p + ".png"), shifted(pyr.residuals[i].residual));
        write_png(fs::path(o.out) / ("blurred" + p + ".png"), shifted(pyr.residuals[i].blurred));
    }
    out << "levels=" << cfg.levels << " padding=" << pad.left << "," << pad.right
        << " collapse_max_abs_error=" << csv_number(max_abs_diff(collapse(pyr).data, epi.data)) << "\n";
}

void run_train(const TrainOpts& o, const Globals& g, std::ostream& out) {
    const train::Stage stage = o.stage == "finetune" ? train::Stage::Finetune : train::Stage::Pretrain;
    train::TrainConfig cfg = train::TrainConfig::for_stage(stage);
    cfg.max_steps = o.steps;
    cfg.batch = o.batch;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.log_every = o.log_every;
    cfg.checkpoint_every = o.checkpoint_every;
    cfg.decay_every = o.decay_every;
    cfg.decay_factor = o.decay_factor;
    if (o.lr_conv) cfg.adam.lr_conv = *o.lr_conv;
    if (o.lr_deconv) cfg.adam.lr_deconv = *o.lr_deconv;

    train::SampleSource src;
    src.kind = stage == train::Stage::Pretrain ? train::SampleSource::Kind::NaturalImage : train::SampleSource::Kind::Epi;
    src.arrays = load_sources(o.source, stage == train::Stage::Finetune);
    int skipped = 0;
    const auto pairs = train::extract_patch_pairs(src, cfg, &skipped);
    out << "sources=" << src.arrays.size() << " pairs=" << pairs.size() << " skipped=" << skipped << "\n";

    std::optional<net::NetworkParams> init;
    if (!o.init.empty()) init = train::load_checkpoint(o.init);
    const std::string ckpt = o.ckpt.empty() ? default_checkpoint() : o.ckpt;
    const auto sink = [&](const net::NetworkParams& p, int step) {
        train::save_checkpoint(p, ckpt);
        if (g.verbosity > 1) out << "checkpoint step " << step << "\n";
    };
    const train::TrainResult res = train::run_stage(pairs, cfg, init ? &*init : nullptr, sink);
    write_file_atomic(o.trace, train::loss_trace_csv(res.trace));
    if (g.verbosity > 0)
        for (const auto& p : res.trace) out << "step " << p.step << " loss " << csv_number(p.loss) << "\n";
    if (res.diverged) throw Error("training stopped at step " + std::to_string(res.steps + 1) + ": non-finite loss; last good parameters saved to " + ckpt);
    out << "wrote " << ckpt << " and " << o.trace << "\n";
}

void run_reconstruct(const ReconOpts& o, const Globals& g, std::ostream& out) {
    const net::NetworkParams params = train::load_checkpoint(o.ckpt.empty() ? default_checkpoint() : o.ckpt);
    ReconConfig cfg;
    cfg.alpha_a = o.alpha;
    cfg.channels = o.policy == "rgb" ? ChannelPolicy::PerChannel : ChannelPolicy::LumaNetwork;
    cfg.copy_inputs = o.copy_inputs;
    cfg.threads = g.threads;
    const LightField4D lf = load_lightfield(o.lf);
    const LightField4D res = o.mode == "4d" ? reconstruct_lf4d(lf, params, cfg) : reconstruct_lf3d(lf, params, cfg);
    save_lightfield(o.out, res);
    out << "wrote " << o.out << " (" << res.n_t() << "x" << res.n_s() << " views from " << lf.n_t() << "x" << lf.n_s() << ")\n";
}

void run_eval(const EvalOpts& o, std::ostream& out) {
    const LightField4D recon = load_lightfield(o.recon), truth = load_lightfield(o.truth);
    const std::vector<bool> mask = o.rate > 0 ? synthesized_mask(truth.n_t(), truth.n_s(), o.rate) : std::vector<bool>{};
    EvalReport rep = evaluate(recon, truth, mask);
    rep.scene = o.scene;
    rep.alpha_a = o.rate;
    rep.checkpoint = o.ckpt;
    write_file_atomic(o.out, rep.to_csv());
    out << rep.summary() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"lapepi: light-field angular densification toolkit", "lapepi"};
    app.set_version_flag("--version", std::string(LAPEPI_VERSION));
    app.set_config("--config", "", "plain-text config file (key = value, [subcommand] sections)");
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads")->capture_default_str()->check(CLI::Range(1, 256));
    app.add_option("--verbosity", g.verbosity, "0 quiet, 1 normal, 2 chatty")->capture_default_str()->check(CLI::Range(0, 2));

    SynthOpts so;
    auto* synth = app.add_subcommand("synth", "render synthetic light fields, EPIs and corpora");
    synth->add_option("--kind", so.kind, "toy-epi | scene | natural-corpus | epi-corpus")->capture_default_str()
        ->check(CLI::IsMember({"toy-epi", "scene", "natural-corpus", "epi-corpus"}));
    synth->add_option("--out", so.out, "output file (toy-epi) or directory")->required();
    synth->add_option("--views", so.views, "views along s (EPI rows)")->capture_default_str();
    synth->add_option("--views-t", so.views_t, "views along t")->capture_default_str();
    synth->add_option("--width", so.width)->capture_default_str();
    synth->add_option("--height", so.height)->capture_default_str();
    synth->add_option("--count", so.count, "corpus size")->capture_default_str();
    synth->add_option("--dmin", so.d_min, "smallest disparity per view step")->capture_default_str();
    synth->add_option("--dmax", so.d_max, "largest disparity per view step")->capture_default_str();

    AnalyzeOpts ao;
    auto* analyze = app.add_subcommand("analyze", "aliasing analysis and pre-filter design of an EPI");
    analyze->add_option("--epi", ao.epi, "grayscale EPI PNG (rows are views)")->required()->check(CLI::ExistingFile);
    analyze->add_option("--dmax", ao.d_max, "largest disparity of the dense EPI")->capture_default_str();
    analyze->add_option("--rate", ao.rate, "angular undersampling rate")->capture_default_str();
    analyze->add_option("--scales", ao.scales, "spatial downsampling scales")->delimiter(',')->capture_default_str();
    analyze->add_option("--betas", ao.betas, "aliasing suppression ratios")->delimiter(',')->capture_default_str();
    analyze->add_flag("--hann", ao.hann, "apply a Hann window before the DFT");
    analyze->add_option("--out", ao.out)->capture_default_str();

    DecomposeOpts dopt;
    auto* decompose = app.add_subcommand("decompose", "write the pyramid levels of an EPI");
    decompose->add_option("--epi", dopt.epi)->required()->check(CLI::ExistingFile);
    decompose->add_option("--out", dopt.out, "output directory")->required();
    decompose->add_option("--levels", dopt.levels)->capture_default_str();
    decompose->add_option("--alpha-s", dopt.alpha_s)->capture_default_str();
    decompose->add_option("--kernels", dopt.kernels, "pre-filter sizes for levels 2..P")->delimiter(',')->capture_default_str();

    TrainOpts to;
    auto* trn = app.add_subcommand("train", "pre-train or fine-tune the network");
    trn->add_option("--stage", to.stage)->check(CLI::IsMember({"pretrain", "finetune"}))->capture_default_str();
    trn->add_option("--source", to.source, "directory of PNG images or light-field directories")->required();
    trn->add_option("--init", to.init, "checkpoint to start from (required for finetune)");
    trn->add_option("--ckpt", to.ckpt, "output checkpoint (default $LAPEPI_CHECKPOINT_DIR/model.bin)");
    trn->add_option("--trace", to.trace, "loss trace CSV")->capture_default_str();
    trn->add_option("--steps", to.steps)->capture_default_str();
    trn->add_option("--batch", to.batch)->capture_default_str();
    trn->add_option("--log-every", to.log_every)->capture_default_str();
    trn->add_option("--checkpoint-every", to.checkpoint_every)->capture_default_str();
    trn->add_option("--lr-conv", to.lr_conv, "override the stage's convolution learning rate");
    trn->add_option("--lr-deconv", to.lr_deconv, "override the stage's deconvolution learning rate");
    trn->add_option("--decay-every", to.decay_every, "halve-style step decay period (0 disables)")->capture_default_str();
    trn->add_option("--decay-factor", to.decay_factor)->capture_default_str();

    ReconOpts ro;
    auto* rec = app.add_subcommand("reconstruct", "densify a sparse light field");
    rec->add_option("--lf", ro.lf, "input light-field directory")->required();
    rec->add_option("--ckpt", ro.ckpt, "checkpoint (default $LAPEPI_CHECKPOINT_DIR/model.bin)");
    rec->add_option("--alpha", ro.alpha, "angular upsampling factor")->capture_default_str()->check(CLI::IsMember({2, 3, 4, 8}));
    rec->add_option("--mode", ro.mode)->check(CLI::IsMember({"3d", "4d"}))->capture_default_str();
    rec->add_option("--policy", ro.policy, "luma: chroma interpolated linearly; rgb: every channel through the network")
        ->check(CLI::IsMember({"luma", "rgb"}))->capture_default_str();
    rec->add_flag("--copy-inputs", ro.copy_inputs, "keep input views verbatim at their positions");
    rec->add_option("--out", ro.out, "output light-field directory")->required();

    EvalOpts eo;
    auto* ev = app.add_subcommand("eval", "PSNR/SSIM of a reconstruction against ground truth");
    ev->add_option("--recon", eo.recon)->required();
    ev->add_option("--truth", eo.truth)->required();
    ev->add_option("--rate", eo.rate, "input lattice rate; its views are excluded (0 keeps all)")->capture_default_str();
    ev->add_option("--out", eo.out)->capture_default_str();
    ev->add_option("--scene", eo.scene, "scene label for the summary");
    ev->add_option("--ckpt-id", eo.ckpt, "checkpoint label for the summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        if (e.get_exit_code() != 0) err << app.help();
        return 2;
    }

    if (g.verbosity > 0) {
        out << "lapepi " << LAPEPI_VERSION << "\nseed=" << g.seed << "\nthreads=" << g.threads
            << "\nverbosity=" << g.verbosity << "\n";
        for (const CLI::App* sub : app.get_subcommands()) out << "[" << sub->get_name() << "]\n" << sub->config_to_str(true, false);
        out.flush();
    }
    try {
        if (*synth) run_synth(so, g, out);
        else if (*analyze) run_analyze(ao, out);
        else if (*decompose) run_decompose(dopt, out);
        else if (*trn) run_train(to, g, out);
        else if (*rec) run_reconstruct(ro, g, out);
        else if (*ev) run_eval(eo, out);
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace lapepi::cli
