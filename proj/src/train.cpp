// SPDX-License-Identifier: Apache-2.0
#include "lapepi/train.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <sstream>

#include "lapepi/image_io.hpp"
#include "lapepi/parallel.hpp"

namespace lapepi::train {

using net::Gradients;
using net::NetworkParams;

TrainConfig TrainConfig::for_stage(Stage stage) {
    TrainConfig c;
    c.stage = stage;
    if (stage == Stage::Pretrain) {
        c.stride_a = 14;
        c.stride_w = 20;
        c.adam = net::AdamConfig::pretrain();
    } else {
        c.stride_a = 14;
        c.stride_w = 23;
        c.adam = net::AdamConfig::finetune();
    }
    return c;
}

void TrainConfig::validate() const {
    pyramid.validate();
    if (alpha_a < 2) throw Error("alpha_a must be >= 2");
    if (patch_rows < 2 || patch_cols < 1) throw Error("patch must have >= 2 rows");
    if (patch_cols % pyramid.total_factor() != 0)
        throw Error("patch width must be a multiple of " + std::to_string(pyramid.total_factor()));
    if (batch < 1 || stride_a < 1 || stride_w < 1) throw Error("batch and strides must be >= 1");
    if (max_steps < 0 || log_every < 1) throw Error("max_steps must be >= 0 and log_every >= 1");
    if (decay_every < 0 || !(decay_factor > 0.0)) throw Error("invalid learning-rate decay");
}

std::vector<PatchPair> extract_patch_pairs(const SampleSource& src, const TrainConfig& cfg, int* skipped) {
    cfg.validate();
    const int lr = cfg.label_rows(), lc = cfg.patch_cols;
    int skip = 0;
    std::vector<PatchPair> pairs;
    for (const Array2& a : src.arrays) {
        if (a.rows() < lr || a.cols() < lc) {
            ++skip;
            continue;
        }
        for (int r0 = 0; r0 + lr <= a.rows(); r0 += cfg.stride_a)
            for (int c0 = 0; c0 + lc <= a.cols(); c0 += cfg.stride_w) {
                Epi label(lr, lc);
                for (int r = 0; r < lr; ++r)
                    for (int c = 0; c < lc; ++c) label(r, c) = a(r0 + r, c0 + c);
                PatchPair p;
                p.input_epi = angular_decimate(label, cfg.alpha_a);
                p.input = build_lapepi(p.input_epi, cfg.pyramid);
                p.label = std::move(label);
                pairs.push_back(std::move(p));
            }
    }
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    if (skipped) *skipped = skip;
    return pairs;
}

NetworkParams init_params(std::uint64_t seed, const PyramidConfig& pyramid, int alpha_a, const net::Widths& widths) {
    NetworkParams p = NetworkParams::zeros(pyramid, alpha_a, widths);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1e-3);
    for (net::LayerParams& l : p.layers) {
        for (double& w : l.weight) w = nd(rng);
        std::fill(l.slope.begin(), l.slope.end(), 0.1);
    }
    return p;
}

double batch_gradients(const NetworkParams& params, const std::vector<PatchPair>& pairs,
                       const std::vector<std::size_t>& batch, Gradients& grads, int threads) {
    const std::size_t n = batch.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<Gradients> per(n);
    std::vector<double> losses(n);
    parallel_for(n, threads, [&](std::size_t k) {
        const PatchPair& pp = pairs[batch[k]];
        net::ForwardCache cache;
        const Epi pred = net::forward(pp.input, params, &cache);
        Epi g;
        losses[k] = net::l2_loss(pred, pp.label, &g);
        for (double& v : g.data.values()) v *= inv_n;
        per[k] = net::backward(params, cache, g).params;
    });
    // Fixed-order reduction keeps results independent of the thread count.
    grads = std::move(per[0]);
    double loss = losses[0];
    for (std::size_t k = 1; k < n; ++k) {
        grads.add(per[k]);
        loss += losses[k];
    }
    return loss * inv_n;
}

TrainResult run_stage(const std::vector<PatchPair>& pairs, const TrainConfig& cfg, const NetworkParams* initial,
                      const CheckpointSink& sink) {
    cfg.validate();
    if (pairs.empty()) throw Error("run_stage: no training pairs");
    if (cfg.stage == Stage::Finetune && !initial) throw Error("fine-tuning needs initial parameters");

    TrainResult res;
    res.params = initial ? *initial : init_params(cfg.seed, cfg.pyramid, cfg.alpha_a);
    res.params.check_consistent();
    if (res.params.pyramid.levels != cfg.pyramid.levels || res.params.pyramid.alpha_s != cfg.pyramid.alpha_s)
        throw Error("initial parameters were trained for a different pyramid");
    res.params.alpha_a = cfg.alpha_a;
    net::AdamState state = net::AdamState::zeros_like(res.params);

    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();
    std::vector<std::size_t> batch(static_cast<std::size_t>(cfg.batch));

    for (int step = 1; step <= cfg.max_steps; ++step) {
        for (std::size_t& b : batch) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            b = order[cursor++];
        }
        Gradients grads;
        const double loss = batch_gradients(res.params, pairs, batch, grads, cfg.threads);
        if (!std::isfinite(loss) || !std::isfinite(grads.squared_norm())) {
            res.diverged = true;
            break;
        }
        const double scale = cfg.decay_every > 0 ? std::pow(cfg.decay_factor, (step - 1) / cfg.decay_every) : 1.0;
        net::adam_step(res.params, grads, state, cfg.adam, scale);
        res.steps = step;
        if (step % cfg.log_every == 0 || step == cfg.max_steps) res.trace.push_back({step, loss});
        if (sink && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) sink(res.params, step);
    }
    if (sink) sink(res.params, res.steps);
    return res;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kMagic[8] = {'L', 'E', 'P', 'I', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        out.append(bytes.data(), sizeof(T));
    } else {
        out.append(reinterpret_cast<const char*>(&v), sizeof(T));
    }
}

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    template <class T>
    T get() {
        need(sizeof(T));
        std::array<char, sizeof(T)> bytes;
        std::memcpy(bytes.data(), data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw IoError("checkpoint is truncated");
    }
    std::string data_;
    std::size_t pos_ = 0;
};

void put_array(std::string& out, const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    for (double x : v) put(out, x);
}

void get_array(Reader& in, std::vector<double>& v, const std::string& what) {
    const auto n = in.get<std::uint64_t>();
    if (n != v.size()) throw ShapeError("checkpoint array " + what + " has " + std::to_string(n) + " entries, expected " + std::to_string(v.size()));
    for (double& x : v) x = in.get<double>();
}

}  // namespace

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
    params.check_consistent();
    std::string out(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put<std::int32_t>(out, params.pyramid.levels);
    put<std::int32_t>(out, params.pyramid.alpha_s);
    put<std::int32_t>(out, params.alpha_a);
    put<std::int32_t>(out, static_cast<std::int32_t>(params.pyramid.level_kernel_sizes.size()));
    for (int k : params.pyramid.level_kernel_sizes) put<std::int32_t>(out, k);
    put<std::int32_t>(out, params.widths.features);
    put<std::int32_t>(out, params.widths.shrink);
    put<std::int32_t>(out, params.widths.mapping_layers);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.layers.size()));
    std::ostringstream side;
    side << "lapepi checkpoint v" << kVersion << "\nP " << params.pyramid.levels << "\nalpha_s " << params.pyramid.alpha_s
         << "\nalpha_a " << params.alpha_a << "\nparameters " << params.parameter_count() << "\n";
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const net::LayerSpec& s = params.specs[i];
        put<std::uint32_t>(out, static_cast<std::uint32_t>(s.name.size()));
        out += s.name;
        put_array(out, params.layers[i].weight);
        put_array(out, params.layers[i].bias);
        put_array(out, params.layers[i].slope);
        side << s.name << " weight " << s.out_ch << "x" << s.in_ch << "x" << s.k_a << "x" << s.k_w << " bias "
             << s.out_ch << " slope " << params.layers[i].slope.size() << " stride " << s.s_a << "x" << s.s_w << "\n";
    }
    out.append("END.", 4);
    write_file_atomic(path, out);
    std::filesystem::path sidecar = path;
    sidecar += ".txt";
    write_file_atomic(sidecar, side.str());
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint " + path.string());
    Reader in(std::string(std::istreambuf_iterator<char>(f), {}));
    if (in.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) throw IoError("not a lapepi checkpoint");
    const auto version = in.get<std::uint32_t>();
    if (version != kVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
    PyramidConfig pyr;
    pyr.levels = in.get<std::int32_t>();
    pyr.alpha_s = in.get<std::int32_t>();
    const int alpha_a = in.get<std::int32_t>();
    const int nk = in.get<std::int32_t>();
    if (nk < 0 || nk > 64) throw IoError("corrupt checkpoint header");
    pyr.level_kernel_sizes.assign(static_cast<std::size_t>(nk), 0);
    for (int& k : pyr.level_kernel_sizes) k = in.get<std::int32_t>();
    net::Widths w;
    w.features = in.get<std::int32_t>();
    w.shrink = in.get<std::int32_t>();
    w.mapping_layers = in.get<std::int32_t>();
    NetworkParams p;
    try {
        p = NetworkParams::zeros(pyr, alpha_a, w);
    } catch (const Error& e) {
        throw IoError(std::string("corrupt checkpoint header: ") + e.what());
    }
    if (in.get<std::uint32_t>() != p.layers.size()) throw ShapeError("checkpoint layer count does not match");
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        const std::string name = in.bytes(in.get<std::uint32_t>());
        if (name != p.specs[i].name) throw ShapeError("checkpoint layer '" + name + "' where '" + p.specs[i].name + "' was expected");
        get_array(in, p.layers[i].weight, name + ".weight");
        get_array(in, p.layers[i].bias, name + ".bias");
        get_array(in, p.layers[i].slope, name + ".slope");
    }
    if (in.bytes(4) != "END." || !in.at_end()) throw IoError("checkpoint has a corrupt trailer");
    return p;
}

std::string loss_trace_csv(const std::vector<LossPoint>& trace) {
    std::ostringstream os;
    os.precision(12);
    os << "step,loss\n";
    for (const LossPoint& p : trace) os << p.step << "," << p.loss << "\n";
    return os.str();
}

}  // namespace lapepi::train
