// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "lapepi/adam.hpp"
#include "lapepi/network.hpp"

namespace lapepi::train {

enum class Stage { Pretrain, Finetune };

struct TrainConfig {
    Stage stage = Stage::Pretrain;
    PyramidConfig pyramid;
    int alpha_a = 3;
    int patch_rows = 11;  // input angular size
    int patch_cols = 44;
    int batch = 28;
    int stride_a = 14;
    int stride_w = 20;
    net::AdamConfig adam;
    int max_steps = 1000;
    std::uint64_t seed = 1;
    int log_every = 100;
    int checkpoint_every = 0;  // 0: only at the end
    // Step decay of both learning rates: multiply by decay_factor every decay_every steps (0: off).
    int decay_every = 0;
    double decay_factor = 1.0;
    int threads = 1;

    /// Strides and learning rates of the published schedule for `stage`.
    static TrainConfig for_stage(Stage stage);
    int label_rows() const { return alpha_a * (patch_rows - 1) + 1; }
    void validate() const;
};

/// Luma arrays. Natural images are read with the vertical axis as the angular one.
struct SampleSource {
    enum class Kind { NaturalImage, Epi } kind = Kind::NaturalImage;
    std::vector<Array2> arrays;
};

struct PatchPair {
    LapEpiPyramid input;
    Epi input_epi;
    Epi label;
};

/// Slides a label window over every array at the configured strides, decimates it
/// angularly for the input, and shuffles the pairs with the config seed.
/// Arrays smaller than the window are skipped and counted in `skipped`.
std::vector<PatchPair> extract_patch_pairs(const SampleSource& src, const TrainConfig& cfg, int* skipped = nullptr);

/// Weights ~ N(0, 1e-3^2), biases 0, PReLU slopes 0.1.
net::NetworkParams init_params(std::uint64_t seed, const PyramidConfig& pyramid = {}, int alpha_a = 3,
                               const net::Widths& widths = {});

struct LossPoint {
    int step;
    double loss;
};

struct TrainResult {
    net::NetworkParams params;
    std::vector<LossPoint> trace;
    int steps = 0;
    bool diverged = false;  // a non-finite loss stopped the run; params are the last good ones
};

using CheckpointSink = std::function<void(const net::NetworkParams&, int step)>;

/// Mean batch loss and gradients over `batch` (indices into pairs).
double batch_gradients(const net::NetworkParams& params, const std::vector<PatchPair>& pairs,
                       const std::vector<std::size_t>& batch, net::Gradients& grads, int threads = 1);

TrainResult run_stage(const std::vector<PatchPair>& pairs, const TrainConfig& cfg,
                      const net::NetworkParams* initial = nullptr, const CheckpointSink& sink = {});

void save_checkpoint(const net::NetworkParams& params, const std::filesystem::path& path);
net::NetworkParams load_checkpoint(const std::filesystem::path& path);

/// Writes "step,loss" rows.
std::string loss_trace_csv(const std::vector<LossPoint>& trace);

}  // namespace lapepi::train
