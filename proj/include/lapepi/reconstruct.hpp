// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lapepi/network.hpp"

namespace lapepi {

enum class ChannelPolicy {
    LumaNetwork,  // Y through the network, chroma by linear angular interpolation
    PerChannel,   // every stored channel through the network
};

struct ReconConfig {
    int alpha_a = 3;
    ChannelPolicy channels = ChannelPolicy::LumaNetwork;
    bool copy_inputs = false;  // write input views verbatim at their lattice positions
    int threads = 1;

    void validate() const;
};

/// Angular densification of one EPI: n_a rows in, rate * (n_a - 1) + 1 rows out.
using Densifier = std::function<Epi(const Epi&)>;

enum class AngularInterp { Linear, Cubic };

/// Classical interpolation along the angular axis (output row r samples input
/// position r / rate). Cubic uses the Keys kernel (a = -0.5) with edge replication.
Epi angular_interpolate(const Epi& epi, int rate, AngularInterp kind);

/// Pads, decomposes, runs the network with Deconv_A stride cfg.alpha_a, crops and clamps.
Epi reconstruct_epi(const Epi& epi, const net::NetworkParams& params, const ReconConfig& cfg);

/// 3-D light field (n_t == 1): every E_{v*}(u, s) densified along s.
LightField4D reconstruct_lf3d(const LightField4D& lf, const net::NetworkParams& params, const ReconConfig& cfg);

/// Hierarchical two-pass densification of both angular axes.
LightField4D reconstruct_lf4d(const LightField4D& lf, const net::NetworkParams& params, const ReconConfig& cfg);

/// Same traversal with a classical interpolator on every channel (the baseline).
LightField4D interpolate_lf(const LightField4D& lf, int rate, AngularInterp kind, int threads = 1);

/// Generic drivers used by the functions above. `densify(channel)` returns the
/// EPI densifier for that channel. `views_written`, when given, receives the
/// number of writes to every output view (t-major).
LightField4D densify_lf3d(const LightField4D& lf, int rate, const std::function<Densifier(int)>& densify, int threads);
LightField4D densify_lf4d(const LightField4D& lf, int rate, const std::function<Densifier(int)>& densify, int threads,
                          std::vector<int>* views_written = nullptr);

struct UpscaleResult {
    Epi epi;
    std::vector<int> passes;  // Deconv_A strides applied in order
    std::string mode;         // "single:<r>" or "cascade:<r1>x<r2>..."
};

/// Strides the network runs in one pass.
const std::vector<int>& supported_strides();

/// Reaches `target_rate` with one pass when supported, otherwise with the
/// shortest cascade of supported strides (e.g. 9 = 3 then 3).
UpscaleResult upscale_multi(const Epi& epi, const net::NetworkParams& params, int target_rate, ReconConfig cfg);

}  // namespace lapepi
